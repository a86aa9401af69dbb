"""
实例生成模块
带种子的随机实例, 供bench, verify和测试共用
"""
from typing import List, Optional

import numpy as np

from hyperpoly.exceptions import InstanceError


def random_zero_one_matrix(n: int, rng: np.random.Generator, density: float = 0.5) -> np.ndarray:
    return (rng.random((n, n)) < density).astype(int)


def permutation_matrix(permutation) -> np.ndarray:
    perm = list(permutation)
    matrix = np.zeros((len(perm), len(perm)), dtype=int)
    matrix[np.arange(len(perm)), perm] = 1
    return matrix


def uniform_matrix(n: int) -> np.ndarray:
    """(1/n)·全1矩阵, van der Waerden 极值情形"""
    return np.full((n, n), 1.0 / n)


def random_doubly_stochastic(n: int, rng: np.random.Generator, terms: Optional[int] = None) -> np.ndarray:
    """随机置换矩阵的凸组合（Birkhoff）"""
    count = terms or n + 1
    weights = rng.dirichlet(np.ones(count))
    matrix = np.zeros((n, n))
    for w in weights:
        matrix += w * permutation_matrix(rng.permutation(n))
    return matrix


def random_gram_tuple(
    n: int,
    rng: np.random.Generator,
    mode: str = "full",
    max_entry: int = 2,
) -> List[np.ndarray]:
    """
    整数Gram矩阵组, 系数因此为整数

    full: A_i = B_i B_iᵀ, B_i 为随机整数方阵
    pool: A_i = Σ_{k∈K_i} v_k v_kᵀ, v_k 取自共享向量池, Rado条件可能不成立
    """
    if mode == "full":
        tuple_ = []
        for _ in range(n):
            b = rng.integers(-max_entry, max_entry + 1, size=(n, n))
            tuple_.append(b @ b.T)
        return tuple_
    if mode == "pool":
        pool = _independent_pool(n, rng, max_entry)
        tuple_ = []
        for _ in range(n):
            size = int(rng.integers(1, 3))
            chosen = rng.choice(n, size=size, replace=False)
            tuple_.append(sum(np.outer(pool[k], pool[k]) for k in chosen))
        return tuple_
    raise InstanceError(f"Unknown Gram tuple mode: {mode}")


def _independent_pool(n: int, rng: np.random.Generator, max_entry: int) -> np.ndarray:
    while True:
        pool = rng.integers(-max_entry, max_entry + 1, size=(n, n))
        if abs(round(np.linalg.det(pool))) >= 1:
            return pool


def diagonal_tuple(matrix) -> List[np.ndarray]:
    """A_i = Diag(B 的第i行), 混合判别式等于 Per(B)"""
    b = np.asarray(matrix, dtype=float)
    return [np.diag(row) for row in b]
