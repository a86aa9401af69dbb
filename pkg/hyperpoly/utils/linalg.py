"""
线性代数工具函数
"""
import numpy as np
import scipy.linalg


def helmert_basis(n: int) -> np.ndarray:
    """超平面 {Σy = 0} 的标准正交基, 形状 n x (n-1)"""
    basis = np.zeros((n, n - 1))
    for k in range(1, n):
        basis[:k, k - 1] = 1.0
        basis[k, k - 1] = -float(k)
        basis[:, k - 1] /= np.sqrt(k * (k + 1))
    return basis


def symmetry_defect(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix - matrix.T))) if matrix.size else 0.0


def project_psd(matrix: np.ndarray) -> np.ndarray:
    """把负特征值截为0后重构"""
    sym = 0.5 * (matrix + matrix.T)
    w, v = scipy.linalg.eigh(sym)
    w = np.maximum(w, 0.0)
    rebuilt = (v * w) @ v.T
    return 0.5 * (rebuilt + rebuilt.T)


def numerical_rank(matrix: np.ndarray, rel_tol: float = 1e-8) -> int:
    """奇异值大于 rel_tol * σ_max 的个数"""
    if matrix.size == 0:
        return 0
    s = scipy.linalg.svdvals(matrix)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))
