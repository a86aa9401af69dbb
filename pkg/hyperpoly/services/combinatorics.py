"""
组合模块
支撑集几何（Newton多面体成员判定）, Hall/Rado条件, 结构检验与暴力基线
"""
from dataclasses import dataclass, field
from itertools import combinations, permutations
from math import sqrt
from typing import Dict, List, Optional, Tuple

import numpy as np
import structlog

from hyperpoly.exceptions import BudgetExceededError, InstanceError
from hyperpoly.services.oracle import (
    DeterminantalOracle,
    ExplicitPolynomial,
    MatrixDeterminant,
    PolynomialOracle,
    SupportSet,
)
from hyperpoly.services.spectra import rank_p, subset_rank
from hyperpoly.utils.concurrency import ordered_map
from hyperpoly.utils.linalg import numerical_rank
from hyperpoly.utils.validation import bitmask_to_subset

logger = structlog.get_logger(__name__)

HULL_TOL = 1e-7
FW_GAP_TOL = 1e-15
FW_MAX_ITERATIONS = 20000
SUBSET_LIMIT = 24
RADO_LIMIT = 20
SATURATION_LIMIT = 8
POLYMATROID_LIMIT = 6
MATCHING_LIMIT = 20
RANK_REL_TOL = 1e-8
PATTERN_TOL = 1e-6
CHUNK = 1 << 12


@dataclass(frozen=True)
class SeparatingCertificate:
    """Σ_{i∈S} r_i < |S| 对支撑中所有 r 成立"""
    subset: Tuple[int, ...]
    slack: float
    implied_distance: float


@dataclass
class HullReport:
    inside: bool
    distance: float
    iterations: int
    gap: float
    nearest: np.ndarray
    weights: Dict[Tuple[int, ...], float] = field(default_factory=dict)
    normal: Optional[np.ndarray] = None
    certificate: Optional[SeparatingCertificate] = None


@dataclass
class HallReport:
    holds: bool
    violating_subset: Optional[Tuple[int, ...]] = None


@dataclass
class RadoReport:
    positive: bool
    violating_subset: Optional[Tuple[int, ...]] = None
    violating_rank: Optional[int] = None
    cross_checked: int = 0
    cross_check_agrees: bool = True


@dataclass
class SaturationReport:
    holds: bool
    checked: int
    witness: Optional[Tuple[int, ...]] = None


@dataclass
class PolymatroidReport:
    holds: bool
    ranks: List[int]
    missing: List[Tuple[int, ...]] = field(default_factory=list)
    extra: List[Tuple[int, ...]] = field(default_factory=list)


def exponent_vectors(n: int) -> np.ndarray:
    """I_{n,n} 的全部元素（隔板法枚举）"""
    rows = []
    for bars in combinations(range(2 * n - 1), n - 1):
        edges = (-1,) + bars + (2 * n - 1,)
        rows.append([edges[k + 1] - edges[k] - 1 for k in range(n)])
    return np.array(rows, dtype=int)


def _subset_members(codes: np.ndarray, n: int) -> np.ndarray:
    return ((codes[:, None] >> np.arange(n)[None, :]) & 1).astype(float)


def _implied_distance(n: int, size: int) -> float:
    return sqrt(n / (size * (n - size)))


def _certificate_from_normal(
    vertices: np.ndarray, point: np.ndarray, normal: np.ndarray
) -> Optional[SeparatingCertificate]:
    """法向量只取两个值时, 高值坐标构成分离子集"""
    n = len(point)
    scale = float(np.max(np.abs(normal)))
    if scale == 0:
        return None
    levels = normal / scale
    high = float(np.max(levels))
    low = float(np.min(levels))
    upper = np.abs(levels - high) <= PATTERN_TOL
    lower = np.abs(levels - low) <= PATTERN_TOL
    if high - low <= PATTERN_TOL or not np.all(upper | lower):
        return None
    subset = tuple(int(i) for i in np.nonzero(upper)[0])
    slack = float(point[list(subset)].sum() - np.max(vertices[:, list(subset)].sum(axis=1)))
    if not slack > 0 or len(subset) == n:
        return None
    return SeparatingCertificate(subset, slack, _implied_distance(n, len(subset)))


def newton_polytope_contains(
    supp: SupportSet,
    point=None,
    tol: float = HULL_TOL,
    gap_tol: float = FW_GAP_TOL,
    max_iterations: int = FW_MAX_ITERATIONS,
) -> HullReport:
    """
    point 到 CO(supp) 的距离

    带away步的Frank-Wolfe, 精确线搜索; 距离 ≤ tol 视为在内部
    """
    if len(supp) == 0:
        raise InstanceError("Support is empty")
    vertices = supp.as_array().astype(float)
    p = np.ones(supp.n) if point is None else np.asarray(point, dtype=float)
    if p.shape != (supp.n,):
        raise InstanceError(f"Point must have length {supp.n}")

    start = int(np.argmin(np.sum((vertices - p) ** 2, axis=1)))
    weights = np.zeros(len(vertices))
    weights[start] = 1.0
    x = vertices[start].copy()
    gap = np.inf
    iteration = 0

    while iteration < max_iterations:
        g = x - p
        scores = vertices @ g
        toward = int(np.argmin(scores))
        gap = float(g @ x - scores[toward])
        if gap <= gap_tol:
            break
        active = np.nonzero(weights > 0)[0]
        away = int(active[np.argmax(scores[active])])

        d_fw = vertices[toward] - x
        d_away = x - vertices[away]
        if g @ d_fw <= g @ d_away:
            direction, step_max, is_away = d_fw, 1.0, False
        else:
            w_away = weights[away]
            step_max = w_away / (1.0 - w_away) if w_away < 1.0 else np.inf
            direction, is_away = d_away, True

        norm2 = float(direction @ direction)
        if norm2 == 0:
            break
        step = min(max(-float(g @ direction) / norm2, 0.0), step_max)
        x = x + step * direction
        if is_away:
            weights *= 1.0 + step
            weights[away] -= step
            if step == step_max:
                weights[away] = 0.0
        else:
            weights *= 1.0 - step
            weights[toward] += step
        iteration += 1

    distance = float(np.linalg.norm(x - p))
    inside = distance <= tol
    report = HullReport(
        inside=inside,
        distance=distance,
        iterations=iteration,
        gap=gap,
        nearest=x,
        weights={
            tuple(int(r) for r in vertices[j]): float(weights[j])
            for j in np.nonzero(weights > 0)[0]
        },
    )
    if not inside:
        report.normal = p - x
        report.certificate = _certificate_from_normal(vertices, p, report.normal)
    logger.debug("Hull projection", distance=distance, iterations=iteration, inside=inside)
    return report


def hall_condition(supp: SupportSet, limit: int = SUBSET_LIMIT, workers: int = 1) -> HallReport:
    """max_{r∈supp} Σ_{i∈S} r_i ≥ |S| 对所有非空 S, 按colex序返回第一个违反者"""
    n = supp.n
    if n > limit:
        raise BudgetExceededError("hall condition", n, limit)
    if len(supp) == 0:
        raise InstanceError("Support is empty")
    vertices = supp.as_array().astype(float)
    total = 1 << n

    def first_violation(start: int) -> Optional[int]:
        codes = np.arange(max(start, 1), min(start + CHUNK, total))
        members = _subset_members(codes, n)
        best = np.max(members @ vertices.T, axis=1) if len(vertices) else np.zeros(len(codes))
        failing = np.nonzero(best < members.sum(axis=1))[0]
        return int(codes[failing[0]]) if failing.size else None

    for found in ordered_map(first_violation, range(0, total, CHUNK), workers):
        if found is not None:
            return HallReport(False, bitmask_to_subset(found, n))
    return HallReport(True)


def separating_subset(supp: SupportSet, limit: int = SUBSET_LIMIT, workers: int = 1) -> Optional[SeparatingCertificate]:
    """Hall条件不成立时的分离子集及其隐含的距离下界"""
    report = hall_condition(supp, limit, workers)
    if report.holds:
        return None
    subset = report.violating_subset
    vertices = supp.as_array()
    slack = float(len(subset) - np.max(vertices[:, list(subset)].sum(axis=1)))
    return SeparatingCertificate(subset, slack, _implied_distance(supp.n, len(subset)))


def rado_check(
    instance,
    limit: int = RADO_LIMIT,
    rel_tol: float = RANK_REL_TOL,
    root_tol: float = 1e-7,
    cross_check_limit: int = 8,
    workers: int = 1,
) -> RadoReport:
    """rank(Σ_{i∈S} A_i) ≥ |S| 对所有非空 S"""
    if isinstance(instance, DeterminantalOracle):
        oracle = instance
    elif hasattr(instance, "matrices"):
        oracle = DeterminantalOracle(instance.matrices)
    else:
        oracle = DeterminantalOracle(instance)
    n = oracle.n
    if n > limit:
        raise BudgetExceededError("rado check", n, limit)
    flat = oracle.matrices.reshape(n, n * n)
    total = 1 << n

    def ranks_of(start: int) -> np.ndarray:
        codes = np.arange(max(start, 1), min(start + CHUNK, total))
        sums = (_subset_members(codes, n) @ flat).reshape(len(codes), n, n)
        return np.array([numerical_rank(m, rel_tol) for m in sums])

    ranks = np.concatenate([np.zeros(1, dtype=int)] + ordered_map(ranks_of, range(0, total, CHUNK), workers))
    sizes = np.array([bin(mask).count("1") for mask in range(total)])
    failing = np.nonzero(ranks < sizes)[0]

    report = RadoReport(positive=failing.size == 0)
    if failing.size:
        report.violating_subset = bitmask_to_subset(int(failing[0]), n)
        report.violating_rank = int(ranks[failing[0]])

    # 用 det 的方向秩独立复核
    determinant = MatrixDeterminant(n)
    identity = np.eye(n)
    masks = range(1, total) if n <= cross_check_limit else failing[:1].tolist()
    for mask in masks:
        members = np.array([(mask >> i) & 1 for i in range(n)], dtype=float)
        matrix = np.tensordot(members, oracle.matrices, axes=1)
        via_roots = rank_p(determinant, matrix, identity, root_tol=root_tol).rank
        report.cross_checked += 1
        if via_roots != int(ranks[mask]):
            report.cross_check_agrees = False
            logger.warning(
                "Rank cross-check disagrees",
                subset=bitmask_to_subset(int(mask), n), svd_rank=int(ranks[mask]), root_rank=via_roots,
            )
    return report


def check_lattice_saturation(
    poly: ExplicitPolynomial, limit: int = SATURATION_LIMIT, tol: float = HULL_TOL
) -> SaturationReport:
    """CO(supp) ∩ I_{n,n} = supp; 不成立说明不是S-双曲"""
    n = poly.n
    if n > limit:
        raise BudgetExceededError("hull lattice check", n, limit)
    supp = poly.support
    vertices = supp.as_array()
    lower, upper = vertices.min(axis=0), vertices.max(axis=0)
    checked = 0
    for point in exponent_vectors(n):
        key = tuple(int(r) for r in point)
        if key in supp or np.any(point < lower) or np.any(point > upper):
            continue
        checked += 1
        if newton_polytope_contains(supp, point, tol=tol).inside:
            return SaturationReport(False, checked, key)
    return SaturationReport(True, checked)


def check_polymatroid(
    oracle: PolynomialOracle,
    poly: Optional[ExplicitPolynomial] = None,
    limit: int = POLYMATROID_LIMIT,
    root_tol: float = 1e-7,
) -> PolymatroidReport:
    """supp = {r ∈ I_{n,n} : Σ_{i∈S} r_i ≤ R(S) 对所有 S}"""
    if not oracle.p_hyperbolic:
        raise InstanceError(
            "Polymatroid check needs a determinantal or product instance", kind=oracle.kind.value
        )
    n = oracle.n
    if n > limit:
        raise BudgetExceededError("polymatroid check", n, limit)
    poly = poly if poly is not None else oracle.expand()

    total = 1 << n
    ranks = [subset_rank(oracle, bitmask_to_subset(mask, n), root_tol=root_tol) for mask in range(total)]
    members = _subset_members(np.arange(total), n)
    points = exponent_vectors(n)
    within = np.all(points @ members.T <= np.array(ranks)[None, :] + 1e-9, axis=1)

    polymatroid = {tuple(int(r) for r in p) for p in points[within]}
    support = set(poly.support.vectors)
    return PolymatroidReport(
        holds=polymatroid == support,
        ranks=ranks,
        missing=sorted(polymatroid - support),
        extra=sorted(support - polymatroid),
    )


def hamiltonian_circuits(adjacency, limit: int = SATURATION_LIMIT + 2) -> int:
    """有向Hamilton回路数: 单圈置换σ满足 A(i, σ(i)) = 1"""
    a = np.asarray(adjacency)
    n = a.shape[0]
    if n > limit:
        raise BudgetExceededError("hamiltonian circuits", n, limit)
    if n == 1:
        return int(a[0, 0] != 0)
    count = 0
    # 固定起点0, 枚举其余顶点的访问顺序
    for order in permutations(range(1, n)):
        walk = (0,) + order + (0,)
        if all(a[walk[k], walk[k + 1]] for k in range(n)):
            count += 1
    return count


def brute_matching(matrix, limit: int = MATCHING_LIMIT) -> bool:
    """按列位掩码动态规划判断是否存在完美匹配"""
    a = np.asarray(matrix)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InstanceError("Matching needs a square matrix")
    n = a.shape[0]
    if n > limit:
        raise BudgetExceededError("brute matching", n, limit)

    reachable = np.array([0], dtype=np.int64)
    for row in a:
        columns = np.nonzero(row)[0]
        step = []
        for j in columns:
            free = reachable[((reachable >> j) & 1) == 0]
            step.append(free | (1 << int(j)))
        if not step:
            return False
        reachable = np.unique(np.concatenate(step))
        if reachable.size == 0:
            return False
    return True
