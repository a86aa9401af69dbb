"""
双曲根计算模块
方向根, p-秩, 方向迹, 抽样双曲性检验, 半平面性质, 秩的次模性
"""
from dataclasses import dataclass, field
from math import comb
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg
import structlog

from hyperpoly.exceptions import (
    DegenerateDirectionError,
    InstanceError,
    InvalidInstanceError,
    NotInConeError,
)
from hyperpoly.services.calculus import restrict
from hyperpoly.services.oracle import PolynomialOracle
from hyperpoly.utils.seeding import make_rng
from hyperpoly.utils.validation import as_point, bitmask_to_subset

logger = structlog.get_logger(__name__)

ROOT_TOL = 1e-7
IMAG_TOL = 1e-6
HERMITE_TOL = 1e-8
LEADING_TOL = 1e-12
RESIDUAL_TOL = 1e-6
HALF_PLANE_TOL = 1e-10
ZERO_WITNESS_TOL = 1e-8
POSITIVE_PART_TOL = 1e-7
CLUSTER_EPS = 1e-14


@dataclass(frozen=True)
class RootProfile:
    """p(x - t·d) 的根, 按实部降序"""
    roots: np.ndarray
    point: np.ndarray
    direction: np.ndarray
    coefficients: np.ndarray
    max_imag: float

    @property
    def scaled_imag(self) -> float:
        return self.max_imag / (1.0 + float(np.max(np.abs(self.roots), initial=0.0)))

    @property
    def residual(self) -> float:
        """max |P(root)| / max |c_i|"""
        values = np.polynomial.polynomial.polyval(self.roots, self.coefficients)
        return float(np.max(np.abs(values), initial=0.0) / np.max(np.abs(self.coefficients)))


@dataclass(frozen=True)
class RankReport:
    rank: int
    tail_coefficients: List[float]
    scaled_coefficients: List[float]
    threshold: float


@dataclass
class HyperbolicityReport:
    passed: bool
    trials: int
    worst_imag: float
    witness: Optional[List[float]] = None


@dataclass
class HalfPlaneReport:
    passed: bool
    trials: int
    min_ratio: float
    witness: Optional[List[complex]] = None
    inequality_checked: bool = False
    inequality_holds: bool = True
    inequality_witness: Optional[List[complex]] = None


@dataclass
class SubmodularityReport:
    holds: bool
    normalized: bool
    pairs_checked: int
    violation: Optional[Dict[str, object]] = None
    ranks: Dict[int, int] = field(default_factory=dict)


def polynomial_roots(coefficients) -> np.ndarray:
    """升幂系数的全部复根（平衡伴随矩阵特征值）"""
    c = np.asarray(coefficients, dtype=float)
    scale = float(np.max(np.abs(c)))
    if scale == 0 or abs(c[-1]) < LEADING_TOL * scale:
        raise DegenerateDirectionError(
            "Leading coefficient vanishes in this direction", leading=float(c[-1])
        )
    if len(c) == 1:
        return np.zeros(0, dtype=complex)
    companion = scipy.linalg.companion(c[::-1])
    balanced, _ = scipy.linalg.matrix_balance(companion)
    roots = scipy.linalg.eigvals(balanced)
    return roots[np.lexsort((-roots.imag, -roots.real))]


def real_rootedness(roots, imag_tol: float = IMAG_TOL, hermite_tol: float = HERMITE_TOL) -> bool:
    """
    根是否全部为实数

    先看虚部; 重根簇会散到复平面, 所以再用幂和Hankel矩阵的半正定性判断
    """
    r = np.asarray(roots, dtype=complex)
    if r.size == 0:
        return True
    radius = float(np.max(np.abs(r)))
    if float(np.max(np.abs(r.imag))) <= imag_tol * (1.0 + radius):
        return True
    normalized = r / max(1.0, radius)
    m = len(normalized)
    sums = np.array([np.sum(normalized ** k).real for k in range(2 * m - 1)])
    hankel = scipy.linalg.hankel(sums[:m], sums[m - 1:])
    eigenvalues = scipy.linalg.eigvalsh(hankel)
    return bool(eigenvalues[0] >= -hermite_tol * max(1.0, eigenvalues[-1]))


def roots_in_direction(oracle: PolynomialOracle, x, d, workers: int = 1) -> RootProfile:
    """p(x - t·d) 作为t的多项式的n个根"""
    point = as_point(x, oracle.shape)
    direction = as_point(d, oracle.shape)
    restriction = restrict(oracle, point, -direction, workers=workers)
    roots = polynomial_roots(restriction.coefficients)
    return RootProfile(
        roots=roots,
        point=point,
        direction=direction,
        coefficients=restriction.coefficients,
        max_imag=float(np.max(np.abs(roots.imag), initial=0.0)),
    )


def trace_in_direction(oracle: PolynomialOracle, x, d, workers: int = 1) -> float:
    """根之和 = -c_{n-1}/c_n"""
    restriction = restrict(oracle, as_point(x, oracle.shape), -as_point(d, oracle.shape), workers=workers)
    c = restriction.coefficients
    if abs(c[-1]) < LEADING_TOL * float(np.max(np.abs(c))):
        raise DegenerateDirectionError("Leading coefficient vanishes in this direction")
    return float(-c[-2] / c[-1])


def _cone_scale(point: np.ndarray, direction: np.ndarray, eigenvalues: np.ndarray) -> float:
    """特征值模的先验上界: x ≤ s·d 时 λ_max(x) ≤ s"""
    if point.ndim == 1:
        magnitude = float(np.max(np.abs(point)))
        low = float(np.min(direction))
        if low > 0:
            return magnitude / low
        reference = float(np.max(np.abs(direction)))
    else:
        magnitude = float(np.linalg.norm(point, 2))
        spectrum = scipy.linalg.eigvalsh(0.5 * (direction + direction.T))
        if spectrum[0] > 0:
            return magnitude / float(spectrum[0])
        reference = float(np.max(np.abs(spectrum)))
    # d不在正卦限时退回到实际根的大小
    bound = magnitude / reference if reference > 0 else 0.0
    return max(bound, float(np.max(np.abs(eigenvalues), initial=0.0)))


def rank_p(
    oracle: PolynomialOracle,
    x,
    d=None,
    root_tol: float = ROOT_TOL,
    imag_tol: float = IMAG_TOL,
    workers: int = 1,
) -> RankReport:
    """
    x在方向d上的非零根个数, 由 p(t·d + x) 的系数读出

    e_k(λ) / (C(n,k) s^k) 落在 [0, 1], s 是由x与d给出的特征值上界;
    秩为最后一个超过 root_tol 的k
    """
    point = as_point(x, oracle.shape)
    direction = as_point(d, oracle.shape) if d is not None else _unit(oracle)
    n = oracle.n
    if not np.any(point):
        # p(t·d) = p(d) t^n
        return RankReport(0, [1.0] + [0.0] * n, [0.0] * n, root_tol)
    restriction = restrict(oracle, point, direction, workers=workers)
    c = restriction.coefficients

    # p(t·d + x) 的根为 -λ_i, c_{n-k}/c_n = e_k(λ)
    eigenvalues = -polynomial_roots(c)
    if not real_rootedness(eigenvalues, imag_tol):
        raise NotInConeError("Roots are not real", max_imag=float(np.max(np.abs(eigenvalues.imag))))

    signed = c[::-1] / c[-1]
    tail = np.abs(signed)
    scale = _cone_scale(point, direction, eigenvalues)
    scaled = np.array([signed[k] / (comb(n, k) * scale ** k) for k in range(1, n + 1)])
    # 实根全非负当且仅当全部初等对称函数非负
    if float(np.min(scaled)) < -imag_tol:
        raise NotInConeError(
            "Point is not in the closed hyperbolicity cone",
            smallest_root=float(np.min(eigenvalues.real)),
        )
    scaled = np.abs(scaled)
    above = np.nonzero(scaled > root_tol)[0]
    rank = int(above[-1]) + 1 if above.size else 0
    return RankReport(rank, tail.tolist(), scaled.tolist(), root_tol)


def _unit(oracle: PolynomialOracle) -> np.ndarray:
    """默认方向: n元时为全1向量, 矩阵时为单位阵"""
    if oracle.shape == (oracle.n,):
        return np.ones(oracle.n)
    return np.eye(oracle.n)


def subset_rank(
    oracle: PolynomialOracle, subset, d=None, root_tol: float = ROOT_TOL, workers: int = 1
) -> int:
    """R(S) = rank_p(Σ_{i∈S} e_i)"""
    x = np.zeros(oracle.n)
    x[list(subset)] = 1.0
    return rank_p(oracle, x, d, root_tol=root_tol, workers=workers).rank


def is_hyperbolic_sampled(
    oracle: PolynomialOracle,
    direction=None,
    trials: int = 200,
    seed: int = 0,
    imag_tol: float = IMAG_TOL,
    hermite_tol: float = HERMITE_TOL,
    workers: int = 1,
) -> HyperbolicityReport:
    """随机高斯点上检查方向根是否全为实数"""
    d = as_point(direction, oracle.shape) if direction is not None else _unit(oracle)
    if not oracle.eval(d) > 0:
        raise DegenerateDirectionError("Direction must satisfy p(d) > 0")

    rng = make_rng(seed)
    points = rng.standard_normal((trials,) + oracle.shape)
    worst = 0.0
    for x in points:
        profile = roots_in_direction(oracle, x, d, workers=workers)
        worst = max(worst, profile.scaled_imag)
        if not real_rootedness(profile.roots, imag_tol, hermite_tol):
            logger.debug("Hyperbolicity witness found", max_imag=profile.max_imag)
            return HyperbolicityReport(False, trials, worst, x.tolist())
    return HyperbolicityReport(True, trials, worst)


def _line_zero_witness(
    oracle: PolynomialOracle, u: np.ndarray, v: np.ndarray, floor: float, workers: int
) -> Optional[np.ndarray]:
    """直线 u + t·v 上实部全正的零点"""
    restriction = restrict(oracle, u, v, workers=workers)
    try:
        roots = polynomial_roots(restriction.coefficients)
    except DegenerateDirectionError:
        return None
    # m重根被扰动约 eps^{1/m}, 边界上的零点不能算作内部零点
    margin = max(POSITIVE_PART_TOL, CLUSTER_EPS ** (1.0 / oracle.n))
    for t in sorted(roots, key=lambda r: -r.imag):
        z = u + t * v
        size = float(np.max(np.abs(z)))
        if np.min(z.real) <= margin * size:
            continue
        if abs(oracle.eval_complex(z)) <= ZERO_WITNESS_TOL * floor * size ** oracle.n:
            return z
    return None


def half_plane_check(
    oracle: PolynomialOracle, trials: int = 200, seed: int = 0, workers: int = 1
) -> HalfPlaneReport:
    """实部全正时 p(z) ≠ 0; P-双曲族另查 |p(x+iy)| ≥ |p(x)|"""
    n = oracle.n
    at_ones = oracle.eval(np.ones(n))
    if not at_ones > 0:
        raise InvalidInstanceError("Polynomial vanishes at the all-ones point", value=at_ones)

    rng = make_rng(seed)
    real_parts = rng.uniform(0.1, 2.0, (trials, n))
    imag_parts = 2.0 * rng.standard_normal((trials, n))
    line_bases = rng.uniform(0.5, 1.5, (trials, n))
    line_directions = rng.standard_normal((trials, n))
    if n >= 2:
        line_bases[0] = 1.0
        line_directions[0] = 0.0
        line_directions[0, :2] = (1.0, -1.0)

    for u, v in zip(line_bases, line_directions):
        z = _line_zero_witness(oracle, u, v, at_ones, workers)
        if z is not None:
            logger.debug("Half-plane zero found", witness=z.tolist())
            return HalfPlaneReport(False, trials, 0.0, z.tolist())

    min_ratio = np.inf
    for z in real_parts + 1j * imag_parts:
        size = float(np.max(np.abs(z)))
        ratio = abs(oracle.eval_complex(z)) / (at_ones * size ** n)
        min_ratio = min(min_ratio, ratio)
        if ratio <= HALF_PLANE_TOL:
            return HalfPlaneReport(False, trials, float(ratio), z.tolist())

    report = HalfPlaneReport(True, trials, float(min_ratio))
    if oracle.p_hyperbolic:
        report.inequality_checked = True
        for x, y in zip(real_parts, imag_parts):
            if abs(oracle.eval_complex(x + 1j * y)) < abs(oracle.eval(x)) * (1.0 - 1e-9):
                report.inequality_holds = False
                report.inequality_witness = (x + 1j * y).tolist()
                report.passed = False
                break
    return report


def rank_submodularity_check(
    oracle: PolynomialOracle,
    trials: int = 500,
    seed: int = 0,
    exhaustive: bool = False,
    root_tol: float = ROOT_TOL,
    workers: int = 1,
) -> SubmodularityReport:
    """R(A∪B) + R(A∩B) ≤ R(A) + R(B), 且 R(∅) = 0"""
    if not oracle.p_hyperbolic:
        raise InstanceError(
            "Rank submodularity needs a determinantal or product instance",
            kind=oracle.kind.value,
        )
    n = oracle.n
    ranks: Dict[int, int] = {}

    def rank_of(mask: int) -> int:
        if mask not in ranks:
            ranks[mask] = subset_rank(oracle, bitmask_to_subset(mask, n), root_tol=root_tol, workers=workers)
        return ranks[mask]

    if exhaustive:
        full = 1 << n
        pairs: List[Tuple[int, int]] = [(a, b) for a in range(full) for b in range(full)]
    else:
        drawn = make_rng(seed).integers(0, 1 << n, size=(trials, 2))
        pairs = [(int(a), int(b)) for a, b in drawn]

    report = SubmodularityReport(True, rank_of(0) == 0, len(pairs))
    for a, b in pairs:
        lhs = rank_of(a | b) + rank_of(a & b)
        rhs = rank_of(a) + rank_of(b)
        if lhs > rhs:
            report.holds = False
            report.violation = {
                "a": bitmask_to_subset(a, n),
                "b": bitmask_to_subset(b, n),
                "union_plus_intersection": lhs,
                "sum": rhs,
            }
            break
    report.ranks = dict(sorted(ranks.items()))
    return report
