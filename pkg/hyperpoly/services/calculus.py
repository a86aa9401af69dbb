"""
微分计算模块
单变量限制插值, 偏导数, 极化公式, 随机复估计, 以及独立的暴力基线
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple
import math

import numpy as np
import structlog
from numpy.polynomial import polynomial as P

from hyperpoly.exceptions import (
    BudgetExceededError,
    InvalidInstanceError,
    NumericalBreakdownError,
    OracleInputError,
)
from hyperpoly.services.oracle import DeterminantalOracle, MatrixDeterminant, PolynomialOracle
from hyperpoly.utils.concurrency import ordered_map
from hyperpoly.utils.seeding import make_rng
from hyperpoly.utils.validation import as_point

logger = structlog.get_logger(__name__)

POLARIZATION_LIMIT = 26
RYSER_LIMIT = 20
MIXED_DISCRIMINANT_LIMIT = 8
PATH_AGREEMENT_TOL = 1e-6
SUBSET_CHUNK = 1 << 14


@dataclass(frozen=True)
class UnivariateRestriction:
    """t ↦ p(base + t·direction) 的系数 c_0..c_n（升幂）"""
    coefficients: np.ndarray
    base: np.ndarray
    direction: np.ndarray

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def leading(self) -> float:
        return float(self.coefficients[-1])

    def __call__(self, t):
        return P.polyval(t, self.coefficients)


@dataclass(frozen=True)
class MixedFormRequest:
    """基多项式与n个环境空间中的向量"""
    oracle: PolynomialOracle
    vectors: Tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.vectors) != self.oracle.n:
            raise OracleInputError(
                f"Mixed form needs {self.oracle.n} vectors, got {len(self.vectors)}"
            )
        checked = tuple(as_point(v, self.oracle.shape) for v in self.vectors)
        object.__setattr__(self, "vectors", checked)


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    std_error: float
    samples: int


def chebyshev_nodes(count: int) -> np.ndarray:
    """[-1, 1] 上的第一类Chebyshev节点"""
    k = np.arange(count)
    return np.cos((2 * k + 1) * np.pi / (2 * count))


def interpolate_monomial(nodes: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Newton差商插值, 返回升幂单项式系数"""
    m = len(nodes)
    coef = np.array(values, dtype=float)
    for j in range(1, m):
        coef[j:] = (coef[j:] - coef[j - 1:-1]) / (nodes[j:] - nodes[:-j])
    poly = np.array([coef[-1]])
    for k in range(m - 2, -1, -1):
        shifted = np.concatenate(([0.0], poly))
        shifted[:-1] -= nodes[k] * poly
        shifted[0] += coef[k]
        poly = shifted
    return poly


def restrict(
    oracle: PolynomialOracle,
    base,
    direction,
    scale: Optional[float] = None,
    workers: int = 1,
) -> UnivariateRestriction:
    """在 n+1 个节点上求值, 恢复 p(base + t·direction) 的系数"""
    x = as_point(base, oracle.shape)
    v = as_point(direction, oracle.shape)
    s = float(scale) if scale else max(1.0, float(np.max(np.abs(x))))
    nodes = chebyshev_nodes(oracle.n + 1)

    values = np.array(ordered_map(lambda u: oracle.eval(x + (s * u) * v), nodes, workers))
    # 先在 u = t/s 上插值, 再还原到 t
    scaled = interpolate_monomial(nodes, values)
    coefficients = scaled / s ** np.arange(oracle.n + 1)
    return UnivariateRestriction(coefficients=coefficients, base=x, direction=v)


def _derivative_scale(x: np.ndarray) -> float:
    """插值跨度 ‖x‖∞, x = 0 时取1"""
    magnitude = float(np.max(np.abs(x)))
    return magnitude if magnitude > 0 else 1.0


def partial_derivative(oracle: PolynomialOracle, point, i: int, workers: int = 1) -> float:
    """∂_i p(point), i从0开始"""
    x = as_point(point, oracle.shape)
    if not 0 <= i < oracle.n:
        raise OracleInputError(f"Coordinate index {i} out of range for n = {oracle.n}")
    e_i = np.zeros(oracle.n)
    e_i[i] = 1.0
    restriction = restrict(oracle, x, e_i, scale=_derivative_scale(x), workers=workers)
    return float(restriction.coefficients[1])


def value_and_log_gradient(
    oracle: PolynomialOracle, point, workers: int = 1
) -> Tuple[float, np.ndarray]:
    """q(x) 与 (x_i ∂_i q / q)_i, 共 1 + n(n+1) 次调用"""
    x = as_point(point, oracle.shape)
    if np.any(x <= 0):
        raise OracleInputError("Logarithmic gradient needs a strictly positive point")
    value = oracle.eval(x)
    if not value > 0:
        raise InvalidInstanceError(
            "Polynomial is not positive on the open orthant", value=value
        )
    partials = np.array(
        ordered_map(lambda i: partial_derivative(oracle, x, i), range(oracle.n), workers)
    )
    return value, x * partials / value


def gradient_log(oracle: PolynomialOracle, point, workers: int = 1) -> np.ndarray:
    """f(y) = log q(e^y) 的梯度, 各分量之和为n"""
    return value_and_log_gradient(oracle, point, workers)[1]


def expected_exponent(oracle: PolynomialOracle, workers: int = 1) -> np.ndarray:
    """∇q(e)/q(e), 即按 a_r/q(e) 分布的随机指数向量的均值"""
    return gradient_log(oracle, np.ones(oracle.n), workers)


def _sign_table(codes: np.ndarray, width: int) -> np.ndarray:
    """整数编码 -> ±1 矩阵, 第k位为1表示 -1"""
    bits = (codes[:, None] >> np.arange(width)[None, :]) & 1
    return 1.0 - 2.0 * bits


def _signed_sum(oracle, points_of, total: int, width: int, workers: int) -> float:
    partial_sums = []
    for start in range(0, total, SUBSET_CHUNK):
        codes = np.arange(start, min(start + SUBSET_CHUNK, total))
        signs = _sign_table(codes, width)
        values = np.array(ordered_map(oracle.eval, list(points_of(signs)), workers))
        partial_sums.append(float(values @ np.prod(signs, axis=1)))
    return math.fsum(partial_sums)


def polarization_mixed_derivative(
    oracle: PolynomialOracle, limit: int = POLARIZATION_LIMIT, workers: int = 1
) -> float:
    """∂^n p / ∂x_1…∂x_n, 固定 b_1 = 1, 恰好 2^{n-1} 次调用"""
    n = oracle.n
    if n > limit:
        raise BudgetExceededError("polarization", n, limit)

    def points_of(signs):
        return np.hstack([np.ones((len(signs), 1)), signs])

    total = _signed_sum(oracle, points_of, 1 << (n - 1), n - 1, workers)
    return total / 2.0 ** (n - 1)


def mixed_form(
    request: MixedFormRequest, limit: int = POLARIZATION_LIMIT, workers: int = 1
) -> float:
    """M_p(x_1..x_n) = 2^{-n} Σ_b p(Σ b_i x_i) Π b_i"""
    oracle = request.oracle
    n = oracle.n
    if n > limit:
        raise BudgetExceededError("mixed form", n, limit)
    stacked = np.stack(request.vectors)

    def points_of(signs):
        return np.tensordot(signs, stacked, axes=1)

    total = _signed_sum(oracle, points_of, 1 << n, n, workers)
    return total / 2.0 ** n


def inclusion_exclusion_mixed_derivative(
    request: MixedFormRequest, limit: int = POLARIZATION_LIMIT, workers: int = 1
) -> float:
    """Σ_S (-1)^{n-|S|} p(Σ_{i∈S} x_i), 与 mixed_form 独立的精确路径"""
    oracle = request.oracle
    n = oracle.n
    if n > limit:
        raise BudgetExceededError("inclusion-exclusion", n, limit)
    stacked = np.stack(request.vectors)
    partial_sums = []
    total = 1 << n
    for start in range(0, total, SUBSET_CHUNK):
        codes = np.arange(start, min(start + SUBSET_CHUNK, total))
        members = ((codes[:, None] >> np.arange(n)[None, :]) & 1).astype(float)
        points = np.tensordot(members, stacked, axes=1)
        values = np.array(ordered_map(oracle.eval, list(points), workers))
        signs = np.where((n - members.sum(axis=1)) % 2 == 0, 1.0, -1.0)
        partial_sums.append(float(values @ signs))
    return math.fsum(partial_sums)


def random_complex_mixed_derivative(
    oracle: PolynomialOracle, samples: int, seed: int = 0, workers: int = 1
) -> MonteCarloEstimate:
    """E[p(z) Π conj(z_i)], z_i 在单位圆上均匀分布"""
    if samples < 1:
        raise OracleInputError("samples must be at least 1")
    if oracle.shape != (oracle.n,):
        raise OracleInputError("Random estimator needs an n-variable oracle")
    rng = make_rng(seed)
    # 先统一抽样, 结果与并行度无关
    z = np.exp(2j * np.pi * rng.random((samples, oracle.n)))
    values = np.array(ordered_map(oracle.eval_complex, list(z), workers))
    draws = np.real(values * np.prod(np.conj(z), axis=1))
    mean = float(np.mean(draws))
    std_error = float(np.std(draws, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    logger.debug("Random complex estimate", samples=samples, mean=mean, std_error=std_error)
    return MonteCarloEstimate(mean=mean, std_error=std_error, samples=samples)


def ryser_permanent(matrix, limit: int = RYSER_LIMIT) -> float:
    """Ryser公式: Per(A) = (-1)^n Σ_S (-1)^{|S|} Π_i Σ_{j∈S} a_ij"""
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise OracleInputError("Permanent needs a square matrix", shape=list(a.shape))
    n = a.shape[0]
    if n > limit:
        raise BudgetExceededError("ryser permanent", n, limit)
    if n == 0:
        return 1.0

    partial_sums = []
    total = 1 << n
    for start in range(1, total, SUBSET_CHUNK):
        codes = np.arange(start, min(start + SUBSET_CHUNK, total))
        members = ((codes[:, None] >> np.arange(n)[None, :]) & 1).astype(float)
        row_sums = members @ a.T
        signs = np.where(members.sum(axis=1) % 2 == 0, 1.0, -1.0)
        partial_sums.append(float(np.prod(row_sums, axis=1) @ signs))
    return (-1) ** n * math.fsum(partial_sums)


def brute_mixed_discriminant(
    matrices: Sequence, limit: int = MIXED_DISCRIMINANT_LIMIT, workers: int = 1
) -> float:
    """
    混合判别式 D(A_1..A_n)

    两条路径: det的极化求和与容斥差分, 不一致时视为数值崩溃
    """
    validated = DeterminantalOracle(matrices)
    n = validated.n
    if n > limit:
        raise BudgetExceededError("mixed discriminant", n, limit)

    request = MixedFormRequest(MatrixDeterminant(n), tuple(validated.matrices))
    polarized = mixed_form(request, workers=workers)
    differenced = inclusion_exclusion_mixed_derivative(request, workers=workers)

    magnitude = (n * max(1.0, float(np.max(np.abs(validated.matrices))))) ** n
    allowed = PATH_AGREEMENT_TOL * max(abs(polarized), abs(differenced)) + 1e-9 * magnitude
    if abs(polarized - differenced) > allowed:
        raise NumericalBreakdownError(
            "Mixed discriminant paths disagree",
            polarization=polarized,
            inclusion_exclusion=differenced,
        )
    return polarized
