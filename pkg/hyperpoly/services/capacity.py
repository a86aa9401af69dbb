"""
容量与凸判定模块
f(y) = log q(e^y) 在超平面 {Σy = 0} 上的椭球法极小化, 多面体判定, 容量估计
"""
from dataclasses import dataclass, field
from enum import Enum
from math import ceil, factorial, log, sqrt
from typing import Optional, Tuple

import numpy as np
import scipy.linalg
import structlog

from hyperpoly.exceptions import (
    BudgetExceededError,
    InstanceError,
    InvalidInstanceError,
    NumericalBreakdownError,
    UnboundedObjectiveError,
)
from hyperpoly.services.calculus import polarization_mixed_derivative, value_and_log_gradient
from hyperpoly.services.oracle import PolynomialOracle
from hyperpoly.utils.linalg import helmert_basis
from hyperpoly.utils.validation import as_point

logger = structlog.get_logger(__name__)

DECISION_DELTA = 1.0 / 3.0
IN_THRESHOLD = -1.0 / 3.0
NOT_THRESHOLD = -2.0 / 3.0
ELLIPSOID_MARGIN = 16
GRADIENT_TOL = 1e-9
RESOLUTION_TOL = 1e-12
VDW_LIMIT = 12


class Verdict(str, Enum):
    IN_POLYTOPE = "IN_POLYTOPE"
    NOT_IN_POLYTOPE = "NOT_IN_POLYTOPE"
    INCONCLUSIVE = "INCONCLUSIVE"


class LogConvexObjective:
    """f(y) = log q(e^y) - offset, 限制在超平面上"""

    def __init__(self, oracle: PolynomialOracle, offset: float = 0.0, workers: int = 1):
        at_ones = oracle.eval(np.ones(oracle.n))
        if not at_ones > 0:
            raise InvalidInstanceError("Polynomial vanishes at the all-ones point", value=at_ones)
        self.oracle = oracle
        self.n = oracle.n
        self.offset = offset
        self.workers = workers
        self.basis = helmert_basis(oracle.n)

    def value(self, y) -> float:
        y = as_point(y, (self.n,))
        top = float(np.max(y))
        return log(self.oracle.eval(np.exp(y - top))) + self.n * top - self.offset

    def value_and_gradient(self, y) -> Tuple[float, np.ndarray]:
        """f(y) 与 ∇f(y), 梯度分量之和为n"""
        y = as_point(y, (self.n,))
        top = float(np.max(y))
        # 对数梯度是0次齐次的, 平移不影响
        q, gradient = value_and_log_gradient(self.oracle, np.exp(y - top), self.workers)
        return log(q) + self.n * top - self.offset, gradient

    def lift(self, z: np.ndarray) -> np.ndarray:
        return self.basis @ z

    def restricted(self, z: np.ndarray) -> Tuple[float, np.ndarray]:
        """超平面坐标下的值与投影梯度"""
        value, gradient = self.value_and_gradient(self.lift(z))
        return value, self.basis.T @ gradient


@dataclass
class EllipsoidState:
    """E = {center + factor·u : ‖u‖ ≤ 1}, 形状矩阵为 factor·factorᵀ"""
    center: np.ndarray
    factor: np.ndarray
    radius: float
    best_value: float = float("inf")
    best_point: Optional[np.ndarray] = None
    iteration: int = 0
    converged: bool = False

    @classmethod
    def ball(cls, dimension: int, radius: float) -> "EllipsoidState":
        return cls(
            center=np.zeros(dimension),
            factor=radius * np.eye(dimension),
            radius=radius,
            best_point=np.zeros(dimension),
        )

    @property
    def shape(self) -> np.ndarray:
        return self.factor @ self.factor.T

    @property
    def min_semi_axis(self) -> float:
        return float(scipy.linalg.svdvals(self.factor)[-1])


@dataclass
class EllipsoidResult:
    min_value: float
    argmin: np.ndarray
    iterations: int
    stopped: str
    state: EllipsoidState


@dataclass
class DecisionReport:
    verdict: Verdict
    min_value_found: Optional[float]
    oracle_calls: int
    gamma: float
    iterations: int
    delta: float
    log_q_e: Optional[float]
    coefficient_floor: float
    stopped: str
    p_hyperbolic: bool


@dataclass
class CapacityReport:
    capacity: float
    log_capacity: float
    argmin: np.ndarray
    gamma: float
    delta: float
    iterations: int
    oracle_calls: int


@dataclass
class VdwReport:
    ratio: float
    mixed_derivative: float
    capacity: float
    lower_bound: float
    lower_bound_holds: bool
    upper_bound_holds: bool
    lower_bound_asserted: bool = field(default=True)


def objective(oracle: PolynomialOracle, normalized: bool = False, workers: int = 1) -> LogConvexObjective:
    """构造 f; normalized 时减去 log(系数下界), 使系数视为 ≥ 1"""
    offset = log(oracle.coefficient_floor()) if normalized else 0.0
    return LogConvexObjective(oracle, offset=offset, workers=workers)


def iteration_budget(dimension: int, gamma: float, delta: float, n: int, margin: int) -> int:
    """ceil(2k² ln((2δ + 2γn)/δ)) + margin"""
    if dimension == 0:
        return 0
    return int(ceil(2 * dimension ** 2 * log((2 * delta + 2 * gamma * n) / delta))) + margin


def _central_cut(state: EllipsoidState, g: np.ndarray) -> None:
    """平方根形式的中心切割, factor 始终非奇异"""
    k = len(state.center)
    h = state.factor.T @ g
    norm = float(np.linalg.norm(h))
    if not norm > 0 or not np.isfinite(norm):
        raise NumericalBreakdownError(
            "Cut direction vanishes in the ellipsoid frame", iteration=state.iteration
        )
    if k == 1:
        # 一维时椭球法退化为区间二分
        state.center = state.center - np.sign(h) * state.factor[:, 0] / 2.0
        state.factor = state.factor / 2.0
        return

    unit = h / norm
    state.center = state.center - (state.factor @ unit) / (k + 1)
    shrink = 1.0 - sqrt((k - 1.0) / (k + 1.0))
    stretch = k / sqrt(k * k - 1.0)
    state.factor = stretch * (state.factor - shrink * np.outer(state.factor @ unit, unit))


def ellipsoid_minimize(
    obj: LogConvexObjective,
    gamma: float,
    delta: float,
    state: Optional[EllipsoidState] = None,
    margin: int = ELLIPSOID_MARGIN,
    gradient_tol: float = GRADIENT_TOL,
    stop_below: Optional[float] = None,
) -> EllipsoidResult:
    """
    中心切割椭球法

    可行中心用目标梯度切割, 否则用球约束切割; 记录最好的可行值
    传入state时从上次的状态继续, 预算按新的delta计算
    最短半轴低于分辨率时以当前最好值停止
    """
    if not gamma > 0 or not delta > 0:
        raise InstanceError("gamma and delta must be positive", gamma=gamma, delta=delta)
    k = obj.n - 1
    if state is None:
        state = EllipsoidState.ball(k, gamma)
    budget = iteration_budget(k, state.radius, delta, obj.n, margin)

    if k == 0:
        state.best_value = obj.value(np.zeros(obj.n))
        state.converged = True
        return EllipsoidResult(state.best_value, np.zeros(obj.n), 0, "trivial", state)

    stopped = "budget"
    while state.iteration < budget:
        if state.converged:
            stopped = "gradient"
            break
        if stop_below is not None and state.best_value <= stop_below:
            stopped = "threshold"
            break
        if state.min_semi_axis <= RESOLUTION_TOL * state.radius:
            stopped = "resolution"
            break
        center = state.center
        if float(np.linalg.norm(center)) > state.radius:
            g = center
        else:
            value, g = obj.restricted(center)
            if value < state.best_value:
                state.best_value = value
                state.best_point = center.copy()
            if float(np.linalg.norm(g)) <= gradient_tol:
                state.converged = True
                stopped = "gradient"
                break
        _central_cut(state, g)
        state.iteration += 1
    else:
        if stop_below is not None and state.best_value <= stop_below:
            stopped = "threshold"

    logger.debug(
        "Ellipsoid finished",
        iterations=state.iteration, best_value=state.best_value, stopped=stopped,
    )
    return EllipsoidResult(
        min_value=state.best_value,
        argmin=obj.lift(state.best_point),
        iterations=state.iteration,
        stopped=stopped,
        state=state,
    )


def default_gamma(n: int, log_q_e: float, distance: Optional[float] = None) -> float:
    """γ = (Q + 1)Δ, 默认 Δ = √n/2（S-双曲时距离 ≥ 2/√n）"""
    spread = 1.0 / distance if distance else sqrt(n) / 2.0
    return (log_q_e + 1.0) * spread


def classify(min_value: float) -> Verdict:
    if min_value >= IN_THRESHOLD:
        return Verdict.IN_POLYTOPE
    if min_value <= NOT_THRESHOLD:
        return Verdict.NOT_IN_POLYTOPE
    return Verdict.INCONCLUSIVE


def decide_polytope(
    oracle: PolynomialOracle,
    delta: float = DECISION_DELTA,
    distance: Optional[float] = None,
    margin: int = ELLIPSOID_MARGIN,
    gradient_tol: float = GRADIENT_TOL,
    early_stop: bool = True,
    workers: int = 1,
) -> DecisionReport:
    """判定 e 是否属于 CO(supp(q))"""
    start_calls = oracle.call_count
    floor = oracle.coefficient_floor()
    q_e = oracle.eval(np.ones(oracle.n))
    if not q_e >= 0.5 * floor:
        # 非零时 q(e) 不小于系数下界, 否则 q ≡ 0, 支撑为空
        logger.debug("Zero polynomial", kind=oracle.kind.value)
        return DecisionReport(
            verdict=Verdict.NOT_IN_POLYTOPE,
            min_value_found=None,
            oracle_calls=oracle.call_count - start_calls,
            gamma=0.0,
            iterations=0,
            delta=delta,
            log_q_e=None,
            coefficient_floor=floor,
            stopped="zero_polynomial",
            p_hyperbolic=oracle.p_hyperbolic,
        )
    obj = objective(oracle, normalized=True, workers=workers)
    log_q_e = max(0.0, log(q_e / floor))
    gamma = default_gamma(oracle.n, log_q_e, distance)

    result = ellipsoid_minimize(
        obj, gamma, delta,
        margin=margin,
        gradient_tol=gradient_tol,
        stop_below=NOT_THRESHOLD if early_stop else None,
    )
    verdict = classify(result.min_value)
    if verdict is Verdict.INCONCLUSIVE:
        logger.warning(
            "Decision value in the forbidden band",
            min_value=result.min_value, gamma=gamma, kind=oracle.kind.value,
        )

    report = DecisionReport(
        verdict=verdict,
        min_value_found=result.min_value,
        oracle_calls=oracle.call_count - start_calls,
        gamma=gamma,
        iterations=result.iterations,
        delta=delta,
        log_q_e=log_q_e,
        coefficient_floor=floor,
        stopped=result.stopped,
        p_hyperbolic=oracle.p_hyperbolic,
    )
    logger.debug("Polytope decision", verdict=verdict.value, oracle_calls=report.oracle_calls)
    return report


def _check_bounded(result: EllipsoidResult, offset: float) -> None:
    # 系数视为 ≥ 1 时, e 在多面体内则 f ≥ 0
    if result.min_value - offset <= NOT_THRESHOLD:
        raise UnboundedObjectiveError(
            "Objective is unbounded below; capacity is zero",
            min_value=result.min_value, stopped=result.stopped,
        )


def capacity_estimate(
    oracle: PolynomialOracle,
    accuracy: float = 1e-4,
    gamma: Optional[float] = None,
    margin: int = ELLIPSOID_MARGIN,
    gradient_tol: float = GRADIENT_TOL,
    workers: int = 1,
) -> CapacityReport:
    """Cap(q) = inf_{Πα=1} q(α), 在半径γ的球内逐步缩小δ求得"""
    start_calls = oracle.call_count
    obj = objective(oracle, workers=workers)
    floor = oracle.coefficient_floor()
    log_q_e = max(0.0, log(oracle.eval(np.ones(oracle.n)) / floor))
    radius = gamma or default_gamma(oracle.n, log_q_e)
    offset = log(floor)

    delta = DECISION_DELTA
    result = ellipsoid_minimize(obj, radius, delta, margin=margin, gradient_tol=gradient_tol)
    _check_bounded(result, offset)
    while delta > accuracy and result.stopped not in ("gradient", "resolution"):
        delta = max(delta / 10.0, accuracy)
        result = ellipsoid_minimize(
            obj, radius, delta, state=result.state, margin=margin, gradient_tol=gradient_tol
        )
        _check_bounded(result, offset)

    return CapacityReport(
        capacity=float(np.exp(result.min_value)),
        log_capacity=result.min_value,
        argmin=result.argmin,
        gamma=radius,
        delta=delta,
        iterations=result.iterations,
        oracle_calls=oracle.call_count - start_calls,
    )


def capacity_upper_bound(oracle: PolynomialOracle, x, workers: int = 1) -> float:
    """(q(x)/Πx_i) · Π_i (x_i ∂_i q / q), P-双曲时不小于 Cap(q)"""
    point = as_point(x, (oracle.n,))
    value, gradient = value_and_log_gradient(oracle, point, workers)
    return float(value / np.prod(point) * np.prod(gradient))


def vdw_ratio(
    oracle: PolynomialOracle,
    accuracy: float = 1e-8,
    tol: float = 1e-6,
    limit: int = VDW_LIMIT,
    workers: int = 1,
) -> VdwReport:
    """∂^n q / Cap(q) 与 [n!/n^n, 1] 比较"""
    if not oracle.p_hyperbolic:
        raise InstanceError(
            "Van der Waerden ratio needs a determinantal or product instance",
            kind=oracle.kind.value,
        )
    n = oracle.n
    if n > limit:
        raise BudgetExceededError("vdw ratio", n, limit)

    mixed = polarization_mixed_derivative(oracle, workers=workers)
    capacity = capacity_estimate(oracle, accuracy=accuracy, workers=workers).capacity
    if capacity < 1e-12:
        raise NumericalBreakdownError("Capacity too small for a ratio", capacity=capacity)

    ratio = mixed / capacity
    lower = factorial(n) / n ** n
    return VdwReport(
        ratio=ratio,
        mixed_derivative=mixed,
        capacity=capacity,
        lower_bound=lower,
        lower_bound_holds=ratio >= lower - tol,
        upper_bound_holds=ratio <= 1.0 + tol,
    )
