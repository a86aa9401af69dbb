"""
双曲Sinkhorn缩放模块
α_i ← Q(α)/∂_i Q(α), 双随机偏差, K步判定与矩阵Sinkhorn对照
"""
from dataclasses import dataclass, field
from enum import Enum
from math import ceil, log
from typing import List, Optional, Union

import numpy as np
import structlog

from hyperpoly.exceptions import InstanceError, InvalidInstanceError, ZeroDirectionError
from hyperpoly.services.calculus import partial_derivative, value_and_log_gradient
from hyperpoly.services.oracle import PolynomialOracle
from hyperpoly.utils.validation import as_point

logger = structlog.get_logger(__name__)

SINKHORN_C = 8.0
DS_TOL = 1e-8
ZERO_TOL = 1e-13


class ScalingVerdict(str, Enum):
    POSITIVE = "POSITIVE"
    NEGATIVE = "NEGATIVE"


@dataclass(frozen=True)
class ScalingState:
    """Πα = 1 归一化后的缩放点"""
    alpha: np.ndarray
    log_alpha: np.ndarray
    value: float
    log_gradient: np.ndarray
    defect: float
    iteration: int = 0

    @property
    def capacity_bound(self) -> float:
        """q(α)/Πα, Cap(q) 的上界"""
        return self.value


@dataclass
class TrajectoryRow:
    iteration: int
    defect: float
    value: float
    capacity_bound: float


@dataclass
class SinkhornReport:
    verdict: ScalingVerdict
    iterations: int
    budget: int
    sinkhorn_c: float
    heuristic: bool
    trajectory: List[TrajectoryRow] = field(default_factory=list)
    certificate: Optional[int] = None
    final_alpha: Optional[np.ndarray] = None


def _state_from_log(
    oracle: PolynomialOracle, log_alpha: np.ndarray, iteration: int, workers: int
) -> ScalingState:
    log_alpha = log_alpha - np.mean(log_alpha)
    top = float(np.max(log_alpha))
    point = np.exp(log_alpha - top)
    if np.any(point == 0):
        raise ZeroDirectionError(
            int(np.argmin(point)), "scaling vector underflowed; the iteration diverges"
        )
    value, gradient = value_and_log_gradient(oracle, point, workers)
    return ScalingState(
        alpha=np.exp(log_alpha),
        log_alpha=log_alpha,
        value=float(np.exp(log(value) + oracle.n * top)),
        log_gradient=gradient,
        defect=float(np.sum((gradient - 1.0) ** 2)),
        iteration=iteration,
    )


def evaluate_state(oracle: PolynomialOracle, alpha, iteration: int = 0, workers: int = 1) -> ScalingState:
    """α处的值, 对数梯度与偏差"""
    a = as_point(alpha, (oracle.n,))
    if np.any(a <= 0):
        raise InstanceError("Scaling vector must be strictly positive")
    return _state_from_log(oracle, np.log(a), iteration, workers)


def ds_defect(oracle: PolynomialOracle, alpha, workers: int = 1) -> float:
    """Σ_i (α_i ∂_i Q / Q - 1)²"""
    return evaluate_state(oracle, alpha, workers=workers).defect


def hs_step(
    oracle: PolynomialOracle, current: Union[ScalingState, np.ndarray], workers: int = 1
) -> ScalingState:
    """α'_i = Q(α)/∂_i Q(α) = α_i / g_i, 然后归一化"""
    state = current if isinstance(current, ScalingState) else evaluate_state(oracle, current, workers=workers)
    g = state.log_gradient
    nonpositive = np.nonzero(~(np.isfinite(g) & (g > 0)))[0]
    if nonpositive.size:
        raise ZeroDirectionError(int(nonpositive[0]))
    return _state_from_log(oracle, state.log_alpha - np.log(g), state.iteration + 1, workers)


def iteration_count(oracle: PolynomialOracle, sinkhorn_c: float, q_e: float) -> int:
    """K = ceil(c · n · max(1, ln q(e)))"""
    log_q_e = log(q_e / oracle.coefficient_floor()) if q_e > 0 else 0.0
    return int(ceil(sinkhorn_c * oracle.n * max(1.0, log_q_e)))


def _absent_variable(oracle: PolynomialOracle, state: ScalingState) -> Optional[int]:
    """在e处 ∂_i q(e) ≥ 系数下界, 否则变量i不出现"""
    cutoff = min(ZERO_TOL, 0.5 * oracle.coefficient_floor() / state.value)
    absent = np.nonzero(state.log_gradient < cutoff)[0]
    return int(absent[0]) if absent.size else None


def sinkhorn_decide(
    oracle: PolynomialOracle,
    max_iters: Optional[int] = None,
    sinkhorn_c: float = SINKHORN_C,
    workers: int = 1,
) -> SinkhornReport:
    """K步双曲Sinkhorn: 某步偏差 ≤ 1/n 则混合形式为正"""
    n = oracle.n
    threshold = 1.0 / n
    heuristic = not oracle.p_hyperbolic
    if not oracle.eval(np.ones(n)) >= 0.5 * oracle.coefficient_floor():
        logger.debug("Zero polynomial", kind=oracle.kind.value)
        return SinkhornReport(ScalingVerdict.NEGATIVE, 0, 0, sinkhorn_c, heuristic)

    state = evaluate_state(oracle, np.ones(n), workers=workers)
    budget = max_iters if max_iters is not None else iteration_count(oracle, sinkhorn_c, state.value)
    report = SinkhornReport(
        verdict=ScalingVerdict.NEGATIVE,
        iterations=0,
        budget=budget,
        sinkhorn_c=sinkhorn_c,
        heuristic=heuristic,
    )

    absent = _absent_variable(oracle, state)
    if absent is not None:
        logger.debug("Zero direction at e", index=absent)
        report.certificate = absent
        report.trajectory.append(_row(state))
        report.final_alpha = state.alpha
        return report

    while True:
        report.trajectory.append(_row(state))
        report.iterations = state.iteration
        if state.defect <= threshold:
            report.verdict = ScalingVerdict.POSITIVE
            break
        if state.iteration >= budget:
            break
        try:
            state = hs_step(oracle, state, workers)
        except ZeroDirectionError as e:
            logger.debug("Scaling diverged", index=e.index, iteration=state.iteration)
            break
        except InvalidInstanceError as e:
            # q(α) 下溢为0: α 已趋向边界
            logger.debug("Scaling diverged", reason=e.detail, iteration=state.iteration)
            break

    report.final_alpha = state.alpha
    logger.debug(
        "Sinkhorn decision",
        verdict=report.verdict.value, iterations=report.iterations, budget=budget,
    )
    return report


def _row(state: ScalingState) -> TrajectoryRow:
    return TrajectoryRow(
        iteration=state.iteration,
        defect=state.defect,
        value=state.value,
        capacity_bound=state.capacity_bound,
    )


def is_doubly_stochastic(oracle: PolynomialOracle, tol: float = DS_TOL, workers: int = 1) -> bool:
    """∂_i q(e) = 1 对所有 i"""
    ones = np.ones(oracle.n)
    return all(
        abs(partial_derivative(oracle, ones, i, workers) - 1.0) <= tol for i in range(oracle.n)
    )


def matrix_sinkhorn_reference(matrix, iters: int) -> np.ndarray:
    """经典交替行列归一化 C(R(A)), 重复iters次"""
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InstanceError("Sinkhorn needs a square matrix")
    if np.any(a < 0):
        raise InstanceError("Sinkhorn needs a nonnegative matrix")
    for _ in range(iters):
        rows = a.sum(axis=1)
        if np.any(rows == 0):
            raise InstanceError("Zero row encountered", row=int(np.argmin(rows)))
        a = a / rows[:, None]
        cols = a.sum(axis=0)
        if np.any(cols == 0):
            raise InstanceError("Zero column encountered", column=int(np.argmin(cols)))
        a = a / cols[None, :]
    return a
