"""
命令报告的Pydantic模型
由服务层dataclass经 from_attributes 构造, 负责numpy值到JSON的转换
"""
from typing import Annotated, Any, Dict, List, Optional

from pydantic import BaseModel, BeforeValidator

from hyperpoly.schemas.common import (
    ComplexVector,
    Count,
    Real,
    ReportModel,
    Subset,
    Vector,
)
from hyperpoly.services.capacity import Verdict
from hyperpoly.services.scaling import ScalingVerdict


class TermModel(BaseModel):
    exp: List[int]
    coef: float


def _weights(value: Any) -> Any:
    """{指数元组: 权重} -> [{exp, coef}]"""
    if isinstance(value, dict):
        return [{"exp": list(k), "coef": float(v)} for k, v in sorted(value.items())]
    return value


Weights = Annotated[List[TermModel], BeforeValidator(_weights)]


class EvalData(BaseModel):
    point: Optional[Vector] = None
    complex_point: Optional[ComplexVector] = None
    value: Real
    imag: Optional[Real] = None


class DerivativeData(BaseModel):
    point: Vector
    index: Optional[int] = None
    partial: Optional[Real] = None
    value: Optional[Real] = None
    gradient: Optional[Vector] = None
    log_gradient: Optional[Vector] = None


class MixedFormData(BaseModel):
    method: str
    value: Real
    std_error: Optional[Real] = None
    samples: Optional[int] = None
    baseline: Optional[Real] = None
    baseline_method: Optional[str] = None


class RootsData(BaseModel):
    point: Vector
    direction: Vector
    roots: ComplexVector
    max_imag: Real
    scaled_imag: Real
    residual: Real
    trace: Real
    real_rooted: bool


class RankData(ReportModel):
    rank: Count
    subset: Optional[Subset] = None
    tail_coefficients: Vector
    scaled_coefficients: Vector
    threshold: Real


class DecisionData(ReportModel):
    verdict: Verdict
    min_value_found: Optional[Real] = None
    gamma: Real
    iterations: Count
    delta: Real
    log_q_e: Optional[Real] = None
    coefficient_floor: Real
    stopped: str
    p_hyperbolic: bool


class CapacityData(ReportModel):
    capacity: Real
    log_capacity: Real
    argmin: Vector
    gamma: Real
    delta: Real
    iterations: Count
    upper_bound: Optional[Real] = None


class TrajectoryRowModel(ReportModel):
    iteration: Count
    defect: Real
    value: Real
    capacity_bound: Real


class SinkhornData(ReportModel):
    verdict: ScalingVerdict
    iterations: Count
    budget: Count
    sinkhorn_c: Real
    heuristic: bool
    certificate: Optional[Count] = None
    final_alpha: Optional[Vector] = None
    trajectory: List[TrajectoryRowModel]


class RadoData(ReportModel):
    positive: bool
    violating_subset: Optional[Subset] = None
    violating_rank: Optional[Count] = None
    cross_checked: Count
    cross_check_agrees: bool


class CertificateModel(ReportModel):
    subset: Subset
    slack: Real
    implied_distance: Real


class HallData(ReportModel):
    holds: bool
    violating_subset: Optional[Subset] = None
    certificate: Optional[CertificateModel] = None


class HullData(ReportModel):
    inside: bool
    distance: Real
    iterations: Count
    gap: Real
    nearest: Vector
    weights: Weights
    normal: Optional[Vector] = None
    certificate: Optional[CertificateModel] = None


class ExpandData(BaseModel):
    n: int
    support_size: int
    terms: List[TermModel]


class FindingModel(ReportModel):
    instance: str
    detail: str
    witness: Any = None


class SuiteModel(ReportModel):
    name: str
    passed: bool
    checked: Count
    failures: List[FindingModel]
    documented: List[FindingModel]


class VerifyData(ReportModel):
    passed: bool
    instances: Count
    suites: List[SuiteModel]


class BenchRowModel(ReportModel):
    n: Count
    instances: Count
    polarization_calls: Count
    ellipsoid_calls_mean: Real
    ellipsoid_calls_max: Count
    sinkhorn_calls_mean: Real
    sinkhorn_calls_max: Count
    agreement: Count
    bound_ratio: Real


class BenchData(ReportModel):
    rows: List[BenchRowModel]
    fitted_constant: Real
    all_agree: bool
    bound: str = "n^4 (ln n + ln(1 + ln q(e)))"


def summarize(data: BaseModel) -> Dict[str, Any]:
    """报告数据的简短摘要, 用于日志"""
    dumped = data.model_dump(mode="json")
    keys = ("verdict", "passed", "holds", "positive", "inside", "value", "rank", "capacity")
    return {k: dumped[k] for k in keys if k in dumped}
