"""
通用Pydantic模型
报告外层结构, 运行配置, 以及numpy值的转换类型
"""
from typing import Annotated, Any, Generic, List, Optional, Tuple, TypeVar

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, field_validator

from hyperpoly.config import Settings

DataType = TypeVar("DataType")

SCHEMA_VERSION = "1"


def _to_float(value: Any) -> Optional[float]:
    if value is None:
        return None
    return float(np.real(value))


def _to_int(value: Any) -> Optional[int]:
    if value is None:
        return None
    return int(value)


def _to_floats(value: Any) -> Optional[List[float]]:
    if value is None:
        return None
    return np.asarray(value, dtype=float).ravel().tolist()


def _to_matrix(value: Any) -> Optional[List[List[float]]]:
    if value is None:
        return None
    return np.asarray(value, dtype=float).tolist()


def _to_pairs(value: Any) -> Optional[List[Tuple[float, float]]]:
    """复数序列 -> [(实部, 虚部)]"""
    if value is None:
        return None
    z = np.asarray(value, dtype=complex).ravel()
    return [(float(c.real), float(c.imag)) for c in z]


def _to_subset(value: Any) -> Optional[List[int]]:
    if value is None:
        return None
    return [int(i) for i in value]


Real = Annotated[float, BeforeValidator(_to_float)]
Count = Annotated[int, BeforeValidator(_to_int)]
Vector = Annotated[List[float], BeforeValidator(_to_floats)]
Matrix = Annotated[List[List[float]], BeforeValidator(_to_matrix)]
ComplexVector = Annotated[List[Tuple[float, float]], BeforeValidator(_to_pairs)]
Subset = Annotated[List[int], BeforeValidator(_to_subset)]


class ReportModel(BaseModel):
    """从服务层dataclass构造的报告基类"""
    model_config = ConfigDict(from_attributes=True)


class RunConfig(BaseModel):
    """一次命令的运行配置, 原样写入报告"""
    command: str
    instance: Optional[str] = None
    corpus: Optional[str] = None
    out: Optional[str] = None
    seed: int = 0
    trials: int = Field(200, ge=1)
    root_tol: float = 1e-7
    imag_tol: float = 1e-6
    delta: float = 1.0 / 3.0
    hull_tol: float = 1e-7
    sinkhorn_c: float = 8.0
    distance: Optional[float] = None
    workers: int = Field(1, ge=1)

    @field_validator("root_tol", "imag_tol", "delta", "hull_tol", "sinkhorn_c")
    @classmethod
    def validate_positive(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("Tolerances must be positive")
        return v

    @field_validator("distance")
    @classmethod
    def validate_distance(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not v > 0:
            raise ValueError("Distance promise must be positive")
        return v

    @classmethod
    def from_settings(cls, settings: Settings, command: str, **overrides: Any) -> "RunConfig":
        """Settings为默认值, 命令行参数中非None的项覆盖"""
        values = {
            "command": command,
            "seed": settings.seed,
            "trials": settings.trials,
            "root_tol": settings.root_tol,
            "imag_tol": settings.imag_tol,
            "delta": settings.decision_delta,
            "hull_tol": settings.hull_tol,
            "sinkhorn_c": settings.sinkhorn_c,
            "workers": settings.workers,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


class ReportEnvelope(BaseModel, Generic[DataType]):
    """所有命令共用的报告外层"""
    schema_version: str = Field(SCHEMA_VERSION, serialization_alias="schema")
    command: str
    data: Optional[DataType] = None
    oracle_calls: int = 0
    config: RunConfig
    wall_time: Optional[float] = None

    def render(self) -> str:
        """JSON文本; 未计时的报告不含wall_time"""
        exclude = {"wall_time"} if self.wall_time is None else None
        return self.model_dump_json(by_alias=True, indent=2, exclude=exclude)


class ErrorReport(BaseModel):
    """错误报告"""
    error: str
    detail: str
    exit_code: int
    context: dict = Field(default_factory=dict)
