"""
实例JSON格式的Pydantic模型
所有命令和模块都读取这个格式
"""
from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, Field, TypeAdapter, field_validator, model_validator


class Expectation(BaseModel):
    """语料库标注（负对照等）"""
    s_hyperbolic: Optional[bool] = None
    in_polytope: Optional[bool] = None
    note: Optional[str] = None


class InstanceBase(BaseModel):
    """实例基础模型"""
    n: int = Field(..., ge=1)
    name: Optional[str] = None
    expected: Optional[Expectation] = None


class Term(BaseModel):
    """显式多项式的一项"""
    exp: List[int]
    coef: float

    @field_validator("exp")
    @classmethod
    def validate_exp(cls, v: List[int]) -> List[int]:
        if any(r < 0 for r in v):
            raise ValueError("Exponents must be nonnegative")
        return v

    @field_validator("coef")
    @classmethod
    def validate_coef(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("Coefficients must be strictly positive")
        return v


def _check_square(rows: List[List[float]], n: int, what: str) -> None:
    if len(rows) != n or any(len(row) != n for row in rows):
        raise ValueError(f"{what} must be {n}x{n}")


class ExplicitInstance(InstanceBase):
    """显式稀疏多项式"""
    kind: Literal["explicit"] = "explicit"
    terms: List[Term]

    @model_validator(mode="after")
    def validate_terms(self) -> "ExplicitInstance":
        if not self.terms:
            raise ValueError("Explicit polynomial needs at least one term")
        seen = set()
        for term in self.terms:
            if len(term.exp) != self.n:
                raise ValueError(f"Exponent {term.exp} must have length {self.n}")
            if sum(term.exp) != self.n:
                raise ValueError(f"Exponent {term.exp} must sum to {self.n}")
            key = tuple(term.exp)
            if key in seen:
                raise ValueError(f"Duplicate exponent {term.exp}")
            seen.add(key)
        return self


class DeterminantalInstance(InstanceBase):
    """det(Σ x_i A_i), A_i半正定"""
    kind: Literal["determinantal"] = "determinantal"
    matrices: List[List[List[float]]]
    coefficient_floor: float = Field(1.0, gt=0)

    @model_validator(mode="after")
    def validate_matrices(self) -> "DeterminantalInstance":
        if len(self.matrices) != self.n:
            raise ValueError(f"Expected {self.n} matrices, got {len(self.matrices)}")
        for matrix in self.matrices:
            _check_square(matrix, self.n, "Each matrix")
        return self


class ProductInstance(InstanceBase):
    """Π_i (Σ_j A(i,j) x_j)"""
    kind: Literal["product"] = "product"
    matrix: List[List[float]]

    @model_validator(mode="after")
    def validate_matrix(self) -> "ProductInstance":
        _check_square(self.matrix, self.n, "Matrix")
        if any(a < 0 for row in self.matrix for a in row):
            raise ValueError("Product matrix entries must be nonnegative")
        return self


class TraceInstance(InstanceBase):
    """tr((D(x) A)^n), A为0/1邻接矩阵"""
    kind: Literal["trace"] = "trace"
    adjacency: List[List[int]]

    @model_validator(mode="after")
    def validate_adjacency(self) -> "TraceInstance":
        _check_square(self.adjacency, self.n, "Adjacency")
        if any(a not in (0, 1) for row in self.adjacency for a in row):
            raise ValueError("Adjacency entries must be 0 or 1")
        return self


class PowersumInstance(InstanceBase):
    """Σ x_i^n"""
    kind: Literal["powersum"] = "powersum"


Instance = Annotated[
    Union[
        ExplicitInstance,
        DeterminantalInstance,
        ProductInstance,
        TraceInstance,
        PowersumInstance,
    ],
    Field(discriminator="kind"),
]

instance_adapter: TypeAdapter = TypeAdapter(Instance)
