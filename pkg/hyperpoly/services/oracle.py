"""
多项式oracle模块
n元n次齐次多项式的黑盒求值, 带调用计数
"""
from abc import ABC, abstractmethod
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterator, Mapping, Optional, Tuple, Union
import json
import threading

import numpy as np
import scipy.linalg
import structlog
from pydantic import ValidationError

from hyperpoly.exceptions import BudgetExceededError, InstanceError
from hyperpoly.schemas.instance import (
    DeterminantalInstance,
    ExplicitInstance,
    PowersumInstance,
    ProductInstance,
    Term,
    TraceInstance,
    instance_adapter,
)
from hyperpoly.utils.linalg import project_psd, symmetry_defect
from hyperpoly.utils.validation import as_point

logger = structlog.get_logger(__name__)

ExponentVector = Tuple[int, ...]

EXPANSION_LIMIT = 12
DETERMINANTAL_EXPANSION_LIMIT = 7
SYMMETRY_TOL = 1e-12
PSD_FLOOR = -1e-9
EXPANSION_DROP_TOL = 1e-9


class OracleKind(str, Enum):
    """多项式族"""
    EXPLICIT = "explicit"
    DETERMINANTAL = "determinantal"
    PRODUCT = "product"
    TRACE = "trace"
    POWERSUM = "powersum"
    DETERMINANT = "determinant"


# 按构造即为P-双曲的族
P_HYPERBOLIC_KINDS = frozenset({OracleKind.DETERMINANTAL, OracleKind.PRODUCT})


def validate_exponent(exp, n: int) -> ExponentVector:
    """检查exp属于 I_{n,n}"""
    vector = tuple(int(r) for r in exp)
    if len(vector) != n:
        raise InstanceError(f"Exponent {vector} must have length {n}")
    if any(r < 0 for r in vector) or sum(vector) != n:
        raise InstanceError(f"Exponent {vector} must be nonnegative and sum to {n}")
    return vector


@dataclass(frozen=True)
class SupportSet:
    """I_{n,n} 中的有限指数向量集合"""
    n: int
    vectors: FrozenSet[ExponentVector]

    def __post_init__(self):
        for vector in self.vectors:
            validate_exponent(vector, self.n)

    @classmethod
    def of(cls, n: int, vectors) -> "SupportSet":
        return cls(n, frozenset(tuple(int(r) for r in v) for v in vectors))

    def __len__(self) -> int:
        return len(self.vectors)

    def __iter__(self) -> Iterator[ExponentVector]:
        return iter(sorted(self.vectors))

    def __contains__(self, vector) -> bool:
        return tuple(vector) in self.vectors

    def as_array(self) -> np.ndarray:
        """按字典序排列的 m x n 整数矩阵"""
        if not self.vectors:
            return np.zeros((0, self.n), dtype=int)
        return np.array(sorted(self.vectors), dtype=int)


class PolynomialOracle(ABC):
    """黑盒多项式: 只能求值, 每次求值计数一次"""

    kind: OracleKind

    def __init__(self, n: int, shape: Optional[Tuple[int, ...]] = None):
        if n < 1:
            raise InstanceError("Degree must be positive", n=n)
        self.n = n
        self.shape = shape or (n,)
        self._call_count = 0
        self._lock = threading.Lock()

    @property
    def degree(self) -> int:
        return self.n

    @property
    def call_count(self) -> int:
        return self._call_count

    @property
    def p_hyperbolic(self) -> bool:
        """按构造已知为P-双曲"""
        return self.kind in P_HYPERBOLIC_KINDS

    def _count(self) -> None:
        with self._lock:
            self._call_count += 1

    def eval(self, point) -> float:
        """在实点求值"""
        x = as_point(point, self.shape)
        self._count()
        return float(np.real(self._evaluate(x)))

    def eval_complex(self, point) -> complex:
        """在复点求值"""
        z = as_point(point, self.shape, allow_complex=True)
        self._count()
        return complex(self._evaluate(z))

    @abstractmethod
    def _evaluate(self, x: np.ndarray):
        """族公式, x可以是实数组或复数组"""

    def coefficient_floor(self) -> float:
        """最小非零系数的下界"""
        return 1.0

    def expand(self, limit: int = EXPANSION_LIMIT) -> "ExplicitPolynomial":
        """展开为显式多项式"""
        if self.n > limit:
            raise BudgetExceededError("expand", self.n, limit)
        terms = {k: v for k, v in self._expand_terms().items() if v > 0}
        return ExplicitPolynomial(self.n, terms)

    def _expand_terms(self) -> Dict[ExponentVector, float]:
        raise InstanceError(f"{self.kind.value} oracles cannot be expanded")

    def to_instance(self):
        raise InstanceError(f"{self.kind.value} oracles have no JSON instance form")

    def __repr__(self):
        return f"<{type(self).__name__}(n={self.n}, calls={self._call_count})>"


class ExplicitPolynomial(PolynomialOracle):
    """稀疏项表 {指数: 正系数}"""

    kind = OracleKind.EXPLICIT

    def __init__(self, n: int, terms: Mapping[ExponentVector, float]):
        super().__init__(n)
        if not terms:
            raise InstanceError("Explicit polynomial needs at least one term")
        clean: Dict[ExponentVector, float] = {}
        for exp, coef in terms.items():
            vector = validate_exponent(exp, n)
            if not coef > 0:
                raise InstanceError(f"Coefficient of {vector} must be positive", coef=coef)
            clean[vector] = float(coef)
        self.terms = dict(sorted(clean.items()))
        self._exps = np.array(list(self.terms.keys()), dtype=int)
        self._coefs = np.array(list(self.terms.values()), dtype=float)

    def _evaluate(self, x):
        monomials = np.prod(np.power(x[None, :], self._exps), axis=1)
        return monomials @ self._coefs

    @property
    def support(self) -> SupportSet:
        return SupportSet(self.n, frozenset(self.terms))

    def coefficient_floor(self) -> float:
        return float(self._coefs.min())

    def expand(self, limit: int = EXPANSION_LIMIT) -> "ExplicitPolynomial":
        return self

    def to_instance(self) -> ExplicitInstance:
        return ExplicitInstance(
            n=self.n,
            terms=[Term(exp=list(exp), coef=coef) for exp, coef in self.terms.items()],
        )


class DeterminantalOracle(PolynomialOracle):
    """det(Σ x_i A_i), A_i对称半正定"""

    kind = OracleKind.DETERMINANTAL

    def __init__(self, matrices, coefficient_floor: float = 1.0):
        stack = np.asarray(matrices, dtype=float)
        if stack.ndim != 3 or stack.shape[1] != stack.shape[2] or stack.shape[0] != stack.shape[1]:
            raise InstanceError(
                "Determinantal instance needs n symmetric n x n matrices",
                shape=list(stack.shape),
            )
        n = stack.shape[0]
        super().__init__(n)
        cleaned = []
        for i, matrix in enumerate(stack):
            scale = max(1.0, float(np.max(np.abs(matrix))))
            if symmetry_defect(matrix) > SYMMETRY_TOL * scale:
                raise InstanceError(f"Matrix {i} is not symmetric", index=i)
            smallest = float(scipy.linalg.eigvalsh(0.5 * (matrix + matrix.T))[0])
            if smallest < PSD_FLOOR * scale:
                raise InstanceError(
                    f"Matrix {i} is not positive semidefinite",
                    index=i, smallest_eigenvalue=smallest,
                )
            cleaned.append(project_psd(matrix) if smallest < 0 else 0.5 * (matrix + matrix.T))
        self.matrices = np.array(cleaned)
        self._floor = float(coefficient_floor)

    def _evaluate(self, x):
        pencil = np.tensordot(x, self.matrices, axes=1)
        return scipy.linalg.det(pencil)

    def coefficient_floor(self) -> float:
        return self._floor

    def expand(self, limit: int = EXPANSION_LIMIT) -> "ExplicitPolynomial":
        limit = min(limit, DETERMINANTAL_EXPANSION_LIMIT)
        if self.n > limit:
            raise BudgetExceededError("expand determinantal", self.n, limit)
        return super().expand(limit)

    def _expand_terms(self) -> Dict[ExponentVector, float]:
        # 行多线性: 第k行取自A_{f(k)}, 对所有 f: [n] -> [n] 求和
        n = self.n
        weights = n ** np.arange(n)
        totals: Dict[int, float] = defaultdict(float)
        rows = np.arange(n)
        chunk = 20000
        total = n ** n
        for start in range(0, total, chunk):
            codes = np.arange(start, min(start + chunk, total))
            assignment = (codes[:, None] // weights[None, :]) % n
            stacked = self.matrices[assignment, rows[None, :], :]
            dets = np.linalg.det(stacked)
            counts = np.apply_along_axis(np.bincount, 1, assignment, minlength=n)
            keys = counts @ ((n + 1) ** np.arange(n))
            for key, value in zip(keys.tolist(), dets.tolist()):
                totals[key] += value
        largest = max((abs(v) for v in totals.values()), default=0.0)
        terms = {}
        for key, value in totals.items():
            if value > EXPANSION_DROP_TOL * largest:
                terms[tuple((key // (n + 1) ** i) % (n + 1) for i in range(n))] = value
        return terms

    def to_instance(self) -> DeterminantalInstance:
        return DeterminantalInstance(
            n=self.n, matrices=self.matrices.tolist(), coefficient_floor=self._floor
        )


class ProductOracle(PolynomialOracle):
    """Π_i (Σ_j A(i,j) x_j), 混合导数等于Per(A)"""

    kind = OracleKind.PRODUCT

    def __init__(self, matrix):
        arr = np.asarray(matrix, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InstanceError("Product instance needs a square matrix", shape=list(arr.shape))
        if np.any(arr < 0):
            raise InstanceError("Product matrix entries must be nonnegative")
        super().__init__(arr.shape[0])
        self.matrix = arr

    def _evaluate(self, x):
        return np.prod(self.matrix @ x)

    def coefficient_floor(self) -> float:
        positive = self.matrix[self.matrix > 0]
        if positive.size == 0:
            return 1.0
        return float(positive.min()) ** self.n

    def _expand_terms(self) -> Dict[ExponentVector, float]:
        n = self.n
        poly: Dict[ExponentVector, float] = {(0,) * n: 1.0}
        for row in self.matrix:
            nxt: Dict[ExponentVector, float] = defaultdict(float)
            columns = np.nonzero(row)[0]
            for exp, coef in poly.items():
                for j in columns:
                    key = exp[:j] + (exp[j] + 1,) + exp[j + 1:]
                    nxt[key] += coef * row[j]
            poly = nxt
        return dict(poly)

    def to_instance(self) -> ProductInstance:
        return ProductInstance(n=self.n, matrix=self.matrix.tolist())


class TraceOracle(PolynomialOracle):
    """tr((D(x) A)^n), 混合导数等于 n·(Hamilton回路数)"""

    kind = OracleKind.TRACE

    def __init__(self, adjacency):
        arr = np.asarray(adjacency)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InstanceError("Trace instance needs a square adjacency matrix")
        if not np.all(np.isin(arr, (0, 1))):
            raise InstanceError("Adjacency entries must be 0 or 1")
        super().__init__(arr.shape[0])
        self.adjacency = arr.astype(float)

    def _evaluate(self, x):
        # matrix_power走二进制平方
        return np.trace(np.linalg.matrix_power(x[:, None] * self.adjacency, self.n))

    def _expand_terms(self) -> Dict[ExponentVector, float]:
        n = self.n
        terms: Dict[ExponentVector, float] = defaultdict(float)
        successors = [np.nonzero(row)[0].tolist() for row in self.adjacency]
        for start in range(n):
            walks: Dict[Tuple[int, ExponentVector], float] = {(start, (0,) * n): 1.0}
            for _ in range(n):
                nxt: Dict[Tuple[int, ExponentVector], float] = defaultdict(float)
                for (v, exp), count in walks.items():
                    key = exp[:v] + (exp[v] + 1,) + exp[v + 1:]
                    for w in successors[v]:
                        nxt[(w, key)] += count
                walks = nxt
            for (v, exp), count in walks.items():
                if v == start:
                    terms[exp] += count
        return dict(terms)

    def to_instance(self) -> TraceInstance:
        return TraceInstance(n=self.n, adjacency=self.adjacency.astype(int).tolist())


class PowersumOracle(PolynomialOracle):
    """Σ x_i^n（非双曲的负对照）"""

    kind = OracleKind.POWERSUM

    def _evaluate(self, x):
        return np.sum(x ** self.n)

    def _expand_terms(self) -> Dict[ExponentVector, float]:
        n = self.n
        return {tuple(n if j == i else 0 for j in range(n)): 1.0 for i in range(n)}

    def to_instance(self) -> PowersumInstance:
        return PowersumInstance(n=self.n)


class MatrixDeterminant(PolynomialOracle):
    """X ↦ det(X), 自变量为 n x n 矩阵"""

    kind = OracleKind.DETERMINANT

    def __init__(self, n: int):
        super().__init__(n, shape=(n, n))

    def _evaluate(self, x):
        return scipy.linalg.det(x)


def make_oracle(description: Union[Mapping[str, Any], Any]) -> PolynomialOracle:
    """按实例描述构造oracle"""
    if isinstance(description, Mapping):
        try:
            description = instance_adapter.validate_python(dict(description))
        except ValidationError as e:
            raise InstanceError("Malformed instance", errors=e.errors(include_url=False, include_context=False))

    if isinstance(description, ExplicitInstance):
        oracle: PolynomialOracle = ExplicitPolynomial(
            description.n, {tuple(t.exp): t.coef for t in description.terms}
        )
    elif isinstance(description, DeterminantalInstance):
        oracle = DeterminantalOracle(description.matrices, description.coefficient_floor)
    elif isinstance(description, ProductInstance):
        oracle = ProductOracle(description.matrix)
    elif isinstance(description, TraceInstance):
        oracle = TraceOracle(description.adjacency)
    elif isinstance(description, PowersumInstance):
        oracle = PowersumOracle(description.n)
    else:
        raise InstanceError(f"Unknown instance description: {type(description).__name__}")

    logger.debug("Oracle constructed", kind=oracle.kind.value, n=oracle.n)
    return oracle


def load_instance(path: Union[str, Path]):
    """读取并验证JSON实例文件"""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InstanceError(f"Instance file not found: {path}")
    except json.JSONDecodeError as e:
        raise InstanceError(f"Instance file is not valid JSON: {e}", path=str(path))
    try:
        return instance_adapter.validate_python(raw)
    except ValidationError as e:
        raise InstanceError("Malformed instance", path=str(path), errors=e.errors(include_url=False, include_context=False))


def support(poly: ExplicitPolynomial) -> SupportSet:
    """显式多项式的支撑集"""
    return poly.support
