"""
微分命令: 偏导数与混合导数
"""
from enum import Enum
from typing import Annotated, Optional

import numpy as np
import typer

from hyperpoly.cli.common import (
    InstanceOption,
    OutOption,
    PointOption,
    SeedOption,
    WorkersOption,
    parse_vector,
    reporting,
)
from hyperpoly.config import get_settings
from hyperpoly.schemas.reports import DerivativeData, MixedFormData
from hyperpoly.services.calculus import (
    MIXED_DISCRIMINANT_LIMIT,
    MixedFormRequest,
    brute_mixed_discriminant,
    inclusion_exclusion_mixed_derivative,
    partial_derivative,
    polarization_mixed_derivative,
    random_complex_mixed_derivative,
    ryser_permanent,
    value_and_log_gradient,
)
from hyperpoly.services.combinatorics import hamiltonian_circuits
from hyperpoly.services.oracle import OracleKind, PolynomialOracle

router = typer.Typer()


class MixedMethod(str, Enum):
    POLARIZATION = "polarization"
    RANDOM = "random"
    INCLUSION_EXCLUSION = "inclusion-exclusion"


@router.command("derivative")
def derivative(
    instance: InstanceOption,
    point: PointOption = None,
    index: Annotated[Optional[int], typer.Option("--index", help="坐标下标（从0开始）, 省略时给出全部")] = None,
    workers: WorkersOption = None,
    out: OutOption = None,
):
    """偏导数 ∂_i p(x); 不给下标时输出梯度与对数梯度"""
    with reporting("derivative", instance=instance, out=out, workers=workers) as run:
        oracle = run.load()
        x = parse_vector(point, oracle.n, default=1.0)
        w = run.config.workers
        if index is not None:
            run.finish(DerivativeData(point=x, index=index, partial=partial_derivative(oracle, x, index, w)))
            return
        gradient = np.array([partial_derivative(oracle, x, i, w) for i in range(oracle.n)])
        data = DerivativeData(point=x, value=oracle.eval(x), gradient=gradient)
        if np.all(x > 0) and data.value > 0:
            data.log_gradient = value_and_log_gradient(oracle, x, w)[1].tolist()
        run.finish(data)


def _baseline(oracle: PolynomialOracle):
    """按族给出混合导数的独立基线"""
    if oracle.kind is OracleKind.PRODUCT:
        return ryser_permanent(oracle.matrix, get_settings().ryser_limit), "ryser"
    if oracle.kind is OracleKind.DETERMINANTAL and oracle.n <= MIXED_DISCRIMINANT_LIMIT:
        return brute_mixed_discriminant(oracle.matrices), "mixed_discriminant"
    if oracle.kind is OracleKind.TRACE and oracle.n <= 10:
        return float(oracle.n * hamiltonian_circuits(oracle.adjacency)), "hamiltonian_circuits"
    return None, None


@router.command("mixedform")
def mixedform(
    instance: InstanceOption,
    method: Annotated[MixedMethod, typer.Option("--method", help="计算路径")] = MixedMethod.POLARIZATION,
    samples: Annotated[int, typer.Option("--samples", help="随机复估计的样本数")] = 10000,
    seed: SeedOption = None,
    workers: WorkersOption = None,
    out: OutOption = None,
):
    """混合导数 ∂^n p / ∂x_1…∂x_n, 并与族的组合基线对照"""
    with reporting("mixedform", instance=instance, out=out, seed=seed, workers=workers) as run:
        oracle = run.load()
        w = run.config.workers
        data = MixedFormData(method=method.value, value=0.0)
        if method is MixedMethod.POLARIZATION:
            data.value = polarization_mixed_derivative(oracle, get_settings().polarization_limit, workers=w)
        elif method is MixedMethod.INCLUSION_EXCLUSION:
            request = MixedFormRequest(oracle, tuple(np.eye(oracle.n)))
            data.value = inclusion_exclusion_mixed_derivative(request, workers=w)
        else:
            estimate = random_complex_mixed_derivative(oracle, samples, seed=run.config.seed, workers=w)
            data.value = estimate.mean
            data.std_error = estimate.std_error
            data.samples = estimate.samples

        # 基线不经过oracle, 不计入调用次数
        data.baseline, data.baseline_method = _baseline(oracle)
        run.finish(data)
