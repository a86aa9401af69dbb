"""
容量命令: 多面体判定与容量估计
"""
from typing import Annotated, Optional

import numpy as np
import typer

from hyperpoly.cli.common import DeltaOption, InstanceOption, OutOption, WorkersOption, reporting
from hyperpoly.config import get_settings
from hyperpoly.schemas.reports import CapacityData, DecisionData
from hyperpoly.services.capacity import Verdict, capacity_estimate, capacity_upper_bound, decide_polytope

router = typer.Typer()


@router.command("decide")
def decide(
    instance: InstanceOption,
    delta: DeltaOption = None,
    distance: Annotated[Optional[float], typer.Option("--distance", help="e 到凸包距离的已知下界Δ")] = None,
    workers: WorkersOption = None,
    out: OutOption = None,
):
    """判定全1向量是否属于支撑的Newton多面体; INCONCLUSIVE 时退出码为1"""
    with reporting("decide", instance=instance, out=out, delta=delta, distance=distance, workers=workers) as run:
        oracle = run.load()
        report = decide_polytope(
            oracle,
            delta=run.config.delta,
            distance=run.config.distance,
            margin=get_settings().ellipsoid_margin,
            gradient_tol=get_settings().gradient_tol,
            workers=run.config.workers,
        )
        run.finish(DecisionData.model_validate(report), finding=report.verdict is Verdict.INCONCLUSIVE)


@router.command("capacity")
def capacity(
    instance: InstanceOption,
    accuracy: Annotated[float, typer.Option("--accuracy", help="对数容量的目标精度")] = 1e-4,
    workers: WorkersOption = None,
    out: OutOption = None,
):
    """Cap(q) = inf_{Πα=1} q(α); P-双曲实例附带极小点处的上界"""
    with reporting("capacity", instance=instance, out=out, workers=workers) as run:
        oracle = run.load()
        settings = get_settings()
        report = capacity_estimate(
            oracle,
            accuracy=accuracy,
            margin=settings.ellipsoid_margin,
            gradient_tol=settings.gradient_tol,
            workers=run.config.workers,
        )
        data = CapacityData.model_validate(report)
        if oracle.p_hyperbolic:
            data.upper_bound = capacity_upper_bound(oracle, np.exp(report.argmin), workers=run.config.workers)
        run.finish(data)
