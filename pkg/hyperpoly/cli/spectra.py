"""
谱命令: p-秩与方向根
"""
from typing import Annotated, Optional

import numpy as np
import typer

from hyperpoly.cli.common import (
    DirectionOption,
    InstanceOption,
    OutOption,
    PointOption,
    RootTolOption,
    WorkersOption,
    parse_ints,
    parse_vector,
    reporting,
)
from hyperpoly.exceptions import OracleInputError
from hyperpoly.schemas.reports import RankData, RootsData
from hyperpoly.services.spectra import rank_p, real_rootedness, roots_in_direction

router = typer.Typer()


@router.command("rank")
def rank(
    instance: InstanceOption,
    point: PointOption = None,
    subset: Annotated[Optional[str], typer.Option("--subset", help="坐标子集, 如 0,2; 取 x = Σ_{i∈S} e_i")] = None,
    direction: DirectionOption = None,
    root_tol: RootTolOption = None,
    workers: WorkersOption = None,
    out: OutOption = None,
):
    """x 在方向 d 上的 p-秩（非零根个数）"""
    with reporting("rank", instance=instance, out=out, root_tol=root_tol, workers=workers) as run:
        oracle = run.load()
        members = parse_ints(subset)
        if subset is not None:
            if any(not 0 <= i < oracle.n for i in members):
                raise OracleInputError(f"Subset indices must lie in [0, {oracle.n})", subset=members)
            x = np.zeros(oracle.n)
            x[members] = 1.0
        else:
            x = parse_vector(point, oracle.n)
        d = parse_vector(direction, oracle.n, default=1.0)
        report = rank_p(oracle, x, d, root_tol=run.config.root_tol, imag_tol=run.config.imag_tol,
                        workers=run.config.workers)
        data = RankData.model_validate(report)
        data.subset = sorted(set(members)) if subset is not None else None
        run.finish(data)


@router.command("roots")
def roots(
    instance: InstanceOption,
    point: PointOption = None,
    direction: DirectionOption = None,
    workers: WorkersOption = None,
    out: OutOption = None,
):
    """p(x - t·d) 的全部根, 以及实根性与方向迹"""
    with reporting("roots", instance=instance, out=out, workers=workers) as run:
        oracle = run.load()
        x = parse_vector(point, oracle.n)
        d = parse_vector(direction, oracle.n, default=1.0)
        profile = roots_in_direction(oracle, x, d, workers=run.config.workers)
        c = profile.coefficients
        run.finish(RootsData(
            point=x,
            direction=d,
            roots=profile.roots,
            max_imag=profile.max_imag,
            scaled_imag=profile.scaled_imag,
            residual=profile.residual,
            trace=-c[-2] / c[-1],
            real_rooted=real_rootedness(profile.roots, run.config.imag_tol),
        ))
