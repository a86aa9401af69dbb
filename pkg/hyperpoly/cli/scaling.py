"""
Sinkhorn命令
"""
from pathlib import Path
from typing import Annotated, Optional

import typer

from hyperpoly.cli.common import InstanceOption, OutOption, SinkhornCOption, WorkersOption, reporting
from hyperpoly.schemas.reports import SinkhornData
from hyperpoly.services.scaling import sinkhorn_decide

router = typer.Typer()


@router.command("sinkhorn")
def sinkhorn(
    instance: InstanceOption,
    sinkhorn_c: SinkhornCOption = None,
    max_iters: Annotated[Optional[int], typer.Option("--max-iters", help="覆盖 K = c·n·max(1, ln q(e))")] = None,
    trajectory: Annotated[Optional[Path], typer.Option("--trajectory", help="逐步轨迹写为JSON lines")] = None,
    workers: WorkersOption = None,
    out: OutOption = None,
):
    """双曲Sinkhorn缩放, 判定混合导数是否为正"""
    with reporting("sinkhorn", instance=instance, out=out, sinkhorn_c=sinkhorn_c, workers=workers) as run:
        oracle = run.load()
        report = sinkhorn_decide(
            oracle,
            max_iters=max_iters,
            sinkhorn_c=run.config.sinkhorn_c,
            workers=run.config.workers,
        )
        data = SinkhornData.model_validate(report)
        if trajectory is not None:
            lines = [row.model_dump_json() for row in data.trajectory]
            trajectory.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        run.finish(data)
