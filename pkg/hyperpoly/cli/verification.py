"""
语料库验证与基准命令
"""
from pathlib import Path
from typing import Annotated, Optional

import typer
from rich.console import Console
from rich.table import Table

from hyperpoly.cli.common import (
    DeltaOption,
    HullTolOption,
    OutOption,
    RootTolOption,
    SeedOption,
    SinkhornCOption,
    TrialsOption,
    WorkersOption,
    parse_ints,
    reporting,
)
from hyperpoly.config import get_settings
from hyperpoly.schemas.reports import BenchData, VerifyData
from hyperpoly.services.verification import bench as run_bench
from hyperpoly.services.verification import verify_corpus

router = typer.Typer()


@router.command("verify")
def verify(
    corpus: Annotated[Optional[Path], typer.Option("--corpus", help="语料库目录, 默认为随包语料")] = None,
    seed: SeedOption = None,
    trials: TrialsOption = None,
    root_tol: RootTolOption = None,
    delta: DeltaOption = None,
    hull_tol: HullTolOption = None,
    sinkhorn_c: SinkhornCOption = None,
    workers: WorkersOption = None,
    out: OutOption = None,
):
    """在语料库上运行全部跨模块性质检验; 有失败时退出码为1"""
    with reporting(
        "verify",
        corpus=corpus or get_settings().corpus_dir,
        out=out, seed=seed, trials=trials, root_tol=root_tol, delta=delta,
        hull_tol=hull_tol, sinkhorn_c=sinkhorn_c, workers=workers,
    ) as run:
        report = verify_corpus(run.config)
        run.finish(VerifyData.model_validate(report), finding=not report.passed)


@router.command("bench")
def bench(
    sizes: Annotated[str, typer.Option("--sizes", help="规模列表")] = "4,5,6,7,8,9",
    per_size: Annotated[int, typer.Option("--per-size", help="每个规模的随机0/1矩阵数")] = 5,
    density: Annotated[float, typer.Option("--density", help="矩阵中1的比例")] = 0.5,
    seed: SeedOption = None,
    delta: DeltaOption = None,
    sinkhorn_c: SinkhornCOption = None,
    workers: WorkersOption = None,
    out: OutOption = None,
):
    """积族上比较极化, 椭球法与Sinkhorn的oracle调用次数"""
    with reporting("bench", out=out, seed=seed, delta=delta, sinkhorn_c=sinkhorn_c, workers=workers) as run:
        report = run_bench(
            parse_ints(sizes),
            per_size=per_size,
            seed=run.config.seed,
            density=density,
            config=run.config,
        )
        data = BenchData.model_validate(report)
        _print_table(data)
        run.finish(data, finding=not report.all_agree)


def _print_table(data: BenchData) -> None:
    """调用次数表写到stderr, 不进入JSON报告"""
    table = Table(title=f"oracle calls, C = {data.fitted_constant:.3g}")
    for column in ("n", "polarization", "ellipsoid mean", "ellipsoid max", "sinkhorn mean", "sinkhorn max", "agree"):
        table.add_column(column, justify="right")
    for row in data.rows:
        table.add_row(
            str(row.n),
            str(row.polarization_calls),
            f"{row.ellipsoid_calls_mean:.0f}",
            str(row.ellipsoid_calls_max),
            f"{row.sinkhorn_calls_mean:.0f}",
            str(row.sinkhorn_calls_max),
            f"{row.agreement}/{row.instances}",
        )
    Console(stderr=True).print(table)
