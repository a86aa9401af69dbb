"""
组合命令: Rado条件, Hall条件, Newton多面体成员判定
"""
import typer

from hyperpoly.cli.common import (
    HullTolOption,
    InstanceOption,
    OutOption,
    PointOption,
    RootTolOption,
    WorkersOption,
    parse_vector,
    reporting,
)
from hyperpoly.config import get_settings
from hyperpoly.exceptions import InstanceError
from hyperpoly.schemas.reports import CertificateModel, HallData, HullData, RadoData
from hyperpoly.services.combinatorics import (
    hall_condition,
    newton_polytope_contains,
    rado_check,
    separating_subset,
)
from hyperpoly.services.oracle import OracleKind

router = typer.Typer()


@router.command("rado")
def rado(
    instance: InstanceOption,
    root_tol: RootTolOption = None,
    workers: WorkersOption = None,
    out: OutOption = None,
):
    """rank(Σ_{i∈S} A_i) ≥ |S| 对所有非空子集（行列式族）"""
    with reporting("rado", instance=instance, out=out, root_tol=root_tol, workers=workers) as run:
        oracle = run.load()
        if oracle.kind is not OracleKind.DETERMINANTAL:
            raise InstanceError("Rado check needs a determinantal instance", kind=oracle.kind.value)
        report = rado_check(oracle, root_tol=run.config.root_tol, workers=run.config.workers)
        run.finish(RadoData.model_validate(report))


@router.command("hall")
def hall(
    instance: InstanceOption,
    workers: WorkersOption = None,
    out: OutOption = None,
):
    """支撑上的Hall型条件, 不成立时给出分离子集"""
    with reporting("hall", instance=instance, out=out, workers=workers) as run:
        oracle = run.load()
        supp = oracle.expand(get_settings().expansion_limit).support
        report = hall_condition(supp, workers=run.config.workers)
        data = HallData.model_validate(report)
        if not report.holds:
            certificate = separating_subset(supp, workers=run.config.workers)
            data.certificate = CertificateModel.model_validate(certificate)
        run.finish(data)


@router.command("polytope")
def polytope(
    instance: InstanceOption,
    point: PointOption = None,
    hull_tol: HullTolOption = None,
    out: OutOption = None,
):
    """点（默认全1）到支撑凸包的距离"""
    with reporting("polytope", instance=instance, out=out, hull_tol=hull_tol) as run:
        oracle = run.load()
        settings = get_settings()
        supp = oracle.expand(settings.expansion_limit).support
        report = newton_polytope_contains(
            supp,
            parse_vector(point, oracle.n, default=1.0),
            tol=run.config.hull_tol,
            gap_tol=settings.fw_gap_tol,
            max_iterations=settings.fw_max_iterations,
        )
        run.finish(HullData.model_validate(report))
