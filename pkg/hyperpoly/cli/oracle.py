"""
oracle命令: 求值与展开
"""
from typing import Annotated, Optional

import typer

from hyperpoly.cli.common import InstanceOption, OutOption, PointOption, parse_vector, reporting
from hyperpoly.schemas.reports import EvalData, ExpandData, TermModel
from hyperpoly.services.oracle import EXPANSION_LIMIT

router = typer.Typer()


@router.command("eval")
def evaluate(
    instance: InstanceOption,
    point: PointOption = None,
    imag: Annotated[Optional[str], typer.Option("--imag", help="虚部向量, 给出时在复点求值")] = None,
    out: OutOption = None,
):
    """在一点求多项式的值, 默认点为全1"""
    with reporting("eval", instance=instance, out=out) as run:
        oracle = run.load()
        x = parse_vector(point, oracle.n, default=1.0)
        if imag is None:
            run.finish(EvalData(point=x, value=oracle.eval(x)))
        else:
            z = x + 1j * parse_vector(imag, oracle.n)
            value = oracle.eval_complex(z)
            run.finish(EvalData(complex_point=z, value=value.real, imag=value.imag))


@router.command("expand")
def expand(
    instance: InstanceOption,
    limit: Annotated[int, typer.Option("--limit", help="展开的规模上限")] = EXPANSION_LIMIT,
    out: OutOption = None,
):
    """展开为显式多项式, 列出支撑与系数"""
    with reporting("expand", instance=instance, out=out) as run:
        oracle = run.load()
        poly = oracle.expand(limit)
        terms = [TermModel(exp=list(exp), coef=coef) for exp, coef in sorted(poly.terms.items())]
        run.finish(ExpandData(n=poly.n, support_size=len(terms), terms=terms))
