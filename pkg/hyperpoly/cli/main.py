"""
命令路由汇总
每个模块一个路由, 命令平铺在同一层
"""
import typer

from hyperpoly.cli import calculus, capacity, combinatorics, oracle, scaling, spectra, verification

cli_app = typer.Typer(
    name="hyperpoly",
    help="双曲多项式的Newton多面体判定: 黑盒oracle, 混合导数, 容量, Sinkhorn缩放与组合检验",
    no_args_is_help=True,
    add_completion=False,
)

# 包含各个模块的命令
for router in (oracle, calculus, spectra, capacity, scaling, combinatorics, verification):
    cli_app.registered_commands += router.router.registered_commands
