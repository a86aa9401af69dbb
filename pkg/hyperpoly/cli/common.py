"""
命令共用的参数与报告输出
"""
from contextlib import contextmanager
from pathlib import Path
from typing import Annotated, Any, Iterator, List, Optional
import json

import numpy as np
import typer
from pydantic import BaseModel, ValidationError

from hyperpoly.config import get_settings
from hyperpoly.exceptions import EXIT_FINDING, EXIT_INPUT, EXIT_OK, HyperpolyError, InstanceError, OracleInputError
from hyperpoly.middleware import CommandContext, command_context
from hyperpoly.schemas.common import ErrorReport, ReportEnvelope, RunConfig
from hyperpoly.services.oracle import PolynomialOracle, load_instance, make_oracle

InstanceOption = Annotated[Path, typer.Option("--instance", "-i", help="JSON实例文件")]
OutOption = Annotated[Optional[Path], typer.Option("--out", "-o", help="报告输出路径, 默认stdout")]
SeedOption = Annotated[Optional[int], typer.Option("--seed", help="随机种子")]
TrialsOption = Annotated[Optional[int], typer.Option("--trials", help="随机试验次数")]
RootTolOption = Annotated[Optional[float], typer.Option("--root-tol", help="秩的相对阈值")]
DeltaOption = Annotated[Optional[float], typer.Option("--delta", help="椭球法精度δ")]
HullTolOption = Annotated[Optional[float], typer.Option("--hull-tol", help="凸包距离容差")]
SinkhornCOption = Annotated[Optional[float], typer.Option("--sinkhorn-c", help="Sinkhorn迭代常数c")]
WorkersOption = Annotated[Optional[int], typer.Option("--workers", help="并行线程数")]
PointOption = Annotated[Optional[str], typer.Option("--point", help="求值点, 如 1,2,3 或 [1,2,3]")]
DirectionOption = Annotated[Optional[str], typer.Option("--direction", help="方向向量, 默认全1")]


def parse_vector(text: Optional[str], n: int, default: Optional[float] = None) -> np.ndarray:
    """逗号分隔或JSON数组 -> 长度n的向量"""
    if text is None:
        if default is None:
            raise OracleInputError("A point is required")
        return np.full(n, float(default))
    stripped = text.strip()
    try:
        values = json.loads(stripped) if stripped.startswith("[") else [float(v) for v in stripped.split(",")]
        vector = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as e:
        raise OracleInputError(f"Cannot parse vector {text!r}: {e}")
    if vector.shape != (n,):
        raise OracleInputError(f"Vector must have length {n}", got=int(vector.size))
    return vector


def parse_ints(text: Optional[str]) -> List[int]:
    if text is None or not text.strip():
        return []
    try:
        return [int(v) for v in text.strip().strip("[]").split(",") if v.strip()]
    except ValueError as e:
        raise OracleInputError(f"Cannot parse integer list {text!r}: {e}")


def build_config(command: str, **flags: Any) -> RunConfig:
    """Settings默认值 + 命令行参数"""
    for key in ("instance", "out", "corpus"):
        if flags.get(key) is not None:
            flags[key] = str(flags[key])
    return RunConfig.from_settings(get_settings(), command, **flags)


def _jsonable(value: Any) -> Any:
    return json.loads(json.dumps(value, default=str))


def error_report(error: Exception) -> ErrorReport:
    """领域异常或参数校验错误 -> 错误报告"""
    if isinstance(error, HyperpolyError):
        return ErrorReport.model_validate(_jsonable(error.to_dict()))
    return ErrorReport(
        error=type(error).__name__,
        detail=str(error),
        exit_code=EXIT_INPUT,
        context={"errors": _jsonable(error.errors(include_url=False, include_context=False))},
    )


class CommandRun:
    """一条命令的执行: 读实例, 计数, 写报告"""

    def __init__(self, command: str):
        self.command = command
        self.config: Optional[RunConfig] = None
        self.context: Optional[CommandContext] = None
        self.exit_code = EXIT_OK

    def load(self) -> PolynomialOracle:
        if self.config.instance is None:
            raise InstanceError("--instance is required")
        oracle = make_oracle(load_instance(self.config.instance))
        self.context.attach(oracle)
        return oracle

    def finish(self, data: BaseModel, finding: bool = False) -> None:
        envelope = ReportEnvelope(
            command=self.command,
            data=data,
            oracle_calls=self.context.oracle_calls,
            config=self.config,
        )
        # verify 报告不计时, 保证同种子两次运行字节一致
        if get_settings().report_timing and self.command != "verify":
            envelope.wall_time = round(self.context.elapsed(), 6)
        self.write(envelope.render())
        if finding:
            self.exit_code = EXIT_FINDING

    def fail(self, error: Exception) -> None:
        report = error_report(error)
        self.write(report.model_dump_json(indent=2))
        self.exit_code = report.exit_code

    def write(self, text: str) -> None:
        if self.config is not None and self.config.out:
            Path(self.config.out).write_text(text + "\n", encoding="utf-8")
        else:
            typer.echo(text)


@contextmanager
def reporting(command: str, **flags: Any) -> Iterator[CommandRun]:
    """执行命令体, 把领域异常转换为错误报告和退出码"""
    run = CommandRun(command)
    try:
        run.config = build_config(command, **flags)
    except ValidationError as e:
        run.fail(e)
        raise typer.Exit(run.exit_code)

    try:
        with command_context(command) as ctx:
            run.context = ctx
            yield run
    except (HyperpolyError, ValidationError) as e:
        run.fail(e)
    if run.exit_code:
        raise typer.Exit(run.exit_code)
