"""
命令行主入口
"""
from typing import Annotated, List, Optional
import sys

import click
import structlog
import typer
from pydantic import ValidationError

from hyperpoly import __version__
from hyperpoly.cli.common import error_report
from hyperpoly.cli.main import cli_app
from hyperpoly.config import get_settings
from hyperpoly.exceptions import EXIT_INPUT, EXIT_OK, HyperpolyError
from hyperpoly.middleware import setup_logging
from hyperpoly.schemas.common import ErrorReport

logger = structlog.get_logger(__name__)

app = cli_app


def _version(value: bool) -> None:
    if value:
        typer.echo(f"hyperpoly {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    log_level: Annotated[Optional[str], typer.Option("--log-level", help="覆盖配置中的日志级别")] = None,
    version: Annotated[
        bool, typer.Option("--version", callback=_version, is_eager=True, help="显示版本")
    ] = False,
):
    """配置日志; 日志写stderr, 报告写stdout或--out"""
    settings = get_settings()
    if log_level:
        settings = settings.model_copy(update={"log_level": log_level})
    setup_logging(settings)


def run(argv: Optional[List[str]] = None) -> int:
    """执行一条命令并返回退出码"""
    try:
        result = app(args=argv, prog_name="hyperpoly", standalone_mode=False)
    except click.exceptions.UsageError as e:
        e.show()
        return EXIT_INPUT
    except click.exceptions.Abort:
        return EXIT_INPUT
    except HyperpolyError as e:
        logger.error("Unhandled domain error", error=type(e).__name__, detail=e.detail)
        typer.echo(error_report(e).model_dump_json(indent=2))
        return e.exit_code
    except ValidationError as e:
        # 配置（环境变量）错误
        typer.echo(ErrorReport(
            error="ValidationError", detail=str(e), exit_code=EXIT_INPUT
        ).model_dump_json(indent=2))
        return EXIT_INPUT
    return result if isinstance(result, int) else EXIT_OK


def entrypoint() -> None:
    sys.exit(run())


if __name__ == "__main__":
    entrypoint()
