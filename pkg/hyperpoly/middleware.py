"""
日志与命令上下文模块
为每条命令记录耗时和oracle调用次数
"""
from contextlib import contextmanager
from typing import Iterator, Optional
import logging
import sys
import time
import uuid

import structlog

from hyperpoly.config import Settings


def setup_logging(settings: Settings) -> None:
    """配置structlog（日志输出到stderr, stdout只写报告）"""
    level = getattr(logging, settings.log_level.upper(), logging.INFO)
    handlers = [logging.StreamHandler(sys.stderr)]
    if settings.log_file:
        handlers.append(logging.FileHandler(settings.log_file))
    logging.basicConfig(level=level, format="%(message)s", handlers=handlers, force=True)

    if settings.log_format == "json":
        renderer = structlog.processors.JSONRenderer()
    else:
        renderer = structlog.dev.ConsoleRenderer(colors=False)

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            renderer,
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )


logger = structlog.get_logger(__name__)


class CommandContext:
    """单条命令的运行上下文"""

    def __init__(self, command: str, oracle=None):
        self.command = command
        self.run_id = str(uuid.uuid4())
        self.oracle = oracle
        self.start_time = time.perf_counter()
        self.start_calls = oracle.call_count if oracle is not None else 0
        self.process_time: Optional[float] = None

    def attach(self, oracle) -> None:
        """命令中途才构造oracle时调用"""
        self.oracle = oracle
        self.start_calls = oracle.call_count

    @property
    def oracle_calls(self) -> int:
        if self.oracle is None:
            return 0
        return self.oracle.call_count - self.start_calls

    def elapsed(self) -> float:
        return time.perf_counter() - self.start_time


@contextmanager
def command_context(command: str, oracle=None) -> Iterator[CommandContext]:
    """命令日志上下文"""
    ctx = CommandContext(command, oracle)
    log = logger.bind(run_id=ctx.run_id, command=command)
    log.info("Command started")

    try:
        yield ctx
    except Exception as e:
        ctx.process_time = ctx.elapsed()
        log.error(
            "Command failed",
            error=str(e),
            error_type=type(e).__name__,
            process_time=ctx.process_time,
            oracle_calls=ctx.oracle_calls,
        )
        raise

    ctx.process_time = ctx.elapsed()
    log.info(
        "Command completed",
        process_time=ctx.process_time,
        oracle_calls=ctx.oracle_calls,
    )
