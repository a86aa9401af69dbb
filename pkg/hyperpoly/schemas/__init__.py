"""
Pydantic模型包
实例格式与报告外层; 各命令的报告模型见 schemas.reports
"""
from .common import ErrorReport, ReportEnvelope, RunConfig
from .instance import Expectation, Instance, instance_adapter

__all__ = [
    "ErrorReport",
    "ReportEnvelope",
    "RunConfig",
    "Expectation",
    "Instance",
    "instance_adapter",
]
