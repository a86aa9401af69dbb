"""
配置管理模块
支持多环境配置, 所有数值容差集中在这里
"""
from functools import lru_cache
from pathlib import Path
from typing import Optional
import os

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


DEFAULT_CORPUS_DIR = Path(__file__).resolve().parent / "corpus"


class Settings(BaseSettings):
    """应用配置类"""

    model_config = SettingsConfigDict(
        env_prefix="HYPERPOLY_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    environment: str = "development"

    # 谱计算容差
    root_tol: float = 1e-7
    imag_tol: float = 1e-6

    # 判定配置
    decision_delta: float = 1.0 / 3.0
    ellipsoid_margin: int = 16
    gradient_tol: float = 1e-9

    # 凸包投影配置
    hull_tol: float = 1e-7
    fw_gap_tol: float = 1e-15
    fw_max_iterations: int = 20000

    # Sinkhorn 配置
    sinkhorn_c: float = 8.0

    # 随机试验配置
    seed: int = 0
    trials: int = 200
    workers: int = 1

    # 规模保护
    expansion_limit: int = 12
    polarization_limit: int = 26
    ryser_limit: int = 20

    # 语料库
    corpus_dir: Path = DEFAULT_CORPUS_DIR

    # 日志配置
    log_level: str = "INFO"
    log_format: str = "console"
    log_file: Optional[str] = None
    report_timing: bool = True

    @field_validator(
        "root_tol", "imag_tol", "decision_delta",
        "gradient_tol", "hull_tol", "fw_gap_tol", "sinkhorn_c",
    )
    @classmethod
    def validate_positive(cls, v: float) -> float:
        """容差必须为正"""
        if not v > 0:
            raise ValueError("Tolerances must be positive")
        return v

    @field_validator("workers", "trials", "fw_max_iterations")
    @classmethod
    def validate_count(cls, v: int) -> int:
        if v < 1:
            raise ValueError("Counts must be at least 1")
        return v

    @field_validator("log_format")
    @classmethod
    def validate_log_format(cls, v: str) -> str:
        if v not in ("console", "json"):
            raise ValueError("log_format must be 'console' or 'json'")
        return v


class DevelopmentSettings(Settings):
    """开发环境配置"""
    log_level: str = "DEBUG"


class ProductionSettings(Settings):
    """生产环境配置"""
    log_level: str = "INFO"
    log_format: str = "json"


class TestSettings(Settings):
    """测试环境配置"""
    log_level: str = "WARNING"
    trials: int = 50
    report_timing: bool = False


@lru_cache()
def get_settings() -> Settings:
    """获取配置实例（单例模式）"""
    environment = os.getenv("HYPERPOLY_ENVIRONMENT", "development").lower()

    if environment == "production":
        return ProductionSettings()
    elif environment == "test":
        return TestSettings()
    else:
        return DevelopmentSettings()
