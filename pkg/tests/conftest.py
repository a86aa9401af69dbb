"""
测试公共夹具
"""
import json
import os

os.environ["HYPERPOLY_ENVIRONMENT"] = "test"

import numpy as np
import pytest
from typer.testing import CliRunner

from hyperpoly.config import DEFAULT_CORPUS_DIR, get_settings
from hyperpoly.services.oracle import (
    DeterminantalOracle,
    ExplicitPolynomial,
    PowersumOracle,
    ProductOracle,
    TraceOracle,
)

get_settings.cache_clear()


@pytest.fixture
def corpus_dir():
    """随包语料库"""
    return DEFAULT_CORPUS_DIR


@pytest.fixture
def runner():
    """命令行测试客户端"""
    return CliRunner()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def monomial():
    """p = x1 x2"""
    return ExplicitPolynomial(2, {(1, 1): 1.0})


@pytest.fixture
def coordinate_det():
    """det(x1 diag(1,0) + x2 diag(0,1)) = x1 x2"""
    return DeterminantalOracle([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])


@pytest.fixture
def all_ones_product():
    """(x1 + x2)^2"""
    return ProductOracle([[1, 1], [1, 1]])


@pytest.fixture
def powersum2():
    return PowersumOracle(2)


@pytest.fixture
def two_cycle():
    """tr((D(x) A)^2) = 2 x1 x2"""
    return TraceOracle([[0, 1], [1, 0]])


@pytest.fixture
def write_instance(tmp_path):
    """把实例字典写成JSON文件并返回路径"""

    def _write(payload, name="instance.json"):
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path

    return _write
