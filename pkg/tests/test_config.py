"""
配置与工具函数测试
"""
import numpy as np
import pytest
from pydantic import ValidationError

from hyperpoly import config as hyperpoly_config
from hyperpoly.cli.common import CommandRun, error_report
from hyperpoly.config import DEFAULT_CORPUS_DIR, ProductionSettings, Settings, get_settings
from hyperpoly.exceptions import EXIT_FINDING, EXIT_INPUT, EXIT_OK, OracleInputError, ZeroDirectionError
from hyperpoly.schemas.common import RunConfig
from hyperpoly.services.instances import (
    diagonal_tuple,
    permutation_matrix,
    random_doubly_stochastic,
    random_gram_tuple,
    uniform_matrix,
)
from hyperpoly.utils import (
    bitmask_to_subset,
    derive_rngs,
    helmert_basis,
    numerical_rank,
    ordered_map,
    project_psd,
    subset_to_bitmask,
)


class TestSettingsLoading:
    """配置测试"""

    def test_test_environment(self):
        """测试conftest选择了测试配置"""
        settings = get_settings()
        assert isinstance(settings, hyperpoly_config.TestSettings)
        assert settings.report_timing is False
        assert settings.corpus_dir == DEFAULT_CORPUS_DIR

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("HYPERPOLY_SINKHORN_C", "4.5")
        assert Settings().sinkhorn_c == pytest.approx(4.5)

    def test_rejects_nonpositive_tolerance(self, monkeypatch):
        monkeypatch.setenv("HYPERPOLY_ROOT_TOL", "0")
        with pytest.raises(ValidationError):
            Settings()

    def test_rejects_unknown_log_format(self):
        with pytest.raises(ValidationError):
            Settings(log_format="xml")

    def test_production_logs_json(self):
        assert ProductionSettings().log_format == "json"


class TestErrorReports:
    """异常与错误报告测试"""

    def test_to_dict(self):
        error = OracleInputError("bad point", length=3)
        assert error.to_dict() == {
            "error": "OracleInputError",
            "detail": "bad point",
            "exit_code": EXIT_INPUT,
            "context": {"length": 3},
        }

    def test_error_report_from_domain_error(self):
        report = error_report(ZeroDirectionError(2))
        assert report.error == "ZeroDirectionError"
        assert report.exit_code == EXIT_FINDING
        assert report.context["index"] == 2

    def test_command_run_starts_ok(self):
        assert CommandRun("eval").exit_code == EXIT_OK


class TestRunConfig:
    """运行配置测试"""

    def test_flags_override_settings(self):
        config = RunConfig.from_settings(get_settings(), "decide", seed=7, trials=None)
        assert config.seed == 7
        assert config.trials == get_settings().trials

    def test_rejects_bad_distance(self):
        with pytest.raises(ValidationError):
            RunConfig(command="decide", distance=0.0)


class TestLinalg:
    """线性代数工具测试"""

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_helmert_orthonormal(self, n):
        basis = helmert_basis(n)
        assert basis.T @ basis == pytest.approx(np.eye(n - 1))
        assert basis.sum(axis=0) == pytest.approx(np.zeros(n - 1), abs=1e-12)

    def test_numerical_rank(self, rng):
        v = rng.standard_normal((2, 4))
        assert numerical_rank(v.T @ v) == 2
        assert numerical_rank(np.zeros((3, 3))) == 0

    def test_project_psd(self):
        projected = project_psd(np.diag([2.0, -1e-10]))
        assert projected == pytest.approx(np.diag([2.0, 0.0]))


class TestHelpers:
    """下标与并行工具测试"""

    def test_subset_bitmask(self):
        assert subset_to_bitmask((0, 2)) == 5
        assert bitmask_to_subset(5, 3) == (0, 2)

    def test_ordered_map_keeps_order(self):
        assert ordered_map(lambda k: k * k, range(10), workers=4) == [k * k for k in range(10)]

    def test_derived_streams_reproducible(self):
        first = [g.random() for g in derive_rngs(3, 2)]
        second = [g.random() for g in derive_rngs(3, 2)]
        assert first == second
        assert first[0] != first[1]


class TestInstances:
    """随机实例生成测试"""

    def test_doubly_stochastic(self, rng):
        matrix = random_doubly_stochastic(5, rng)
        assert matrix.sum(axis=0) == pytest.approx(np.ones(5))
        assert matrix.sum(axis=1) == pytest.approx(np.ones(5))

    def test_uniform(self):
        assert uniform_matrix(4).sum(axis=1) == pytest.approx(np.ones(4))

    def test_permutation(self):
        """测试第i行的1在perm[i]列"""
        assert permutation_matrix([2, 0, 1]).tolist() == [[0, 0, 1], [1, 0, 0], [0, 1, 0]]

    @pytest.mark.parametrize("mode", ["full", "pool"])
    def test_gram_tuple_psd(self, mode, rng):
        for matrix in random_gram_tuple(3, rng, mode=mode):
            assert np.allclose(matrix, matrix.T)
            assert np.linalg.eigvalsh(matrix).min() >= -1e-9

    def test_diagonal_tuple(self):
        tuple_ = diagonal_tuple([[1, 2], [3, 4]])
        assert tuple_[1] == pytest.approx(np.diag([3.0, 4.0]))
