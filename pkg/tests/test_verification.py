"""
语料库验证与基准测试
"""
import shutil
from math import log

import pytest

from hyperpoly.exceptions import InstanceError
from hyperpoly.schemas.common import RunConfig
from hyperpoly.services.verification import bench, call_bound, load_corpus, verify_corpus


@pytest.fixture
def config():
    return RunConfig(command="verify", trials=50)


def _suite(report, name):
    return next(s for s in report.suites if s.name == name)


class TestCorpus:
    """语料库读取测试"""

    def test_missing_directory(self, tmp_path):
        with pytest.raises(InstanceError):
            load_corpus(tmp_path / "missing")

    def test_empty_directory(self, tmp_path):
        with pytest.raises(InstanceError):
            load_corpus(tmp_path)

    def test_shipped_corpus(self, corpus_dir):
        """测试随包语料全部可构造"""
        entries = load_corpus(corpus_dir)
        assert len(entries) >= 30
        assert all(entry.error is None for entry in entries)
        assert [entry.path.name for entry in entries] == sorted(entry.path.name for entry in entries)


class TestVerify:
    """全语料验证测试"""

    def test_shipped_corpus_passes(self, corpus_dir, config):
        report = verify_corpus(config, corpus_dir)
        assert report.passed, [f for s in report.suites for f in s.failures]
        assert {s.name for s in report.suites} == {
            "validation", "hyperbolicity", "decision", "structure", "distance", "identities", "capacity",
        }

    def test_negative_controls_documented(self, corpus_dir, config):
        """测试幂和作为负对照被记录而非判为失败"""
        report = verify_corpus(config, corpus_dir)
        documented = {f.instance for f in _suite(report, "hyperbolicity").documented}
        assert "powersum2" in documented

    def test_invalid_instance_reported(self, tmp_path, corpus_dir, config, write_instance):
        """测试非半正定矩阵在validation中给出实例名"""
        shutil.copy(corpus_dir / "product_perm3.json", tmp_path)
        write_instance(
            {"kind": "determinantal", "n": 2, "matrices": [[[1, 0], [0, -1]], [[1, 0], [0, 1]]]},
            name="indefinite.json",
        )
        report = verify_corpus(config, tmp_path)
        assert not report.passed
        failures = _suite(report, "validation").failures
        assert [f.instance for f in failures] == ["indefinite"]
        assert _suite(report, "decision").passed

    def test_powersum_only(self, tmp_path, corpus_dir, config):
        shutil.copy(corpus_dir / "powersum2.json", tmp_path)
        report = verify_corpus(config, tmp_path)
        assert report.passed
        assert report.instances == 1
        assert len(_suite(report, "hyperbolicity").documented) == 1

    def test_wrong_label_fails(self, tmp_path, config, write_instance):
        """测试标注与暴力基线不一致"""
        write_instance(
            {"kind": "product", "n": 2, "matrix": [[1, 1], [0, 1]], "expected": {"in_polytope": False}},
            name="mislabeled.json",
        )
        report = verify_corpus(config, tmp_path)
        assert not report.passed
        assert _suite(report, "decision").failures[0].instance == "mislabeled"

    def test_deterministic(self, corpus_dir, config, tmp_path):
        for name in ("det_pd2.json", "product_hall_fail3.json", "trace_cycle2.json"):
            shutil.copy(corpus_dir / name, tmp_path)
        first = verify_corpus(config, tmp_path)
        second = verify_corpus(config, tmp_path)
        assert first == second


class TestBench:
    """oracle调用基准测试"""

    def test_small_sizes(self):
        report = bench([3, 4], per_size=2, seed=1)
        assert [row.n for row in report.rows] == [3, 4]
        assert [row.polarization_calls for row in report.rows] == [4, 8]
        assert report.all_agree
        assert report.fitted_constant >= 0

    def test_full_density(self):
        """测试全1矩阵总有完美匹配"""
        report = bench([3], per_size=1, seed=0, density=1.0)
        assert report.rows[0].agreement == 1
        assert report.rows[0].ellipsoid_calls_max > 0

    def test_call_bound(self):
        assert call_bound(2, 1.0) == pytest.approx(16 * log(2.0))
        assert call_bound(3, 0.5) == pytest.approx(81 * log(3.0))
