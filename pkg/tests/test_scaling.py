"""
Sinkhorn缩放测试
"""
import numpy as np
import pytest

from hyperpoly.exceptions import InstanceError, ZeroDirectionError
from hyperpoly.services.combinatorics import brute_matching
from hyperpoly.services.instances import permutation_matrix, random_doubly_stochastic, random_zero_one_matrix
from hyperpoly.services.oracle import DeterminantalOracle, ExplicitPolynomial, PowersumOracle, ProductOracle
from hyperpoly.services.scaling import (
    ScalingVerdict,
    ds_defect,
    evaluate_state,
    hs_step,
    is_doubly_stochastic,
    iteration_count,
    matrix_sinkhorn_reference,
    sinkhorn_decide,
)


class TestStep:
    """单步缩放测试"""

    def test_doubly_stochastic_fixed_point(self, rng):
        """测试双随机矩阵在 e 处不动"""
        oracle = ProductOracle(random_doubly_stochastic(4, rng))
        state = hs_step(oracle, np.ones(4))
        assert state.alpha == pytest.approx(np.ones(4), rel=1e-8)
        assert state.iteration == 1

    def test_monomial_defect_zero(self):
        """测试 Πx_i 的偏差恒为0"""
        oracle = ExplicitPolynomial(3, {(1, 1, 1): 1.0})
        state = hs_step(oracle, np.array([2.0, 0.5, 1.0]))
        assert state.defect == pytest.approx(0.0, abs=1e-16)

    def test_diagonal_product(self):
        """测试 Q = 2 α1 α2 时 α' = e"""
        state = hs_step(ProductOracle([[2, 0], [0, 1]]), np.ones(2))
        assert state.alpha == pytest.approx([1.0, 1.0])

    def test_normalized_product_one(self, rng):
        """测试缩放向量的几何平均为1"""
        oracle = ProductOracle(rng.uniform(0.1, 1.0, (4, 4)))
        state = hs_step(oracle, rng.uniform(0.5, 2.0, 4))
        assert np.prod(state.alpha) == pytest.approx(1.0)

    def test_absent_variable(self):
        """测试某列全为零时给出变量下标"""
        oracle = ProductOracle([[1, 1, 0], [1, 1, 0], [1, 1, 0]])
        with pytest.raises(ZeroDirectionError) as exc:
            hs_step(oracle, np.ones(3))
        assert exc.value.index == 2

    def test_positive_alpha_required(self, powersum2):
        with pytest.raises(InstanceError):
            evaluate_state(powersum2, [1.0, 0.0])


class TestDefect:
    """双随机偏差测试"""

    def test_doubly_stochastic(self, rng):
        oracle = ProductOracle(random_doubly_stochastic(5, rng))
        assert ds_defect(oracle, np.ones(5)) == pytest.approx(0.0, abs=1e-12)

    def test_powersum(self):
        """测试幂和在 e 处偏差为0"""
        assert ds_defect(PowersumOracle(3), np.ones(3)) == pytest.approx(0.0, abs=1e-12)

    def test_triangular(self):
        """测试 Q = (α1+α2)α2: (1/2-1)^2 + (3/2-1)^2"""
        assert ds_defect(ProductOracle([[1, 1], [0, 1]]), np.ones(2)) == pytest.approx(0.5)

    def test_scale_invariant(self, rng):
        oracle = ProductOracle(rng.uniform(0.1, 1.0, (3, 3)))
        alpha = rng.uniform(0.5, 2.0, 3)
        assert ds_defect(oracle, 7.0 * alpha) == pytest.approx(ds_defect(oracle, alpha))


class TestDecide:
    """Sinkhorn判定测试"""

    def test_permutation(self):
        """测试置换矩阵在第0步即为正"""
        report = sinkhorn_decide(ProductOracle(permutation_matrix([2, 0, 1])))
        assert report.verdict is ScalingVerdict.POSITIVE
        assert report.iterations == 0
        assert not report.heuristic

    def test_hall_violation(self):
        """测试缺列的积族"""
        report = sinkhorn_decide(ProductOracle([[1, 1, 0], [1, 1, 0], [1, 1, 0]]))
        assert report.verdict is ScalingVerdict.NEGATIVE
        assert report.certificate == 2

    def test_coordinate_determinantal(self, coordinate_det):
        assert sinkhorn_decide(coordinate_det).verdict is ScalingVerdict.POSITIVE

    def test_converges_in_one_step(self):
        """测试 Q = (α1+2α2)α2 一步后偏差低于 1/n"""
        report = sinkhorn_decide(ProductOracle([[1, 2], [0, 1]]))
        assert report.verdict is ScalingVerdict.POSITIVE
        assert report.iterations == 1
        assert report.trajectory[0].defect == pytest.approx(8 / 9)
        assert report.trajectory[-1].defect <= 0.5

    def test_zero_permanent_without_zero_column(self):
        """测试积和式为0但每列都出现"""
        report = sinkhorn_decide(ProductOracle([[1, 1, 1], [1, 0, 0], [1, 0, 0]]))
        assert report.verdict is ScalingVerdict.NEGATIVE
        assert report.certificate is None

    def test_zero_polynomial(self):
        report = sinkhorn_decide(ProductOracle([[0, 0], [1, 1]]))
        assert report.verdict is ScalingVerdict.NEGATIVE
        assert report.iterations == 0

    def test_budget_override(self):
        report = sinkhorn_decide(ProductOracle([[1, 1, 1], [1, 0, 0], [1, 0, 0]]), max_iters=3)
        assert report.budget == 3
        assert report.iterations <= 3

    def test_trajectory_capacity_bound(self, rng):
        """测试轨迹中 q(α)/Πα 不小于容量 Πc"""
        scales = np.array([1.0, 2.0, 0.5, 4.0])
        oracle = ProductOracle(random_doubly_stochastic(4, rng) * scales[None, :])
        report = sinkhorn_decide(oracle)
        assert report.verdict is ScalingVerdict.POSITIVE
        assert [row.iteration for row in report.trajectory] == list(range(report.iterations + 1))
        for row in report.trajectory:
            assert row.capacity_bound >= np.prod(scales) * (1 - 1e-9)

    def test_powersum_is_heuristic(self):
        report = sinkhorn_decide(PowersumOracle(3))
        assert report.heuristic
        assert report.verdict is ScalingVerdict.POSITIVE

    def test_iteration_count(self):
        """测试 K = ceil(c n max(1, ln q(e)))"""
        oracle = ProductOracle(np.eye(3))
        assert iteration_count(oracle, 8.0, 1.0) == 24
        assert iteration_count(oracle, 2.0, np.exp(3.0)) == 18


class TestMatchingAgreement:
    """Sinkhorn判定与完美匹配一致性测试"""

    def test_divergent_scaling(self):
        """测试α分量趋向0时给出NEGATIVE而不是异常"""
        matrix = np.array([
            [1, 1, 0, 0, 0, 0, 1],
            [0, 0, 0, 0, 0, 1, 0],
            [1, 0, 1, 0, 0, 0, 0],
            [0, 0, 1, 0, 0, 0, 0],
            [1, 0, 0, 0, 0, 0, 0],
            [0, 0, 0, 1, 1, 0, 0],
            [0, 0, 0, 0, 1, 1, 0],
        ])
        assert not brute_matching(matrix)
        report = sinkhorn_decide(ProductOracle(matrix))
        assert report.verdict is ScalingVerdict.NEGATIVE

    @pytest.mark.parametrize("n", [4, 5, 6, 7, 8, 9])
    def test_matches_perfect_matching(self, n):
        """测试0/1积族: POSITIVE 当且仅当存在完美匹配"""
        rng = np.random.default_rng(300 + n)
        for _ in range(4):
            matrix = random_zero_one_matrix(n, rng, density=0.35)
            report = sinkhorn_decide(ProductOracle(matrix))
            expected = ScalingVerdict.POSITIVE if brute_matching(matrix) else ScalingVerdict.NEGATIVE
            assert report.verdict is expected, matrix.tolist()


class TestDoublyStochastic:
    """双随机判定测试"""

    def test_birkhoff(self, rng):
        assert is_doubly_stochastic(ProductOracle(random_doubly_stochastic(4, rng)))

    def test_not_doubly_stochastic(self):
        assert not is_doubly_stochastic(ProductOracle([[2, 0], [0, 1]]))

    def test_determinantal_identity_tuple(self):
        """测试 A_i = E_ii 的行列式族"""
        oracle = DeterminantalOracle([np.diag(row) for row in np.eye(3)])
        assert is_doubly_stochastic(oracle)


class TestMatrixReference:
    """经典矩阵Sinkhorn测试"""

    def test_fixed_point(self, rng):
        matrix = random_doubly_stochastic(4, rng)
        assert matrix_sinkhorn_reference(matrix, 5) == pytest.approx(matrix)

    def test_diagonal(self):
        assert matrix_sinkhorn_reference([[2, 0], [0, 1]], 1) == pytest.approx(np.eye(2))

    def test_all_ones(self):
        """测试一步后为 (1/2)J"""
        assert matrix_sinkhorn_reference(np.ones((2, 2)), 1) == pytest.approx(np.full((2, 2), 0.5))

    def test_zero_row(self):
        with pytest.raises(InstanceError):
            matrix_sinkhorn_reference([[0, 0], [1, 1]], 1)

    def test_agrees_with_matrix_normalization(self, rng):
        """测试积族的对数梯度等于行归一化后的列和"""
        matrix = rng.uniform(0.1, 1.0, (3, 3))
        report = sinkhorn_decide(ProductOracle(matrix))
        scaled = matrix * report.final_alpha[None, :]
        scaled = scaled / scaled.sum(axis=1, keepdims=True)
        defect = float(np.sum((scaled.sum(axis=0) - 1.0) ** 2))
        assert report.verdict is ScalingVerdict.POSITIVE
        assert defect == pytest.approx(report.trajectory[-1].defect, rel=1e-8, abs=1e-12)
