"""
微分计算测试
"""
from math import comb, factorial

import numpy as np
import pytest

from hyperpoly.exceptions import BudgetExceededError, InstanceError, OracleInputError
from hyperpoly.services.calculus import (
    MixedFormRequest,
    brute_mixed_discriminant,
    gradient_log,
    inclusion_exclusion_mixed_derivative,
    mixed_form,
    partial_derivative,
    polarization_mixed_derivative,
    random_complex_mixed_derivative,
    restrict,
    ryser_permanent,
)
from hyperpoly.services.combinatorics import hamiltonian_circuits
from hyperpoly.services.instances import diagonal_tuple, random_doubly_stochastic, random_zero_one_matrix
from hyperpoly.services.oracle import (
    DeterminantalOracle,
    ExplicitPolynomial,
    MatrixDeterminant,
    PowersumOracle,
    ProductOracle,
    TraceOracle,
)


def _random_psd_tuple(rng, n):
    return [np.outer(v, v) + 0.2 * np.eye(n) for v in rng.standard_normal((n, n))]


class TestRestrict:
    """单变量限制测试"""

    def test_product_on_diagonal(self):
        """测试 p(t, t) = t^2"""
        oracle = ProductOracle([[1, 0], [0, 1]])
        restriction = restrict(oracle, [0, 0], [1, 1])
        assert restriction.coefficients == pytest.approx([0, 0, 1], abs=1e-12)

    def test_powersum_line(self, powersum2):
        """测试 (1+t)^2 + t^2"""
        restriction = restrict(powersum2, [1, 0], [1, 1])
        assert restriction.coefficients == pytest.approx([1, 2, 2])

    def test_determinantal_along_e(self, rng):
        """测试 p(e + t e) = (1+t)^n p(e)"""
        n = 4
        oracle = DeterminantalOracle(_random_psd_tuple(rng, n))
        restriction = restrict(oracle, np.ones(n), np.ones(n))
        at_e = oracle.eval(np.ones(n))
        expected = [comb(n, k) * at_e for k in range(n + 1)]
        assert restriction.coefficients == pytest.approx(expected, rel=1e-8)

    def test_leading_is_value_at_direction(self, rng):
        """测试首项系数等于 p(v)"""
        oracle = ProductOracle(rng.uniform(0, 1, (5, 5)))
        v = rng.uniform(0.5, 1.5, 5)
        restriction = restrict(oracle, rng.uniform(-1, 1, 5), v)
        assert restriction.degree == 5
        assert restriction.leading == pytest.approx(oracle.eval(v), rel=1e-7, abs=1e-12)

    def test_call_count(self, powersum2):
        """测试 n+1 次调用"""
        restrict(powersum2, [1, 2], [0, 1])
        assert powersum2.call_count == 3


class TestPartialDerivative:
    """偏导数测试"""

    def test_monomial(self, monomial):
        """测试 ∂(x1 x2)/∂x2 在 (3, 4)"""
        assert partial_derivative(monomial, [3, 4], 0) == pytest.approx(4.0)
        assert partial_derivative(monomial, [3, 4], 1) == pytest.approx(3.0)

    def test_powersum(self):
        """测试 3 x_2^2 在 e"""
        assert partial_derivative(PowersumOracle(3), np.ones(3), 1) == pytest.approx(3.0)

    def test_matches_finite_difference(self, rng):
        """测试与中心差分一致"""
        n = 4
        oracle = DeterminantalOracle(_random_psd_tuple(rng, n))
        for _ in range(10):
            x = rng.uniform(0.5, 2.0, n)
            i = int(rng.integers(n))
            h = 1e-5
            step = np.zeros(n)
            step[i] = h
            central = (oracle.eval(x + step) - oracle.eval(x - step)) / (2 * h)
            assert partial_derivative(oracle, x, i) == pytest.approx(central, rel=1e-4)

    def test_index_out_of_range(self, monomial):
        with pytest.raises(OracleInputError):
            partial_derivative(monomial, [1, 1], 2)

    def test_tiny_coordinate(self):
        """测试 (Σx)^6 在 x_1 ≈ 0 处 ∂_1 = 6·5^5"""
        oracle = ProductOracle(np.ones((6, 6)))
        x = np.array([1e-60, 1, 1, 1, 1, 1])
        assert partial_derivative(oracle, x, 0) == pytest.approx(18750.0, rel=1e-8)

    def test_gradient_with_tiny_entry(self):
        """测试对数梯度中小分量的导数不丢失"""
        oracle = ProductOracle(np.eye(3) + np.ones((3, 3)))
        x = np.array([1e-40, 1.0, 1.0])
        partials = [partial_derivative(oracle, x, i) for i in range(3)]
        step = np.zeros(3)
        step[0] = 1e-6
        central = (oracle.eval(x + step) - oracle.eval(x - step)) / 2e-6
        assert partials[0] == pytest.approx(central, rel=1e-5)

    @pytest.mark.parametrize("family", ["det", "product", "trace", "powersum"])
    def test_euler_identity(self, family, rng):
        """测试 Σ x_i ∂_i p = n p"""
        n = 4
        oracles = {
            "det": DeterminantalOracle(_random_psd_tuple(rng, n)),
            "product": ProductOracle(rng.uniform(0, 1, (n, n))),
            "trace": TraceOracle(np.ones((n, n), dtype=int)),
            "powersum": PowersumOracle(n),
        }
        oracle = oracles[family]
        for _ in range(20):
            x = rng.uniform(0.2, 2.0, n)
            total = sum(x[i] * partial_derivative(oracle, x, i) for i in range(n))
            assert total == pytest.approx(n * oracle.eval(x), rel=1e-8)


class TestGradientLog:
    """对数梯度测试"""

    def test_monomial(self, monomial):
        assert gradient_log(monomial, [0.3, 7.0]) == pytest.approx([1.0, 1.0])

    def test_powersum(self):
        """测试 e 处为全1"""
        assert gradient_log(PowersumOracle(4), np.ones(4)) == pytest.approx(np.ones(4))

    def test_doubly_stochastic_product(self, rng):
        """测试双随机矩阵在 e 处为全1"""
        oracle = ProductOracle(random_doubly_stochastic(5, rng))
        assert gradient_log(oracle, np.ones(5)) == pytest.approx(np.ones(5), rel=1e-8)

    def test_sums_to_n(self, rng):
        oracle = ProductOracle(rng.uniform(0.1, 1, (4, 4)))
        assert np.sum(gradient_log(oracle, rng.uniform(0.5, 2, 4))) == pytest.approx(4.0)

    def test_needs_positive_point(self, monomial):
        with pytest.raises(OracleInputError):
            gradient_log(monomial, [1.0, 0.0])


class TestPolarization:
    """极化公式测试"""

    def test_monomial(self, monomial):
        """测试 ∂²(x1 x2) = 1"""
        assert polarization_mixed_derivative(monomial) == pytest.approx(1.0)

    def test_all_ones_product(self, all_ones_product):
        """测试 Per(J_2) = 2"""
        assert polarization_mixed_derivative(all_ones_product) == pytest.approx(2.0)

    def test_two_cycle(self, two_cycle):
        """测试迹多项式的混合导数为 n·回路数"""
        assert polarization_mixed_derivative(two_cycle) == pytest.approx(2.0 * hamiltonian_circuits([[0, 1], [1, 0]]))

    def test_complete_digraph(self):
        """测试4个顶点的完全有向图: 3! 条回路"""
        adjacency = np.ones((4, 4), dtype=int) - np.eye(4, dtype=int)
        assert polarization_mixed_derivative(TraceOracle(adjacency)) == pytest.approx(4 * 6)

    def test_call_count(self, rng):
        """测试恰好 2^{n-1} 次调用"""
        oracle = ProductOracle(rng.uniform(0, 1, (6, 6)))
        polarization_mixed_derivative(oracle)
        assert oracle.call_count == 2 ** 5

    def test_matches_ryser(self, rng):
        """测试与Ryser公式一致"""
        for _ in range(50):
            matrix = rng.uniform(0, 1, (7, 7))
            value = polarization_mixed_derivative(ProductOracle(matrix))
            assert value == pytest.approx(ryser_permanent(matrix), rel=1e-7)

    def test_budget(self):
        with pytest.raises(BudgetExceededError):
            polarization_mixed_derivative(PowersumOracle(5), limit=4)


class TestMixedForm:
    """混合形式测试"""

    def test_diagonal_pair(self):
        """测试 det(a diag(1,0) + b diag(0,1)) = ab"""
        request = MixedFormRequest(MatrixDeterminant(2), (np.diag([1.0, 0.0]), np.diag([0.0, 1.0])))
        assert mixed_form(request) == pytest.approx(1.0)

    def test_repeated_matrix(self, rng):
        """测试 M(A, A) = 2 det(A)"""
        a = rng.standard_normal((2, 2))
        request = MixedFormRequest(MatrixDeterminant(2), (a, a))
        assert mixed_form(request) == pytest.approx(2.0 * np.linalg.det(a))

    def test_repeated_vector(self, rng):
        """测试 M(x,..,x) = n! p(x)"""
        oracle = ProductOracle(rng.uniform(0, 1, (4, 4)))
        x = rng.uniform(0.5, 1.5, 4)
        request = MixedFormRequest(oracle, (x,) * 4)
        assert mixed_form(request) == pytest.approx(factorial(4) * oracle.eval(x), rel=1e-9)

    def test_canonical_vectors(self, rng):
        """测试基向量时等于极化结果"""
        oracle = ProductOracle(rng.uniform(0, 1, (5, 5)))
        request = MixedFormRequest(oracle, tuple(np.eye(5)))
        assert mixed_form(request) == pytest.approx(polarization_mixed_derivative(oracle), rel=1e-11)

    def test_inclusion_exclusion_agrees(self, rng):
        """测试容斥路径与极化路径一致"""
        oracle = ProductOracle(rng.uniform(0, 1, (5, 5)))
        vectors = tuple(rng.uniform(0, 1, (5, 5)))
        request = MixedFormRequest(oracle, vectors)
        assert inclusion_exclusion_mixed_derivative(request) == pytest.approx(mixed_form(request), rel=1e-9)

    def test_wrong_vector_count(self, monomial):
        with pytest.raises(OracleInputError):
            MixedFormRequest(monomial, (np.ones(2),))


class TestRandomEstimator:
    """随机复估计测试"""

    def test_monomial(self, monomial):
        estimate = random_complex_mixed_derivative(monomial, samples=100000, seed=1)
        assert abs(estimate.mean - 1.0) <= 3 * estimate.std_error + 1e-12

    def test_all_ones_product(self, all_ones_product):
        estimate = random_complex_mixed_derivative(all_ones_product, samples=20000, seed=2)
        assert abs(estimate.mean - 2.0) <= 4 * estimate.std_error

    def test_zero_one_product(self, rng):
        """测试随机0/1矩阵与Ryser基线"""
        matrix = random_zero_one_matrix(5, rng)
        estimate = random_complex_mixed_derivative(ProductOracle(matrix), samples=20000, seed=3)
        assert abs(estimate.mean - ryser_permanent(matrix)) <= 4 * estimate.std_error + 1e-9

    def test_seed_reproducible(self, all_ones_product):
        """测试同种子结果一致, 与并行度无关"""
        first = random_complex_mixed_derivative(all_ones_product, samples=500, seed=7)
        second = random_complex_mixed_derivative(all_ones_product, samples=500, seed=7, workers=4)
        assert first == second

    def test_sample_count(self, monomial):
        with pytest.raises(OracleInputError):
            random_complex_mixed_derivative(monomial, samples=0)


class TestRyser:
    """Ryser公式测试"""

    def test_identity(self):
        assert ryser_permanent(np.eye(3)) == pytest.approx(1.0)

    def test_all_ones(self):
        """测试 Per(J_3) = 3!"""
        assert ryser_permanent(np.ones((3, 3))) == pytest.approx(6.0)

    def test_scaled_all_ones(self):
        assert ryser_permanent(np.ones((3, 3)) / 3) == pytest.approx(6 / 27)

    def test_not_square(self):
        with pytest.raises(OracleInputError):
            ryser_permanent(np.ones((2, 3)))


class TestMixedDiscriminant:
    """混合判别式测试"""

    def test_coordinate_pair(self):
        assert brute_mixed_discriminant([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]) == pytest.approx(1.0)

    def test_repeated_matrix(self):
        """测试 D(A, A) = 2 det(A)"""
        a = np.array([[2.0, 1.0], [1.0, 3.0]])
        assert brute_mixed_discriminant([a, a]) == pytest.approx(10.0)

    def test_diagonal_tuple_is_permanent(self, rng):
        """测试对角元组退化为积和式"""
        for n in range(2, 7):
            matrix = rng.uniform(0, 1, (n, n))
            value = brute_mixed_discriminant(diagonal_tuple(matrix))
            assert value == pytest.approx(ryser_permanent(matrix), rel=1e-8)

    def test_matches_determinantal_polarization(self, rng):
        """测试与行列式oracle的极化结果一致"""
        matrices = _random_psd_tuple(rng, 4)
        value = polarization_mixed_derivative(DeterminantalOracle(matrices))
        assert brute_mixed_discriminant(matrices) == pytest.approx(value, rel=1e-7)

    def test_rejects_indefinite(self):
        with pytest.raises(InstanceError):
            brute_mixed_discriminant([np.diag([1.0, -1.0]), np.eye(2)])

    def test_explicit_polynomial_unchanged(self):
        """测试显式多项式的系数即混合导数"""
        poly = ExplicitPolynomial(3, {(1, 1, 1): 5.0, (3, 0, 0): 1.0})
        assert polarization_mixed_derivative(poly) == pytest.approx(5.0)
