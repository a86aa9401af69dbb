"""
语料库验证与oracle调用基准模块
对每个语料实例运行跨模块性质检验, 逐项给出通过/失败及见证
"""
from dataclasses import dataclass, field
from math import log
from pathlib import Path
from typing import Any, Callable, List, Optional, Union

import numpy as np
import structlog

from hyperpoly.exceptions import HyperpolyError, InstanceError
from hyperpoly.schemas.common import RunConfig
from hyperpoly.schemas.instance import Expectation
from hyperpoly.services.calculus import (
    brute_mixed_discriminant,
    expected_exponent,
    polarization_mixed_derivative,
    ryser_permanent,
    value_and_log_gradient,
)
from hyperpoly.services.capacity import Verdict, capacity_estimate, decide_polytope, vdw_ratio
from hyperpoly.services.combinatorics import (
    brute_matching,
    check_lattice_saturation,
    check_polymatroid,
    hall_condition,
    hamiltonian_circuits,
    newton_polytope_contains,
    rado_check,
)
from hyperpoly.services.instances import random_zero_one_matrix
from hyperpoly.services.oracle import (
    OracleKind,
    PolynomialOracle,
    ProductOracle,
    load_instance,
    make_oracle,
)
from hyperpoly.services.scaling import ScalingVerdict, is_doubly_stochastic, sinkhorn_decide
from hyperpoly.services.spectra import (
    half_plane_check,
    is_hyperbolic_sampled,
    rank_submodularity_check,
    trace_in_direction,
)
from hyperpoly.utils.seeding import derive_rngs, make_rng

logger = structlog.get_logger(__name__)

DECISION_LIMIT = 9
STRUCTURE_LIMIT = 5
IDENTITY_LIMIT = 8
MIXED_DISCRIMINANT_CHECK_LIMIT = 6
CAPACITY_REL_TOL = 1e-3
VDW_TOL = 1e-6
IDENTITY_REL_TOL = 1e-7
TRACE_IDENTITY_TOL = 1e-6
DISTANCE_SLACK = 1e-6


@dataclass
class CorpusEntry:
    name: str
    path: Path
    expected: Expectation
    oracle: Optional[PolynomialOracle] = None
    error: Optional[str] = None


@dataclass
class Finding:
    instance: str
    detail: str
    witness: Any = None


@dataclass
class SuiteResult:
    name: str
    passed: bool = True
    checked: int = 0
    failures: List[Finding] = field(default_factory=list)
    documented: List[Finding] = field(default_factory=list)

    def fail(self, instance: str, detail: str, witness: Any = None) -> None:
        self.passed = False
        self.failures.append(Finding(instance, detail, witness))

    def note(self, instance: str, detail: str, witness: Any = None) -> None:
        """记录预期中的失败（负对照）"""
        self.documented.append(Finding(instance, detail, witness))


@dataclass
class VerifyReport:
    passed: bool
    instances: int
    suites: List[SuiteResult]


@dataclass
class BenchRow:
    n: int
    instances: int
    polarization_calls: int
    ellipsoid_calls_mean: float
    ellipsoid_calls_max: int
    sinkhorn_calls_mean: float
    sinkhorn_calls_max: int
    agreement: int
    bound_ratio: float


@dataclass
class BenchReport:
    rows: List[BenchRow]
    fitted_constant: float
    all_agree: bool


def load_corpus(directory: Union[str, Path]) -> List[CorpusEntry]:
    """读取目录下全部 *.json 实例, 按文件名排序; 构造失败的实例保留错误信息"""
    root = Path(directory)
    if not root.is_dir():
        raise InstanceError(f"Corpus directory not found: {root}")
    paths = sorted(root.glob("*.json"))
    if not paths:
        raise InstanceError(f"Corpus directory has no instances: {root}")

    entries = []
    for path in paths:
        entry = CorpusEntry(name=path.stem, path=path, expected=Expectation())
        try:
            instance = load_instance(path)
            entry.name = instance.name or path.stem
            entry.expected = instance.expected or Expectation()
            entry.oracle = make_oracle(instance)
        except HyperpolyError as e:
            entry.error = e.detail
        entries.append(entry)
    return entries


def _guarded(suite: SuiteResult, entry: CorpusEntry, check: Callable[[], None]) -> None:
    suite.checked += 1
    try:
        check()
    except HyperpolyError as e:
        suite.fail(entry.name, f"{type(e).__name__}: {e.detail}", e.context or None)


def _is_zero(oracle: PolynomialOracle) -> bool:
    return not oracle.eval(np.ones(oracle.n)) >= 0.5 * oracle.coefficient_floor()


def validation_suite(entries: List[CorpusEntry]) -> SuiteResult:
    suite = SuiteResult("validation")
    for entry in entries:
        suite.checked += 1
        if entry.error is not None:
            suite.fail(entry.name, entry.error, str(entry.path.name))
    return suite


def hyperbolicity_suite(entries: List[CorpusEntry], config: RunConfig) -> SuiteResult:
    """P-双曲族必须通过抽样双曲性与半平面检验; powersum 必须失败"""
    suite = SuiteResult("hyperbolicity")
    for entry in entries:
        oracle = entry.oracle
        if oracle is None:
            continue
        if oracle.p_hyperbolic:
            def check(oracle=oracle, entry=entry):
                sampled = is_hyperbolic_sampled(
                    oracle, trials=config.trials, seed=config.seed,
                    imag_tol=config.imag_tol, workers=config.workers,
                )
                if not sampled.passed:
                    suite.fail(entry.name, "roots are not real", sampled.witness)
                half_plane = half_plane_check(oracle, trials=config.trials, seed=config.seed, workers=config.workers)
                if not half_plane.passed:
                    suite.fail(
                        entry.name, "half-plane property violated",
                        _pairs(half_plane.witness or half_plane.inequality_witness),
                    )
            _guarded(suite, entry, check)
        elif oracle.kind is OracleKind.POWERSUM:
            def check(oracle=oracle, entry=entry):
                sampled = is_hyperbolic_sampled(oracle, trials=config.trials, seed=config.seed)
                half_plane = half_plane_check(oracle, trials=config.trials, seed=config.seed)
                if sampled.passed or half_plane.passed:
                    suite.fail(entry.name, "negative control was not detected")
                else:
                    suite.note(entry.name, "not hyperbolic; zero in the open right half-plane",
                               _pairs(half_plane.witness))
            _guarded(suite, entry, check)
    return suite


def _pairs(witness) -> Optional[List[List[float]]]:
    if witness is None:
        return None
    return [[float(np.real(z)), float(np.imag(z))] for z in witness]


def _ground_truth(oracle: PolynomialOracle) -> bool:
    """独立于容量的判定基线"""
    if oracle.kind is OracleKind.PRODUCT:
        return brute_matching(oracle.matrix > 0)
    if oracle.kind is OracleKind.DETERMINANTAL:
        return rado_check(oracle).positive
    return newton_polytope_contains(oracle.expand().support).inside


def decision_suite(entries: List[CorpusEntry], config: RunConfig) -> SuiteResult:
    """椭球判定, Sinkhorn判定与暴力基线一致"""
    suite = SuiteResult("decision")
    for entry in entries:
        oracle = entry.oracle
        if oracle is None or oracle.n > DECISION_LIMIT:
            continue

        def check(oracle=oracle, entry=entry):
            truth = False if _is_zero(oracle) else _ground_truth(oracle)
            if entry.expected.in_polytope is not None and entry.expected.in_polytope != truth:
                suite.fail(entry.name, "label disagrees with the brute-force baseline",
                           {"label": entry.expected.in_polytope, "baseline": truth})

            decision = decide_polytope(oracle, delta=config.delta, distance=config.distance, workers=config.workers)
            wanted = Verdict.IN_POLYTOPE if truth else Verdict.NOT_IN_POLYTOPE
            if decision.verdict is not wanted:
                finding = (entry.name, f"ellipsoid verdict {decision.verdict.value}, baseline {wanted.value}",
                           {"min_value": decision.min_value_found})
                # 距离下界只对S-双曲支撑成立
                if oracle.p_hyperbolic or entry.expected.s_hyperbolic is True:
                    suite.fail(*finding)
                else:
                    suite.note(*finding)

            scaled = sinkhorn_decide(oracle, sinkhorn_c=config.sinkhorn_c, workers=config.workers)
            if (scaled.verdict is ScalingVerdict.POSITIVE) != truth:
                finding = (entry.name, f"sinkhorn verdict {scaled.verdict.value}, baseline {wanted.value}",
                           {"iterations": scaled.iterations, "budget": scaled.budget})
                if scaled.heuristic:
                    suite.note(*finding)
                else:
                    suite.fail(*finding)

            if oracle.kind is OracleKind.DETERMINANTAL and oracle.n <= MIXED_DISCRIMINANT_CHECK_LIMIT:
                mixed = brute_mixed_discriminant(oracle.matrices, workers=config.workers)
                if (mixed > 0.5 * oracle.coefficient_floor()) != truth:
                    suite.fail(entry.name, "mixed discriminant sign disagrees with Rado", {"mixed": mixed})
        _guarded(suite, entry, check)
    return suite


def structure_suite(entries: List[CorpusEntry], config: RunConfig) -> SuiteResult:
    """格点饱和, 多拟阵支撑, 秩次模性; 非S-双曲的负对照必须违反格点饱和"""
    suite = SuiteResult("structure")
    for entry in entries:
        oracle = entry.oracle
        if oracle is None or oracle.n > STRUCTURE_LIMIT or _is_zero(oracle):
            continue
        negative = entry.expected.s_hyperbolic is False
        if not (oracle.p_hyperbolic or negative):
            continue

        def check(oracle=oracle, entry=entry, negative=negative):
            poly = oracle.expand()
            saturation = check_lattice_saturation(poly, tol=config.hull_tol)
            if negative:
                if saturation.holds:
                    suite.fail(entry.name, "negative control saturates its hull")
                else:
                    suite.note(entry.name, "lattice point in the hull outside the support",
                               list(saturation.witness))
                return
            if not saturation.holds:
                suite.fail(entry.name, "lattice point in the hull outside the support", list(saturation.witness))
            polymatroid = check_polymatroid(oracle, poly, root_tol=config.root_tol)
            if not polymatroid.holds:
                suite.fail(entry.name, "support is not the rank polymatroid",
                           {"missing": polymatroid.missing, "extra": polymatroid.extra})
            submodular = rank_submodularity_check(
                oracle, trials=config.trials, seed=config.seed, root_tol=config.root_tol
            )
            if not (submodular.holds and submodular.normalized):
                suite.fail(entry.name, "rank function is not submodular", submodular.violation)
        _guarded(suite, entry, check)
    return suite


def distance_suite(entries: List[CorpusEntry], config: RunConfig) -> SuiteResult:
    """Hall条件不成立时, e 到凸包的距离不小于子集给出的下界"""
    suite = SuiteResult("distance")
    for entry in entries:
        oracle = entry.oracle
        if oracle is None or oracle.n > IDENTITY_LIMIT or _is_zero(oracle):
            continue

        def check(oracle=oracle, entry=entry):
            supp = oracle.expand().support
            hall = hall_condition(supp, workers=config.workers)
            if hall.holds:
                return
            size = len(hall.violating_subset)
            bound = (oracle.n / (size * (oracle.n - size))) ** 0.5
            hull = newton_polytope_contains(supp, tol=config.hull_tol)
            if hull.inside or hull.distance < bound - DISTANCE_SLACK:
                suite.fail(entry.name, "hull distance below the subset bound",
                           {"distance": hull.distance, "bound": bound, "subset": list(hall.violating_subset)})
        _guarded(suite, entry, check)
    return suite


def identity_suite(entries: List[CorpusEntry], config: RunConfig) -> SuiteResult:
    """混合导数恒等式: 积族=积和式, 行列式族=混合判别式, 迹族=n·Hamilton回路数"""
    suite = SuiteResult("identities")
    for entry in entries:
        oracle = entry.oracle
        if oracle is None or oracle.n > IDENTITY_LIMIT:
            continue
        if oracle.kind is OracleKind.PRODUCT:
            baseline: Optional[Callable[[], float]] = lambda oracle=oracle: ryser_permanent(oracle.matrix)
        elif oracle.kind is OracleKind.DETERMINANTAL and oracle.n <= MIXED_DISCRIMINANT_CHECK_LIMIT:
            baseline = lambda oracle=oracle: brute_mixed_discriminant(oracle.matrices)
        elif oracle.kind is OracleKind.TRACE:
            baseline = lambda oracle=oracle: float(oracle.n * hamiltonian_circuits(oracle.adjacency))
        else:
            continue

        def check(oracle=oracle, entry=entry, baseline=baseline):
            before = oracle.call_count
            value = polarization_mixed_derivative(oracle, workers=config.workers)
            calls = oracle.call_count - before
            if calls != 1 << (oracle.n - 1):
                suite.fail(entry.name, "polarization call count", {"calls": calls})
            expected = baseline()
            if abs(value - expected) > IDENTITY_REL_TOL * max(1.0, abs(expected)):
                suite.fail(entry.name, "mixed derivative disagrees with its baseline",
                           {"polarization": value, "baseline": expected})

            if oracle.p_hyperbolic and not _is_zero(oracle):
                # 方向迹 = α_i ∂_i Q(α) / Q(α)
                alpha = make_rng(config.seed).uniform(0.5, 2.0, oracle.n)
                _, gradient = value_and_log_gradient(oracle, alpha)
                for i in range(oracle.n):
                    component = np.zeros(oracle.n)
                    component[i] = alpha[i]
                    trace = trace_in_direction(oracle, component, alpha)
                    if abs(trace - gradient[i]) > TRACE_IDENTITY_TOL * max(1.0, abs(gradient[i])):
                        suite.fail(entry.name, "directional trace disagrees with the log-gradient",
                                   {"index": i, "trace": trace, "log_gradient": float(gradient[i])})
                        break
        _guarded(suite, entry, check)
    return suite


def capacity_suite(entries: List[CorpusEntry], config: RunConfig) -> SuiteResult:
    """powersum 的容量为 n; 双随机积族满足 van der Waerden 区间"""
    suite = SuiteResult("capacity")
    for entry in entries:
        oracle = entry.oracle
        if oracle is None:
            continue
        if oracle.kind is OracleKind.POWERSUM:
            def check(oracle=oracle, entry=entry):
                capacity = capacity_estimate(oracle, workers=config.workers).capacity
                if abs(capacity - oracle.n) > CAPACITY_REL_TOL * oracle.n:
                    suite.fail(entry.name, "capacity of the power sum differs from n", {"capacity": capacity})
            _guarded(suite, entry, check)
        elif oracle.kind is OracleKind.PRODUCT and not _is_zero(oracle) and is_doubly_stochastic(oracle):
            def check(oracle=oracle, entry=entry):
                exponent = expected_exponent(oracle)
                if np.max(np.abs(exponent - 1.0)) > VDW_TOL:
                    suite.fail(entry.name, "doubly stochastic instance has a skewed exponent mean",
                               exponent.tolist())
                report = vdw_ratio(oracle, tol=VDW_TOL, workers=config.workers)
                if not (report.lower_bound_holds and report.upper_bound_holds):
                    suite.fail(entry.name, "van der Waerden ratio out of range",
                               {"ratio": report.ratio, "lower": report.lower_bound})
            _guarded(suite, entry, check)
    return suite


SUITES = (
    hyperbolicity_suite,
    decision_suite,
    structure_suite,
    distance_suite,
    identity_suite,
    capacity_suite,
)


def verify_corpus(config: RunConfig, directory: Optional[Union[str, Path]] = None) -> VerifyReport:
    """在整个语料库上运行全部性质检验"""
    entries = load_corpus(directory or config.corpus)
    suites = [validation_suite(entries)]
    for suite_fn in SUITES:
        result = suite_fn(entries, config)
        logger.info(
            "Suite finished",
            suite=result.name, passed=result.passed, checked=result.checked,
            failures=len(result.failures), documented=len(result.documented),
        )
        suites.append(result)
    return VerifyReport(
        passed=all(s.passed for s in suites),
        instances=len(entries),
        suites=suites,
    )


def call_bound(n: int, q_e: float) -> float:
    """n⁴ (ln n + ln(1 + ln q(e)))"""
    return n ** 4 * (log(n) + log(1.0 + max(0.0, log(q_e))))


def bench(
    sizes: List[int],
    per_size: int = 5,
    seed: int = 0,
    density: float = 0.5,
    config: Optional[RunConfig] = None,
) -> BenchReport:
    """0/1积族上比较极化, 椭球与Sinkhorn的oracle调用次数"""
    config = config or RunConfig(command="bench", seed=seed)
    rows = []
    ratios = []
    all_agree = True
    rngs = derive_rngs(seed, len(sizes))
    for n, rng in zip(sizes, rngs):
        polarization = 0
        ellipsoid: List[int] = []
        sinkhorn: List[int] = []
        agreement = 0
        worst_ratio = 0.0
        for _ in range(per_size):
            matrix = random_zero_one_matrix(n, rng, density)
            truth = brute_matching(matrix)

            oracle = ProductOracle(matrix)
            polarization_mixed_derivative(oracle, workers=config.workers)
            polarization = oracle.call_count

            oracle = ProductOracle(matrix)
            decision = decide_polytope(oracle, delta=config.delta, workers=config.workers)
            ellipsoid.append(decision.oracle_calls)

            oracle = ProductOracle(matrix)
            scaled = sinkhorn_decide(oracle, sinkhorn_c=config.sinkhorn_c, workers=config.workers)
            sinkhorn.append(oracle.call_count)

            agrees = (decision.verdict is Verdict.IN_POLYTOPE) == truth
            agrees = agrees and (scaled.verdict is ScalingVerdict.POSITIVE) == truth
            agreement += int(agrees)

            q_e = float(np.prod(matrix.sum(axis=1)))
            if q_e > 0:
                worst_ratio = max(worst_ratio, decision.oracle_calls / call_bound(n, q_e))

        all_agree = all_agree and agreement == per_size
        ratios.append(worst_ratio)
        rows.append(BenchRow(
            n=n,
            instances=per_size,
            polarization_calls=polarization,
            ellipsoid_calls_mean=float(np.mean(ellipsoid)),
            ellipsoid_calls_max=int(np.max(ellipsoid)),
            sinkhorn_calls_mean=float(np.mean(sinkhorn)),
            sinkhorn_calls_max=int(np.max(sinkhorn)),
            agreement=agreement,
            bound_ratio=worst_ratio,
        ))
        logger.info("Bench size finished", n=n, agreement=agreement, bound_ratio=worst_ratio)
    return BenchReport(rows=rows, fitted_constant=max(ratios, default=0.0), all_agree=all_agree)
