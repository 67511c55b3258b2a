import abc
import cmath
import concurrent.futures
import enum
import math
import sys
from typing import List, NamedTuple, Optional, TextIO, Tuple

import click
import numpy as np

from rootcontinuity.alignment import is_epsilon_aligned
from rootcontinuity.bounds import (
    LOG_FLOAT_MIN,
    DeltaCertificate,
    delta_aligned,
    delta_all_roots,
    delta_zero_root,
    epsilon_inverse,
)
from rootcontinuity.cli import (
    EXIT_CODE_NEGATIVE,
    load_polynomial,
    root_finder_options,
    roots_config,
)
from rootcontinuity.config import (
    ALIGNMENT_SLACK,
    DEFAULT_ESTIMATE_LEVELS,
    DEFAULT_SAFETY,
    DEFAULT_WORKERS,
    ParsedConfig,
    first_not_none,
)
from rootcontinuity.logger import logger
from rootcontinuity.output import (
    CSVFuzzReportOutput,
    JSONFuzzReportOutput,
    dump_json,
)
from rootcontinuity.poly import (
    Polynomial,
    from_roots,
    max_coefficient_deviation,
)
from rootcontinuity.roots import (
    DEFAULT_CLUSTER_TOL,
    ConvergenceError,
    RootClusters,
    RootFinderOptions,
    RootSequence,
    find_clusters,
    find_roots,
)

# The leading coefficient of an inverse-theorem trial is a_n scaled by
# a modulus drawn from this range and a uniform phase.
LEADING_SCALE_RANGE = (0.5, 2.0)

# The estimate reaches the radius cap in at most this many growth steps,
# each at least a doubling.
ESTIMATE_GROWTH_STEPS = 64

HELP_THEOREM = (
    "zero-root -- all roots of a perturbed a_n z^n stay within epsilon of zero; "
    "all-roots -- every root of f has a perturbed root within epsilon; "
    "aligned -- every epsilon-ball keeps exactly its multiplicity; "
    "inverse -- roots moved within epsilon keep the monic coefficients within delta."
)
HELP_SAFETY = (
    "Deformations are drawn at safety * delta_sup. Values >= 1 leave "
    "the certified region."
)
HELP_OUTPUT_FORMAT = (
    "`json` prints the aggregated report, `csv` prints one row per trial "
    "which could be fed to a spreadsheet program."
)


class Theorem(str, enum.Enum):
    ZERO_ROOT = "zero_root"
    ALL_ROOTS = "all_roots"
    ALIGNED = "aligned"
    INVERSE = "inverse"

    @classmethod
    def from_cli(cls, value: str) -> "Theorem":
        return cls(value.replace("-", "_"))


THEOREM_CHOICES = [t.value.replace("_", "-") for t in Theorem]


class TrialOutcome(NamedTuple):
    trial: int
    violation: bool
    # Distance from the conclusion's boundary: epsilon minus the root
    # displacement, or delta minus the coefficient deviation for `inverse`.
    margin: float
    displacement: float
    counts: Optional[Tuple[int, ...]] = None


class FuzzReport(NamedTuple):
    theorem: Theorem
    trials: int
    violations: int
    worst_margin: float
    max_displacement: float
    empirical_delta_sup: Optional[float]
    seed: int
    safety: float
    slack: float
    radius: float
    certificate: DeltaCertificate
    outcomes: Tuple[TrialOutcome, ...] = ()

    @property
    def epsilon(self) -> float:
        return self.certificate.epsilon

    @property
    def delta_sup(self) -> float:
        return self.certificate.delta_sup

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem.value,
            "trials": self.trials,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "max_displacement": self.max_displacement,
            "empirical_delta_sup": self.empirical_delta_sup,
            "seed": self.seed,
            "safety": self.safety,
            "slack": self.slack,
            "epsilon": self.epsilon,
            "delta_sup": self.delta_sup,
            "radius": self.radius,
            "certificate": self.certificate.to_json(),
        }


def sample_disc(rng: np.random.Generator, radius: float, size: int) -> np.ndarray:
    """Uniform points of the complex disc of the given radius."""
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, size))
    theta = rng.uniform(0.0, 2 * math.pi, size)
    return r * np.exp(1j * theta)


def sample_deformation(
    f: Polynomial, delta: float, rng: np.random.Generator
) -> Polynomial:
    """Perturb every coefficient of ``f`` independently within ``delta``."""
    if not (delta > 0):
        raise ValueError("delta must be positive, got %s" % delta)
    a = f.array()
    while True:
        b = a + sample_disc(rng, delta, len(a))
        if b[-1] != 0:
            return Polynomial(b)


class TheoremChecker(abc.ABC):
    """Draws one random instance of a theorem's hypothesis and judges
    its conclusion."""

    theorem: Theorem

    def __init__(
        self,
        f: Polynomial,
        certificate: DeltaCertificate,
        clusters: RootClusters,
        *,
        options: RootFinderOptions,
        slack: float
    ) -> None:
        self.f = f
        self.certificate = certificate
        self.clusters = clusters
        self.options = options
        self.slack = slack

    @property
    def certified_radius(self) -> float:
        """The perturbation radius covered by the certificate."""
        return self.certificate.delta_sup

    @abc.abstractmethod
    def run(self, index: int, rng: np.random.Generator, radius: float) -> TrialOutcome:
        pass


class _CoefficientChecker(TheoremChecker):
    def run(self, index: int, rng: np.random.Generator, radius: float) -> TrialOutcome:
        # Below the smallest normal double no deformation is drawn and
        # trials judge f itself.
        g = self.f if radius == 0 else sample_deformation(self.f, radius, rng)
        return self.judge(index, find_roots(g, self.options))

    @abc.abstractmethod
    def judge(self, index: int, g_roots: RootSequence) -> TrialOutcome:
        pass


class ZeroRootChecker(_CoefficientChecker):
    theorem = Theorem.ZERO_ROOT

    def judge(self, index: int, g_roots: RootSequence) -> TrialOutcome:
        epsilon = self.certificate.epsilon
        displacement = max(abs(omega) for omega in g_roots)
        return TrialOutcome(
            trial=index,
            violation=displacement >= epsilon + self.slack,
            margin=epsilon - displacement,
            displacement=displacement,
        )


class AllRootsChecker(_CoefficientChecker):
    theorem = Theorem.ALL_ROOTS

    def judge(self, index: int, g_roots: RootSequence) -> TrialOutcome:
        epsilon = self.certificate.epsilon
        omegas = np.asarray(g_roots, dtype=np.complex128)
        displacement = max(
            float(np.min(np.abs(omegas - zeta))) for zeta in self.clusters.centers
        )
        return TrialOutcome(
            trial=index,
            violation=displacement >= epsilon + self.slack,
            margin=epsilon - displacement,
            displacement=displacement,
        )


class AlignedChecker(_CoefficientChecker):
    theorem = Theorem.ALIGNED

    def judge(self, index: int, g_roots: RootSequence) -> TrialOutcome:
        epsilon = self.certificate.epsilon
        report = is_epsilon_aligned(self.clusters, g_roots, epsilon, self.slack)
        exact = report.counts == report.multiplicities
        return TrialOutcome(
            trial=index,
            violation=not report.aligned or (report.balls_disjoint and not exact),
            margin=epsilon - report.max_displacement,
            displacement=report.max_displacement,
            counts=report.counts,
        )


class InverseChecker(TheoremChecker):
    theorem = Theorem.INVERSE

    def __init__(self, *args, **kwargs) -> None:
        super().__init__(*args, **kwargs)
        self.f_monic = self.f.monic()
        self.zetas = np.asarray(self.clusters.expanded(), dtype=np.complex128)

    @property
    def certified_radius(self) -> float:
        return self.certificate.epsilon

    def run(self, index: int, rng: np.random.Generator, radius: float) -> TrialOutcome:
        omegas = self.zetas + sample_disc(rng, radius, len(self.zetas))
        modulus = rng.uniform(*LEADING_SCALE_RANGE)
        phase = rng.uniform(0.0, 2 * math.pi)
        g = from_roots(self.f.leading * modulus * cmath.exp(1j * phase), omegas)

        delta = self.certificate.delta_sup
        deviation = max_coefficient_deviation(self.f_monic, g.monic())
        return TrialOutcome(
            trial=index,
            violation=deviation >= delta + self.slack,
            margin=delta - deviation,
            displacement=float(np.max(np.abs(omegas - self.zetas))),
        )


def make_checker(
    f: Polynomial,
    epsilon: float,
    theorem: Theorem,
    *,
    options: RootFinderOptions = RootFinderOptions(),
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    slack: float = ALIGNMENT_SLACK
) -> TheoremChecker:
    """Certify ``f`` for ``theorem`` and wrap the certificate into a checker.

    For ``Theorem.INVERSE`` the ``epsilon`` argument is the coefficient
    tolerance delta the certificate is computed for.
    """
    theorem = Theorem(theorem)
    if not (slack >= 0):
        raise ValueError("slack must be non-negative, got %s" % slack)

    if theorem is Theorem.ZERO_ROOT:
        certificate = delta_zero_root(f, epsilon)
        clusters = find_clusters(f, options, cluster_tol)
        return ZeroRootChecker(f, certificate, clusters, options=options, slack=slack)

    clusters = find_clusters(f, options, cluster_tol)
    if theorem is Theorem.ALL_ROOTS:
        certificate = delta_all_roots(f, epsilon, clusters=clusters)
        return AllRootsChecker(f, certificate, clusters, options=options, slack=slack)
    elif theorem is Theorem.ALIGNED:
        certificate = delta_aligned(f, epsilon, clusters=clusters)
        return AlignedChecker(f, certificate, clusters, options=options, slack=slack)
    elif theorem is Theorem.INVERSE:
        certificate = epsilon_inverse(f, epsilon, clusters=clusters)
        return InverseChecker(f, certificate, clusters, options=options, slack=slack)
    else:
        raise AssertionError("unreachable if all `Theorem` members are handled")


def run_trials(
    checker: TheoremChecker,
    radius: float,
    trials: int,
    seed: int,
    *,
    workers: int = DEFAULT_WORKERS,
    stream: int = 0
) -> Tuple[TrialOutcome, ...]:
    """Run ``trials`` independent trials; trial ``i`` draws from the
    generator seeded with (seed, stream, i), so the outcome does not
    depend on ``workers``."""
    if workers < 1:
        raise ValueError("workers must be positive, got %s" % workers)

    def trial(index: int) -> TrialOutcome:
        rng = np.random.default_rng([seed, stream, index])
        return checker.run(index, rng, radius)

    if workers == 1:
        return tuple(trial(index) for index in range(trials))
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
        return tuple(executor.map(trial, range(trials)))


def fuzz_theorem(
    f: Polynomial,
    epsilon: float,
    theorem: Theorem,
    trials: int,
    seed: int,
    safety: float = DEFAULT_SAFETY,
    *,
    slack: float = ALIGNMENT_SLACK,
    workers: int = DEFAULT_WORKERS,
    options: RootFinderOptions = RootFinderOptions(),
    cluster_tol: float = DEFAULT_CLUSTER_TOL
) -> FuzzReport:
    _validate_run(trials, seed)
    if not (safety > 0):
        raise ValueError("safety must be positive, got %s" % safety)
    if safety >= 1:
        logger.warning(
            "safety %r >= 1: trials are drawn outside of the certified region, "
            "violations are possible",
            safety,
        )

    checker = make_checker(
        f, epsilon, theorem, options=options, cluster_tol=cluster_tol, slack=slack
    )
    radius = safety * checker.certified_radius
    if checker.certificate.underflows:
        logger.warning(
            "delta_sup = exp(%r) underflows, every trial judges the polynomial itself",
            checker.certificate.log_delta_sup,
        )
    outcomes = run_trials(checker, radius, trials, seed, workers=workers)

    report = FuzzReport(
        theorem=checker.theorem,
        trials=trials,
        violations=sum(1 for outcome in outcomes if outcome.violation),
        worst_margin=min(outcome.margin for outcome in outcomes),
        max_displacement=max(outcome.displacement for outcome in outcomes),
        empirical_delta_sup=None,
        seed=seed,
        safety=safety,
        slack=slack,
        radius=radius,
        certificate=checker.certificate,
        outcomes=outcomes,
    )
    logger.info(
        "Fuzzed %s: %s violations in %s trials at radius %r (worst margin %r)",
        report.theorem.value,
        report.violations,
        trials,
        radius,
        report.worst_margin,
    )
    return report


def estimate_empirical_delta(
    f: Polynomial,
    epsilon: float,
    trials_per_level: int,
    seed: int,
    *,
    theorem: Theorem = Theorem.ALIGNED,
    levels: int = DEFAULT_ESTIMATE_LEVELS,
    slack: float = ALIGNMENT_SLACK,
    workers: int = DEFAULT_WORKERS,
    options: RootFinderOptions = RootFinderOptions(),
    cluster_tol: float = DEFAULT_CLUSTER_TOL
) -> float:
    checker = make_checker(
        f, epsilon, theorem, options=options, cluster_tol=cluster_tol, slack=slack
    )
    return estimate_with_checker(
        checker, trials_per_level, seed, levels=levels, workers=workers
    )


def estimate_with_checker(
    checker: TheoremChecker,
    trials_per_level: int,
    seed: int,
    *,
    levels: int = DEFAULT_ESTIMATE_LEVELS,
    workers: int = DEFAULT_WORKERS
) -> float:
    """The largest radius found without violations in ``trials_per_level``
    trials: growing from delta_sup until a violation shows up, then
    ``levels`` bisection steps.

    The radius grows by doubling, or faster when delta_sup is so small
    that doubling would not reach the cap in ``ESTIMATE_GROWTH_STEPS``
    steps; the search runs on log(radius) for that reason. The radius
    never exceeds abs(a_n) / 2 so that deformations keep the degree.
    """
    if checker.theorem is Theorem.INVERSE:
        raise ValueError(
            "The empirical delta is defined for coefficient deformations, "
            "not for the inverse theorem"
        )
    _validate_run(trials_per_level, seed)
    if levels < 1:
        raise ValueError("levels must be positive, got %s" % levels)

    certified = checker.certificate.delta_sup
    log_certified = checker.certificate.log_delta_sup
    log_cap = math.log(abs(checker.f.leading) / 2)
    step = max(math.log(2), (log_cap - log_certified) / ESTIMATE_GROWTH_STEPS)
    streams: List[int] = []

    def violated(log_radius: float) -> bool:
        radius = _radius(log_radius)
        # Stream 0 belongs to `fuzz_theorem`.
        streams.append(len(streams) + 1)
        try:
            outcomes = run_trials(
                checker,
                radius,
                trials_per_level,
                seed,
                workers=workers,
                stream=streams[-1],
            )
        except ConvergenceError as e:
            logger.warning("Treating radius %r as violated: %s", radius, e)
            return True
        return any(outcome.violation for outcome in outcomes)

    lo = log_certified
    hi: Optional[float] = None
    candidate = min(lo + step, log_cap)
    while candidate > lo:
        if violated(candidate):
            hi = candidate
            break
        lo = candidate
        candidate = min(candidate + step, log_cap)

    if hi is None:
        logger.info("No violations up to the radius cap %r", _radius(log_cap))
    else:
        for _ in range(levels):
            mid = (lo + hi) / 2
            if violated(mid):
                hi = mid
            else:
                lo = mid

    empirical = certified if lo == log_certified else _radius(lo)
    assert empirical >= certified
    logger.info(
        "Empirical delta for %s: exp(%r) (certified exp(%r))",
        checker.theorem.value,
        lo,
        log_certified,
    )
    return empirical


def _radius(log_radius: float) -> float:
    return math.exp(log_radius) if log_radius >= LOG_FLOAT_MIN else 0.0


def _validate_run(trials: int, seed: int) -> None:
    if trials <= 0:
        raise ValueError("trials must be positive, got %s" % trials)
    if seed < 0:
        raise ValueError("seed must be non-negative, got %s" % seed)


def _pick_tolerance(
    theorem: Theorem, epsilon: Optional[float], delta: Optional[float]
) -> float:
    if delta is not None and theorem is not Theorem.INVERSE:
        raise click.UsageError("--delta is accepted for the inverse theorem only")
    if epsilon is not None and delta is not None:
        raise click.UsageError("--epsilon and --delta are mutually exclusive")
    tolerance = first_not_none(delta, epsilon)
    if tolerance is None:
        raise click.UsageError("Missing option '--epsilon'")
    return tolerance


@click.command("fuzz")
@click.argument("poly", type=click.File("r"))
@click.option(
    "--epsilon",
    type=float,
    help="Root tolerance; the coefficient tolerance for the inverse theorem",
)
@click.option("--delta", type=float, help="Coefficient tolerance (inverse theorem)")
@click.option(
    "--theorem",
    required=True,
    type=click.Choice(THEOREM_CHOICES),
    help=HELP_THEOREM,
)
@click.option("--trials", required=True, type=int, help="Number of random trials")
@click.option("--seed", required=True, type=int, help="Seed of the trial streams")
@click.option("--safety", type=float, help=HELP_SAFETY)
@click.option("--slack", type=float, help="Allowance for root-finder error")
@click.option("--workers", type=int, help="Number of threads running trials")
@click.option(
    "-f",
    "--output-format",
    default="json",
    type=click.Choice(["json", "csv"]),
    show_default=True,
    help=HELP_OUTPUT_FORMAT,
)
@click.option(
    "--estimate", is_flag=True, help="Also estimate the largest violation-free delta"
)
@click.option("--levels", type=int, help="Bisection steps of the estimate")
@root_finder_options(seed_flag="--root-seed")
@click.pass_obj
def fuzz(
    obj: Optional[ParsedConfig],
    *,
    poly: TextIO,
    epsilon: Optional[float],
    delta: Optional[float],
    theorem: str,
    trials: int,
    seed: int,
    safety: Optional[float],
    slack: Optional[float],
    workers: Optional[int],
    output_format: str,
    estimate: bool,
    levels: Optional[int],
    tol: Optional[float],
    max_iter: Optional[int],
    root_seed: Optional[int],
    cluster_tol: Optional[float]
) -> None:
    """Check a theorem's certificate for POLY on random deformations.

    Exits with 1 when any trial violates the theorem's conclusion.
    """
    config = obj if obj is not None else ParsedConfig()
    roots = roots_config(
        obj, tol=tol, max_iter=max_iter, root_seed=root_seed, cluster_tol=cluster_tol
    )
    theorem_value = Theorem.from_cli(theorem)
    tolerance = _pick_tolerance(theorem_value, epsilon, delta)
    slack = first_not_none(slack, config.fuzz.slack)
    workers = first_not_none(workers, config.fuzz.workers)

    f = load_polynomial(poly)
    report = fuzz_theorem(
        f,
        tolerance,
        theorem_value,
        trials,
        seed,
        first_not_none(safety, config.fuzz.safety),
        slack=slack,
        workers=workers,
        options=roots.finder_options(),
        cluster_tol=roots.cluster_tol,
    )
    if estimate:
        report = report._replace(
            empirical_delta_sup=estimate_empirical_delta(
                f,
                tolerance,
                trials,
                seed,
                theorem=theorem_value,
                levels=first_not_none(levels, config.fuzz.estimate_levels),
                slack=slack,
                workers=workers,
                options=roots.finder_options(),
                cluster_tol=roots.cluster_tol,
            )
        )

    output = {"json": JSONFuzzReportOutput(), "csv": CSVFuzzReportOutput()}[
        output_format
    ]
    click.echo(output.render(report))
    if report.violations:
        sys.exit(EXIT_CODE_NEGATIVE)


@click.command("estimate")
@click.argument("poly", type=click.File("r"))
@click.option("--epsilon", required=True, type=float, help="Root tolerance")
@click.option("--trials", required=True, type=int, help="Trials per radius")
@click.option("--seed", required=True, type=int, help="Seed of the trial streams")
@click.option(
    "--theorem",
    default="aligned",
    show_default=True,
    type=click.Choice([c for c in THEOREM_CHOICES if c != "inverse"]),
    help=HELP_THEOREM,
)
@click.option("--levels", type=int, help="Bisection steps")
@click.option("--slack", type=float, help="Allowance for root-finder error")
@click.option("--workers", type=int, help="Number of threads running trials")
@root_finder_options(seed_flag="--root-seed")
@click.pass_obj
def estimate(
    obj: Optional[ParsedConfig],
    *,
    poly: TextIO,
    epsilon: float,
    trials: int,
    seed: int,
    theorem: str,
    levels: Optional[int],
    slack: Optional[float],
    workers: Optional[int],
    tol: Optional[float],
    max_iter: Optional[int],
    root_seed: Optional[int],
    cluster_tol: Optional[float]
) -> None:
    """Search the largest delta without observed violations and compare it
    with the certified one."""
    config = obj if obj is not None else ParsedConfig()
    roots = roots_config(
        obj, tol=tol, max_iter=max_iter, root_seed=root_seed, cluster_tol=cluster_tol
    )
    checker = make_checker(
        load_polynomial(poly),
        epsilon,
        Theorem.from_cli(theorem),
        options=roots.finder_options(),
        cluster_tol=roots.cluster_tol,
        slack=first_not_none(slack, config.fuzz.slack),
    )
    empirical = estimate_with_checker(
        checker,
        trials,
        seed,
        levels=first_not_none(levels, config.fuzz.estimate_levels),
        workers=first_not_none(workers, config.fuzz.workers),
    )
    certified = checker.certificate.delta_sup
    click.echo(
        dump_json(
            {
                "theorem": checker.theorem.value,
                "epsilon": checker.certificate.epsilon,
                "delta_sup": certified,
                "log_delta_sup": checker.certificate.log_delta_sup,
                "empirical_delta_sup": empirical,
                # null when delta_sup underflows
                "ratio": empirical / certified if certified > 0 else None,
            }
        )
    )
