import enum
import math
import sys
from typing import Any, NamedTuple, Optional, Sequence, Tuple

from rootcontinuity.alignment import is_epsilon_aligned
from rootcontinuity.logger import logger
from rootcontinuity.poly import (
    Polynomial,
    Scalar,
    as_scalar,
    deflate,
    require_same_degree,
    scalar_to_json,
)
from rootcontinuity.roots import (
    DEFAULT_CLUSTER_TOL,
    RootClusters,
    RootFinderOptions,
    find_clusters,
    find_roots,
    separation,
)

# The zero-root bound needs 0 < epsilon < 1; larger requests are lowered to this.
ZERO_ROOT_EPSILON_CAP = 0.5

# kappa is bisected on log(kappa), the result is lowered by this many nats
# so that rounding of exp() cannot push it past the lambda constraint.
KAPPA_BISECTION_STEPS = 100
KAPPA_LOG_MARGIN = 1e-10

# Bounds below the smallest normal double are reported as 0.0; their
# logarithm is kept in the `log_*` fields.
LOG_FLOAT_MIN = math.log(sys.float_info.min)


class Method(str, enum.Enum):
    ZERO_ROOT = "zero_root"
    ALL_ROOTS = "all_roots"
    INDUCTIVE = "inductive"
    INVERSE = "inverse"


class TraceLevel(NamedTuple):
    deflated_degree: int
    zeta: Scalar
    kappa: float
    lam: Optional[float]  # None when the deflated polynomial is a constant
    delta_1: float
    epsilon: float
    log_kappa: float
    log_lam: Optional[float]
    log_delta_1: float

    def to_json(self) -> dict:
        return {
            "deflated_degree": self.deflated_degree,
            "zeta": scalar_to_json(self.zeta),
            "kappa": self.kappa,
            "lambda": self.lam,
            "delta_1": self.delta_1,
            "epsilon": self.epsilon,
            "log_kappa": self.log_kappa,
            "log_lambda": self.log_lam,
            "log_delta_1": self.log_delta_1,
        }


class DeltaCertificate(NamedTuple):
    """Any δ-deformation with δ < delta_sup satisfies the conclusion of
    ``method`` at radius ``epsilon``. For ``Method.INVERSE`` the roles flip:
    ε-alignment at ``epsilon`` gives a ``delta_sup``-deformation of the
    monic normalizations.

    ``log_delta_sup`` is the natural logarithm of the bound and is always
    finite. Inductive certificates of higher degrees fall far below the
    smallest normal double; ``delta_sup`` is 0.0 for them.
    """

    epsilon: float
    delta_sup: float
    log_delta_sup: float
    method: Method
    trace: Tuple[TraceLevel, ...] = ()
    requested_epsilon: Optional[float] = None
    lipschitz: Tuple[float, ...] = ()

    @property
    def underflows(self) -> bool:
        return self.delta_sup == 0.0

    def to_json(self) -> dict:
        return {
            "method": self.method.value,
            "epsilon": self.epsilon,
            "requested_epsilon": self.requested_epsilon,
            "delta_sup": self.delta_sup,
            "log_delta_sup": self.log_delta_sup,
            "trace": [level.to_json() for level in self.trace],
            "lipschitz": list(self.lipschitz),
        }


def delta_zero_root(f: Polynomial, epsilon: float) -> DeltaCertificate:
    _require_bound_degree(f)
    if not f.is_pure_power():
        raise ValueError(
            "The zero-root bound applies to a_n z^n only, got coefficients %r"
            % (list(f.coeffs),)
        )
    if not (0 < epsilon < 1):
        raise ValueError("The zero-root bound needs 0 < epsilon < 1, got %s" % epsilon)
    n = f.degree
    return DeltaCertificate(
        epsilon=epsilon,
        delta_sup=_normal_or_zero(epsilon**n * abs(f.leading) / (2 * n)),
        log_delta_sup=n * math.log(epsilon) + math.log(abs(f.leading) / (2 * n)),
        method=Method.ZERO_ROOT,
        requested_epsilon=epsilon,
    )


def delta_all_roots(
    f: Polynomial,
    epsilon: float,
    *,
    options: RootFinderOptions = RootFinderOptions(),
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    clusters: Optional[RootClusters] = None,
) -> DeltaCertificate:
    _require_bound_degree(f)
    if clusters is None:
        clusters = find_clusters(f, options, cluster_tol)
    bound_m = max(1.0, clusters.max_modulus())
    if not (0 < epsilon < bound_m):
        raise ValueError(
            "The all-roots bound needs 0 < epsilon < M = %r, got %s"
            % (bound_m, epsilon)
        )
    delta_sup, log_delta_sup = _all_roots_bound(f, epsilon, math.log(epsilon), bound_m)
    return DeltaCertificate(
        epsilon=epsilon,
        delta_sup=delta_sup,
        log_delta_sup=log_delta_sup,
        method=Method.ALL_ROOTS,
        requested_epsilon=epsilon,
    )


def _all_roots_bound(
    f: Polynomial, epsilon: float, log_epsilon: float, bound_m: float
) -> Tuple[float, float]:
    """abs(a_n) / (2 (n + 1)) * (epsilon / M)^n and its logarithm.
    ``epsilon`` might have underflowed to 0.0, ``log_epsilon`` is exact."""
    n = f.degree
    scale = abs(f.leading) / (2 * (n + 1))
    delta = _normal_or_zero(scale * (epsilon / bound_m) ** n)
    return delta, math.log(scale) + n * (log_epsilon - math.log(bound_m))


def deflation_sensitivity(f: Polynomial, zeta: Any, kappa: float) -> float:
    """Upper bound B(κ) on max_i abs(φ_i(b, v) - φ_i(a, ζ)) over the box
    abs(b_k - a_k) < κ, abs(v - ζ) < κ, valid for 0 < κ < abs(ζ)."""
    r = abs(as_scalar(zeta))
    if not (0 < kappa < r):
        raise ValueError("kappa must be within (0;%r), got %s" % (r, kappa))
    return kappa * _sensitivity_slope(f, r, kappa)


def _sensitivity_slope(f: Polynomial, r: float, kappa: float) -> float:
    """B(κ) / κ, increasing in κ; defined down to κ = 0."""
    abs_a = [abs(a) for a in f.coeffs]
    near = r - kappa  # lower bound on abs(v)
    far = r + kappa  # upper bound on abs(v)
    worst = 0.0
    for i in range(f.degree):
        total = 0.0
        for k in range(i + 1):
            m = i + 1 - k
            # abs(u_k - a_k) * abs(v)^-m
            total += 1 / near**m
            # abs(a_k) * abs(v^-m - ζ^-m)
            total += abs_a[k] * m * far ** (m - 1) / (near**m * r**m)
        worst = max(worst, total)
    return worst


def kappa_deflation(f: Polynomial, zeta: Any, lam: float) -> float:
    _require_bound_degree(f)
    zeta = as_scalar(zeta)
    if zeta == 0:
        raise ValueError("kappa_deflation needs a nonzero root")
    if not (lam > 0):
        raise ValueError("lambda must be positive, got %s" % lam)
    kappa, _ = _kappa_deflation(f, zeta, math.log(lam))
    return kappa


def _kappa_deflation(
    f: Polynomial, zeta: Scalar, log_lam: float
) -> Tuple[float, float]:
    """The largest κ <= abs(ζ) / 2 with B(κ) <= λ, as (κ, log κ)."""
    r = abs(zeta)
    cap = r / 2
    log_cap = math.log(cap)
    log_slope_cap = math.log(_sensitivity_slope(f, r, cap))
    if log_cap + log_slope_cap <= log_lam:
        return cap, log_cap

    # B(κ) = κ h(κ) with h increasing, so κ = λ / h(cap) satisfies the bound.
    lo, hi = log_lam - log_slope_cap, log_cap
    for _ in range(KAPPA_BISECTION_STEPS):
        mid = (lo + hi) / 2
        if mid + math.log(_sensitivity_slope(f, r, _to_float(mid))) <= log_lam:
            lo = mid
        else:
            hi = mid
    log_kappa = lo - KAPPA_LOG_MARGIN
    logger.debug("log kappa(%r, log lambda=%r) = %r", zeta, log_lam, log_kappa)
    return _to_float(log_kappa), log_kappa


def clamp_epsilon(clusters: RootClusters, epsilon: float) -> float:
    clamped = epsilon
    if len(clusters.clusters) >= 2:
        clamped = min(clamped, separation(clusters) / 2)
    nonzero = clusters.nonzero()
    if nonzero:
        clamped = min(clamped, min(abs(c.center) for c in nonzero))
    elif clamped >= 1:
        clamped = ZERO_ROOT_EPSILON_CAP
    return clamped


def delta_aligned(
    f: Polynomial,
    epsilon: float,
    *,
    options: RootFinderOptions = RootFinderOptions(),
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    clusters: Optional[RootClusters] = None,
) -> DeltaCertificate:
    _require_bound_degree(f)
    if not (epsilon > 0):
        raise ValueError("epsilon must be positive, got %s" % epsilon)
    if clusters is None:
        clusters = find_clusters(f, options, cluster_tol)
    if clusters.degree != f.degree:
        raise ValueError(
            "Clusters hold %s roots, the polynomial has degree %s"
            % (clusters.degree, f.degree)
        )

    certificate = _delta_aligned(f, clusters, epsilon)
    if certificate.epsilon < epsilon:
        logger.info(
            "epsilon %r has been clamped to %r for the root layout",
            epsilon,
            certificate.epsilon,
        )
    if certificate.underflows:
        logger.info(
            "delta_sup = exp(%r) is below the smallest normal double",
            certificate.log_delta_sup,
        )
    return certificate._replace(requested_epsilon=epsilon)


def _delta_aligned(
    f: Polynomial, clusters: RootClusters, epsilon: float
) -> DeltaCertificate:
    epsilon = clamp_epsilon(clusters, epsilon)
    nonzero = clusters.nonzero()
    if not nonzero:
        # Only the zero root remains: f is a_k z^k up to deflation noise.
        return delta_zero_root(Polynomial.monomial(f.leading, f.degree), epsilon)

    zeta = max(
        nonzero, key=lambda c: (abs(c.center), c.center.real, c.center.imag)
    ).center

    lam: Optional[float]
    log_lam: Optional[float]
    if f.degree == 1:
        lam = log_lam = None
        kappa = min(abs(zeta) / 2, epsilon)
        log_kappa = math.log(kappa)
        deeper: Tuple[TraceLevel, ...] = ()
    else:
        inner = _delta_aligned(deflate(f, zeta), clusters.remove_one(zeta), epsilon)
        lam, log_lam = inner.delta_sup, inner.log_delta_sup
        kappa, log_kappa = _kappa_deflation(f, zeta, log_lam)
        if kappa >= epsilon:
            kappa, log_kappa = epsilon, math.log(epsilon)
        deeper = inner.trace

    bound_m = max(1.0, clusters.max_modulus())
    delta_1, log_delta_1 = _all_roots_bound(f, kappa, log_kappa, bound_m)
    level = TraceLevel(
        deflated_degree=f.degree - 1,
        zeta=zeta,
        kappa=kappa,
        lam=lam,
        delta_1=delta_1,
        epsilon=epsilon,
        log_kappa=log_kappa,
        log_lam=log_lam,
        log_delta_1=log_delta_1,
    )
    logger.debug("delta_aligned level: %s", level)
    return DeltaCertificate(
        epsilon=epsilon,
        delta_sup=min(kappa, delta_1),
        log_delta_sup=min(log_kappa, log_delta_1),
        method=Method.INDUCTIVE,
        trace=(level,) + deeper,
    )


def lipschitz_constants(n: int, radius: float) -> Tuple[float, ...]:
    """L_k = C(n, k) * k * (radius + 1)^(k - 1), k = 1..n: the max-norm
    Lipschitz constants of σ_k on the polydisc of radius ``radius + 1``."""
    return tuple(
        float(math.comb(n, k) * k * (radius + 1) ** (k - 1)) for k in range(1, n + 1)
    )


def epsilon_inverse(
    f: Polynomial,
    delta: float,
    *,
    options: RootFinderOptions = RootFinderOptions(),
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    clusters: Optional[RootClusters] = None,
) -> DeltaCertificate:
    _require_bound_degree(f)
    if not (delta > 0):
        raise ValueError("delta must be positive, got %s" % delta)
    if clusters is None:
        clusters = find_clusters(f, options, cluster_tol)

    lipschitz = lipschitz_constants(f.degree, clusters.max_modulus())
    epsilon = min(1.0, delta / max(lipschitz))
    if len(clusters.clusters) >= 2:
        # Disjoint balls turn alignment into a root-by-root matching.
        epsilon = min(epsilon, separation(clusters) / 2)
    return DeltaCertificate(
        epsilon=epsilon,
        delta_sup=delta,
        log_delta_sup=math.log(delta),
        method=Method.INVERSE,
        lipschitz=lipschitz,
    )


def proportional_iff_always_aligned_check(
    f: Polynomial,
    g: Polynomial,
    epsilon_ladder: Sequence[float],
    *,
    options: RootFinderOptions = RootFinderOptions(),
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    slack: float = 0.0,
) -> bool:
    require_same_degree(f, g)
    _require_bound_degree(f)
    ladder = list(epsilon_ladder)
    if not ladder:
        raise ValueError("The epsilon ladder must not be empty")
    if not all(eps > 0 for eps in ladder):
        raise ValueError("The epsilon ladder must be positive, got %r" % ladder)
    if not all(a > b for a, b in zip(ladder, ladder[1:])):
        raise ValueError("The epsilon ladder must strictly decrease, got %r" % ladder)

    f_clusters = find_clusters(f, options, cluster_tol)
    g_roots = find_roots(g, options)
    for epsilon in ladder:
        if not is_epsilon_aligned(f_clusters, g_roots, epsilon, slack).aligned:
            logger.debug("Alignment fails at epsilon = %r", epsilon)
            return False
    return True


def _require_bound_degree(f: Polynomial) -> None:
    if f.degree < 1:
        raise ValueError("Bounds need a polynomial of degree >= 1, got %s" % f.degree)


def _normal_or_zero(value: float) -> float:
    return value if value >= sys.float_info.min else 0.0


def _to_float(log_value: float) -> float:
    return math.exp(log_value) if log_value >= LOG_FLOAT_MIN else 0.0
