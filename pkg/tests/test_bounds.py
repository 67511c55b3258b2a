import math
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rootcontinuity.bounds import (
    Method,
    clamp_epsilon,
    deflation_sensitivity,
    delta_aligned,
    delta_all_roots,
    delta_zero_root,
    epsilon_inverse,
    kappa_deflation,
    lipschitz_constants,
    proportional_iff_always_aligned_check,
)
from rootcontinuity.fuzz import sample_disc
from rootcontinuity.poly import (
    Polynomial,
    deflation_map,
    from_roots,
    is_scalar_multiple,
    max_coefficient_deviation,
)
from rootcontinuity.roots import RootCluster, RootClusters, find_clusters, separation
from tests.conftest import poly, random_roots


@pytest.mark.parametrize(
    "f, epsilon, expected",
    [
        (poly(0, 0, 1), 0.5, 0.0625),
        (Polynomial.monomial(3, 3), 0.1, 5e-4),
        (Polynomial.monomial(-2j, 1), 0.9, 0.9),
    ],
)
def test_delta_zero_root(f, epsilon, expected):
    certificate = delta_zero_root(f, epsilon)
    assert certificate.delta_sup == pytest.approx(expected, rel=1e-15)
    assert certificate.epsilon == epsilon
    assert certificate.method is Method.ZERO_ROOT
    assert certificate.trace == ()


def test_delta_zero_root_exact_plug_in():
    assert delta_zero_root(poly(0, 0, 1), 0.5).delta_sup == 0.0625


@pytest.mark.parametrize(
    "f, epsilon",
    [
        (poly(1, 0, 1), 0.5),
        (poly(0, 0, 1), 1.0),
        (poly(0, 0, 1), 0),
        (poly(3), 0.5),
    ],
)
def test_delta_zero_root_errors(f, epsilon):
    with pytest.raises(ValueError):
        delta_zero_root(f, epsilon)


def test_delta_all_roots():
    certificate = delta_all_roots(poly(-1, 0, 1), 0.1)
    assert certificate.delta_sup == pytest.approx(1 / 600, rel=1e-15)
    assert certificate.method is Method.ALL_ROOTS

    assert delta_all_roots(poly(-1, 1), 0.1).delta_sup == pytest.approx(0.025)

    # M = max(1, abs(roots)) = 4
    certificate = delta_all_roots(from_roots(2, [4, 1j]), 1.0)
    assert certificate.delta_sup == pytest.approx(2 / 6 * (1 / 4) ** 2, rel=1e-12)


def test_delta_all_roots_errors():
    with pytest.raises(ValueError):
        delta_all_roots(poly(-1, 0, 1), 1.5)
    with pytest.raises(ValueError):
        delta_all_roots(poly(-1, 0, 1), 0)


@settings(deadline=None, max_examples=100)
@given(
    st.integers(min_value=1, max_value=8),
    st.floats(min_value=0.01, max_value=0.98),
    st.floats(min_value=0.1, max_value=10),
)
def test_delta_zero_root_monotone_and_homogeneous(n, epsilon, leading):
    f = Polynomial.monomial(leading, n)
    delta = delta_zero_root(f, epsilon).delta_sup
    assert delta_zero_root(f, epsilon + 0.01).delta_sup > delta
    doubled = delta_zero_root(Polynomial.monomial(2 * leading, n), epsilon).delta_sup
    assert doubled == pytest.approx(2 * delta, rel=1e-14)


@pytest.mark.parametrize("seed", range(10))
def test_delta_all_roots_monotone_and_homogeneous(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    roots = random_roots(rng, n, radius=2.0, min_separation=0.2)
    f = from_roots(1, roots)
    g = f.scale(3j)
    clusters = find_clusters(f)
    epsilons = sorted(rng.uniform(0.01, 0.99, 5))
    deltas = [delta_all_roots(f, eps, clusters=clusters).delta_sup for eps in epsilons]
    assert deltas == sorted(deltas)
    for eps, delta in zip(epsilons, deltas):
        assert delta_all_roots(g, eps, clusters=clusters).delta_sup == pytest.approx(
            3 * delta, rel=1e-12
        )


def test_kappa_deflation_linear():
    kappa = kappa_deflation(poly(-1, 1), 1, 0.1)
    assert 0.025 <= kappa <= 0.5
    # B(kappa) = 2 kappa / (1 - kappa) for z - 1 at 1
    assert kappa == pytest.approx(0.1 / 2.1, rel=1e-9)
    assert deflation_sensitivity(poly(-1, 1), 1, kappa) <= 0.1


def test_kappa_deflation_cap():
    assert kappa_deflation(poly(-1, 1), 1, 1e6) == 0.5
    assert kappa_deflation(poly(4, 0, 1), 2j, 1e9) == 1.0


def test_kappa_deflation_errors():
    with pytest.raises(ValueError):
        kappa_deflation(poly(0, 1), 0, 0.1)
    with pytest.raises(ValueError):
        kappa_deflation(poly(-1, 1), 1, 0)
    with pytest.raises(ValueError):
        deflation_sensitivity(poly(-1, 1), 1, 1.0)


@pytest.mark.parametrize("seed", range(20))
def test_kappa_deflation_box_keeps_lambda(seed):
    rng = np.random.default_rng(seed)
    roots = random_roots(rng, 3, radius=2.0, min_modulus=0.3, min_separation=0.0)
    f = from_roots(complex(rng.uniform(0.5, 2.0)), roots)
    zeta = roots[0]
    lam = float(rng.uniform(0.01, 1.0))
    kappa = kappa_deflation(f, zeta, lam)
    assert 0 < kappa <= abs(zeta) / 2

    reference = deflation_map(f.coeffs, zeta)
    a = f.array()
    for _ in range(1000):
        b = a + sample_disc(rng, 0.999 * kappa, len(a))
        v = zeta + complex(sample_disc(rng, 0.999 * kappa, 1)[0])
        deflated = deflation_map(list(b), v)
        assert max(abs(x - y) for x, y in zip(deflated, reference)) < lam


def test_kappa_deflation_tiny_lambda():
    kappa = kappa_deflation(poly(-1, 1), 1, 1e-80)
    assert kappa == pytest.approx(5e-81, rel=1e-9)
    assert deflation_sensitivity(poly(-1, 1), 1, kappa) <= 1e-80


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("lam", [1e-80, 1e-200])
def test_kappa_deflation_tiny_lambda_random(seed, lam):
    rng = np.random.default_rng(seed)
    roots = random_roots(rng, 3, radius=2.0, min_modulus=0.3, min_separation=0.0)
    f = from_roots(complex(rng.uniform(0.5, 2.0)), roots)
    kappa = kappa_deflation(f, roots[0], lam)
    assert 0 < kappa <= abs(roots[0]) / 2
    assert deflation_sensitivity(f, roots[0], kappa) <= lam


def test_clamp_epsilon():
    pair = RootClusters((RootCluster(-1, 1), RootCluster(1, 1)))
    assert clamp_epsilon(pair, 5) == 1.0
    assert clamp_epsilon(pair, 0.3) == 0.3

    zero = RootClusters((RootCluster(0j, 2),))
    assert clamp_epsilon(zero, 2) == 0.5
    assert clamp_epsilon(zero, 0.3) == 0.3

    mixed = RootClusters((RootCluster(0j, 1), RootCluster(3, 1)))
    assert clamp_epsilon(mixed, 10) == 1.5


def test_delta_aligned_linear():
    certificate = delta_aligned(poly(-1, 1), 0.1)
    assert certificate.method is Method.INDUCTIVE
    assert certificate.delta_sup == pytest.approx(0.025)
    assert certificate.delta_sup <= 0.025
    assert len(certificate.trace) == 1
    level = certificate.trace[0]
    assert level.lam is None
    assert level.kappa == 0.1
    assert level.deflated_degree == 0
    assert certificate.to_json()["trace"][0]["lambda"] is None


def test_delta_aligned_two_roots():
    certificate = delta_aligned(poly(-1, 0, 1), 0.1)
    assert certificate.method is Method.INDUCTIVE
    assert certificate.epsilon == pytest.approx(0.1)
    assert certificate.requested_epsilon == 0.1
    assert 0 < certificate.delta_sup <= 1 / 600 * (1 + 1e-12)
    assert len(certificate.trace) == 2
    assert abs(abs(certificate.trace[0].zeta) - 1) < 1e-12
    assert [level.deflated_degree for level in certificate.trace] == [1, 0]
    for level in certificate.trace:
        assert level.kappa <= level.epsilon
    # The inner certificate is the constraint of the outer level.
    inner = certificate.trace[1]
    assert certificate.trace[0].lam == pytest.approx(min(inner.kappa, inner.delta_1))


def test_delta_aligned_pure_power_delegates():
    f = Polynomial.monomial(2, 3)
    certificate = delta_aligned(f, 0.5)
    assert certificate.method is Method.ZERO_ROOT
    assert certificate.delta_sup == delta_zero_root(f, 0.5).delta_sup

    lowered = delta_aligned(poly(0, 0, 1), 2)
    assert lowered.epsilon == 0.5
    assert lowered.requested_epsilon == 2
    assert lowered.delta_sup == 0.0625


def test_delta_aligned_mixed_zero_roots():
    f = poly(0, 0, -1, 1)  # z^2 (z - 1)
    certificate = delta_aligned(f, 0.3)
    assert certificate.method is Method.INDUCTIVE
    assert len(certificate.trace) == 1
    assert certificate.trace[0].lam == pytest.approx(0.3**2 / 4)
    assert certificate.delta_sup > 0


def test_delta_aligned_clamps_epsilon():
    certificate = delta_aligned(poly(-1, 0, 1), 5)
    assert certificate.epsilon == pytest.approx(1.0)
    assert certificate.requested_epsilon == 5


def test_delta_aligned_trace_counts_nonzero_roots():
    f = from_roots(1, [0, 0.5, -1.5j, 1 + 1j])
    certificate = delta_aligned(f, 0.2)
    assert len(certificate.trace) == 3
    assert [level.deflated_degree for level in certificate.trace] == [3, 2, 1]
    assert all(level.kappa <= level.epsilon for level in certificate.trace)


def test_delta_aligned_triple_root():
    f = from_roots(1, [0.5, 0.5, 0.5, -1])
    certificate = delta_aligned(f, 0.2, cluster_tol=1e-3)
    assert certificate.method is Method.INDUCTIVE
    assert len(certificate.trace) == 4
    assert math.isfinite(certificate.log_delta_sup)
    assert certificate.delta_sup >= 0
    assert all(level.kappa <= level.epsilon for level in certificate.trace)


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("n", [5, 6])
def test_delta_aligned_high_degree(n, seed):
    rng = np.random.default_rng(seed)
    roots = random_roots(rng, n, radius=2.0, min_modulus=0.2, min_separation=0.2)
    f = from_roots(complex(rng.uniform(0.5, 2.0)), roots)
    clusters = find_clusters(f)
    epsilon = 0.4 * separation(clusters)
    certificate = delta_aligned(f, epsilon, clusters=clusters)

    assert certificate.method is Method.INDUCTIVE
    assert len(certificate.trace) == n
    assert math.isfinite(certificate.log_delta_sup)
    assert certificate.delta_sup >= 0
    top = certificate.trace[0]
    assert certificate.log_delta_sup == min(top.log_kappa, top.log_delta_1)
    for outer, inner in zip(certificate.trace, certificate.trace[1:]):
        assert outer.log_lam == min(inner.log_kappa, inner.log_delta_1)
        assert outer.log_kappa <= math.log(outer.epsilon)
    assert certificate.trace[-1].log_lam is None


def test_delta_aligned_below_smallest_double():
    certificate = delta_aligned(poly(-1, 0, 0, 0, 0, 0, 1), 0.1)
    assert certificate.underflows
    assert certificate.delta_sup == 0.0
    assert math.isfinite(certificate.log_delta_sup)
    assert certificate.log_delta_sup < math.log(sys.float_info.min)
    data = certificate.to_json()
    assert data["log_delta_sup"] == certificate.log_delta_sup
    assert data["trace"][0]["log_lambda"] == certificate.trace[0].log_lam


def test_delta_aligned_is_deterministic():
    f = from_roots(1, [1, -0.5, 2j])
    assert delta_aligned(f, 0.2) == delta_aligned(f, 0.2)


def test_delta_aligned_errors():
    with pytest.raises(ValueError):
        delta_aligned(poly(-1, 0, 1), 0)
    with pytest.raises(ValueError):
        delta_aligned(
            poly(-1, 0, 1), 0.1, clusters=RootClusters((RootCluster(1, 1),))
        )
    with pytest.raises(ValueError):
        delta_aligned(poly(2), 0.1)


def test_lipschitz_constants():
    assert lipschitz_constants(3, 1.0) == (3.0, 12.0, 12.0)
    assert lipschitz_constants(1, 7.0) == (1.0,)


def test_epsilon_inverse():
    certificate = epsilon_inverse(poly(-1, 0, 1), 0.1)
    assert certificate.method is Method.INVERSE
    assert certificate.delta_sup == 0.1
    assert certificate.lipschitz == pytest.approx((2.0, 4.0))
    assert certificate.epsilon == pytest.approx(0.025)

    assert epsilon_inverse(poly(-2, 1), 0.3).epsilon == 0.3
    assert epsilon_inverse(poly(-2, 1), 5).epsilon == 1.0

    with pytest.raises(ValueError):
        epsilon_inverse(poly(-2, 1), 0)


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("delta", [0.05, 0.1])
def test_epsilon_inverse_root_perturbations(seed, delta):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    roots = random_roots(rng, n, radius=2.0, min_separation=0.2)
    f = from_roots(complex(rng.uniform(0.5, 2.0)), roots)
    clusters = find_clusters(f)
    epsilon = epsilon_inverse(f, delta, clusters=clusters).epsilon
    zetas = np.asarray(clusters.expanded())

    for _ in range(500):
        omegas = zetas + sample_disc(rng, 0.999 * epsilon, n)
        leading = f.leading * rng.uniform(0.5, 2.0) * np.exp(2j * np.pi * rng.uniform())
        g = from_roots(leading, omegas)
        assert max_coefficient_deviation(f.monic(), g.monic()) < delta


def test_epsilon_inverse_zero_perturbation():
    f = from_roots(3, [1, 2j])
    g = f.scale(-0.5)
    assert max_coefficient_deviation(f.monic(), g.monic()) < 1e-12


@pytest.mark.parametrize(
    "f, g, ladder, expected",
    [
        (poly(-1, 0, 1), poly(-2, 0, 2), [1, 0.1, 1e-3, 1e-6], True),
        (poly(-1, 0, 1), poly(-1.0201, 0, 1), [1, 0.1, 1e-2, 1e-4], False),
        (poly(1, 2, 3), poly(1, 2, 3), [0.5, 1e-8], True),
    ],
)
def test_proportional_iff_always_aligned(f, g, ladder, expected):
    assert proportional_iff_always_aligned_check(f, g, ladder) is expected


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("proportional", [True, False])
def test_proportional_iff_always_aligned_agrees_with_scalar_multiple(
    seed, proportional
):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    roots = random_roots(rng, n, radius=1.5, min_separation=0.2)
    f = from_roots(complex(rng.uniform(0.5, 2.0)), roots)
    c = complex(rng.uniform(0.5, 2.0) * np.exp(2j * np.pi * rng.uniform()))
    if proportional:
        g = f.scale(c)
    else:
        moved = list(roots)
        moved[0] += 1e-3 * np.exp(2j * np.pi * rng.uniform())
        g = from_roots(c * f.leading, moved)
    # Below the balls' separation down to the root-finder accuracy.
    ladder = [0.05, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8]

    aligned = proportional_iff_always_aligned_check(f, g, ladder)
    assert aligned is proportional
    assert aligned is (is_scalar_multiple(f, g, 1e-8) is not None)


@pytest.mark.parametrize(
    "g, ladder",
    [
        (poly(-1, 0, 1), []),
        (poly(-1, 0, 1), [0.1, 0.2]),
        (poly(-1, 0, 1), [0.1, -0.1]),
        (poly(-1, 1), [0.1]),
    ],
)
def test_proportional_iff_always_aligned_errors(g, ladder):
    with pytest.raises(ValueError):
        proportional_iff_always_aligned_check(poly(-1, 0, 1), g, ladder)
