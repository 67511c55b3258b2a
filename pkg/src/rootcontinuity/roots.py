import math
from typing import Any, List, NamedTuple, Sequence, Tuple

import numpy as np

from rootcontinuity.logger import logger
from rootcontinuity.poly import Polynomial, Scalar, evaluate, scalar_to_json

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 200
DEFAULT_SEED = 0
DEFAULT_CLUSTER_TOL = 1e-6

_MACHINE_EPS = float(np.finfo(np.float64).eps)

RootSequence = Tuple[Scalar, ...]


class RootFinderOptions(NamedTuple):
    max_iter: int = DEFAULT_MAX_ITER
    tol: float = DEFAULT_TOL
    seed: int = DEFAULT_SEED


class ConvergenceError(RuntimeError):
    def __init__(self, worst_residual: float, max_iter: int) -> None:
        super().__init__(
            "Root finder did not converge in %s iterations: the worst relative "
            "residual is %r" % (max_iter, worst_residual)
        )
        self.worst_residual = worst_residual


class SingleClusterError(ValueError):
    pass


class RootCluster(NamedTuple):
    center: Scalar
    mult: int

    def to_json(self) -> dict:
        return {"center": scalar_to_json(self.center), "mult": self.mult}


class RootClusters(NamedTuple):
    clusters: Tuple[RootCluster, ...]

    @property
    def centers(self) -> Tuple[Scalar, ...]:
        return tuple(c.center for c in self.clusters)

    @property
    def multiplicities(self) -> Tuple[int, ...]:
        return tuple(c.mult for c in self.clusters)

    @property
    def degree(self) -> int:
        return sum(self.multiplicities)

    def expanded(self) -> RootSequence:
        return tuple(c.center for c in self.clusters for _ in range(c.mult))

    def nonzero(self) -> Tuple[RootCluster, ...]:
        return tuple(c for c in self.clusters if c.center != 0)

    def max_modulus(self) -> float:
        return max((abs(c) for c in self.centers), default=0.0)

    def remove_one(self, center: Scalar) -> "RootClusters":
        """Drop one occurrence of ``center``, as dividing by (z - center) does."""
        remaining: List[RootCluster] = []
        found = False
        for cluster in self.clusters:
            if not found and cluster.center == center:
                found = True
                if cluster.mult > 1:
                    remaining.append(cluster._replace(mult=cluster.mult - 1))
            else:
                remaining.append(cluster)
        if not found:
            raise ValueError("%r is not a cluster center" % (center,))
        return RootClusters(tuple(remaining))

    def to_json(self) -> list:
        return [c.to_json() for c in self.clusters]


def root_bound(f: Polynomial) -> float:
    leading = abs(f.leading)
    return 1.0 + max((abs(a) / leading for a in f.coeffs[:-1]), default=0.0)


def relative_residual(f: Polynomial, omega: Scalar) -> float:
    scale = f.max_abs_coeff() * max(1.0, abs(omega)) ** f.degree
    return abs(evaluate(f, omega)) / scale


def find_roots(
    f: Polynomial, options: RootFinderOptions = RootFinderOptions()
) -> RootSequence:
    if f.degree < 1:
        raise ValueError("Root finding needs degree >= 1, got %s" % f.degree)
    if options.max_iter < 1:
        raise ValueError("max_iter must be positive, got %s" % options.max_iter)
    if not (options.tol > 0):
        raise ValueError("tol must be positive, got %s" % options.tol)

    # Exact zero roots are factored out before iterating.
    zeros = f.low_order()
    core = f.array()[zeros:]
    m = len(core) - 1
    if m == 0:
        found: List[Scalar] = []
    elif m == 1:
        found = [complex(-core[0] / core[1])]
    else:
        found = [complex(z) for z in _aberth(core, options)]

    roots = sorted([0j] * zeros + found, key=lambda z: (z.real, z.imag))
    worst = max(relative_residual(f, omega) for omega in roots)
    if worst > options.tol:
        raise ConvergenceError(worst, options.max_iter)
    return tuple(roots)


def _aberth(core: np.ndarray, options: RootFinderOptions) -> np.ndarray:
    m = len(core) - 1
    desc = core[::-1]
    deriv = np.polyder(desc)
    abs_desc = np.abs(desc)

    rng = np.random.default_rng(options.seed)
    radius = 1.0 + float(np.max(np.abs(core[:-1]))) / abs(core[-1])
    phase = rng.uniform(0.0, 2 * math.pi)
    z = radius * np.exp(1j * (phase + 2 * math.pi * np.arange(m) / m))

    active = np.ones(m, dtype=bool)
    iteration = 0
    for iteration in range(1, options.max_iter + 1):
        p = np.polyval(desc, z)
        # Horner rounding level: below it the residual carries no information.
        noise = 2 * m * _MACHINE_EPS * np.polyval(abs_desc, np.abs(z))
        active &= np.abs(p) > noise
        if not active.any():
            break

        dp = np.polyval(deriv, z)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            inverse = 1.0 / diff
            np.fill_diagonal(inverse, 0.0)
            correction = p / (dp - p * inverse.sum(axis=1))
        correction = np.where(active & np.isfinite(correction), correction, 0.0)
        z = z - correction
        active &= np.abs(correction) > _MACHINE_EPS * np.abs(z)

    logger.debug(
        "Aberth iteration for degree %s stopped after %s iterations "
        "(%s roots still moving)",
        m,
        iteration,
        int(active.sum()),
    )
    return z


def cluster_roots(rs: Sequence[Any], tol: float = DEFAULT_CLUSTER_TOL) -> RootClusters:
    if not (tol > 0):
        raise ValueError("Clustering tolerance must be positive, got %s" % tol)
    points = np.asarray(rs, dtype=np.complex128)
    if points.size == 0:
        return RootClusters(())

    groups = [list(g) for g in _linked_groups(points, tol)]

    # Single linkage may chain members so that two means end up closer than
    # tol; merge until centers are pairwise farther apart than tol.
    merged = True
    while merged:
        merged = False
        centers = [points[g].mean() for g in groups]
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                if abs(centers[i] - centers[j]) <= tol:
                    groups[i].extend(groups.pop(j))
                    merged = True
                    break
            if merged:
                break

    clusters = [
        RootCluster(center=complex(points[g].mean()), mult=len(g)) for g in groups
    ]
    clusters.sort(key=lambda c: (c.center.real, c.center.imag))
    return RootClusters(tuple(clusters))


def _linked_groups(points: np.ndarray, tol: float) -> List[List[int]]:
    adjacency = np.abs(points[:, None] - points[None, :]) <= tol
    unvisited = set(range(len(points)))
    groups = []
    while unvisited:
        start = min(unvisited)
        unvisited.discard(start)
        group = [start]
        queue = [start]
        while queue:
            current = queue.pop()
            for neighbour in np.flatnonzero(adjacency[current]):
                neighbour = int(neighbour)
                if neighbour in unvisited:
                    unvisited.discard(neighbour)
                    group.append(neighbour)
                    queue.append(neighbour)
        groups.append(sorted(group))
    return groups


def separation(rc: RootClusters) -> float:
    centers = rc.centers
    if len(centers) < 2:
        raise SingleClusterError(
            "Separation needs at least 2 distinct roots, got %s: "
            "every epsilon keeps the root balls disjoint" % len(centers)
        )
    return min(
        abs(centers[j] - centers[k])
        for j in range(len(centers))
        for k in range(j + 1, len(centers))
    )


def find_clusters(
    f: Polynomial,
    options: RootFinderOptions = RootFinderOptions(),
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
) -> RootClusters:
    return cluster_roots(find_roots(f, options), cluster_tol)
