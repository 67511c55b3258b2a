from typing import Any, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from rootcontinuity.poly import Polynomial, Scalar, as_scalar, max_coefficient_deviation
from rootcontinuity.roots import RootClusters, separation

Permutation = Tuple[int, ...]


class Ball:
    """The open ball {z : abs(z - center) < radius}."""

    __slots__ = ("center", "radius")

    def __init__(self, center: Any, radius: float) -> None:
        if not (radius > 0):
            raise ValueError("Ball radius must be positive, got %s" % radius)
        self.center = as_scalar(center)
        self.radius = float(radius)

    def contains(self, z: Scalar, slack: float = 0.0) -> bool:
        return abs(z - self.center) < self.radius + slack

    def __eq__(self, other):
        if isinstance(other, type(self)):
            return self.center == other.center and self.radius == other.radius

        return NotImplemented

    def __ne__(self, other):
        return not (self == other)

    def __repr__(self):
        return "%s(%r, %r)" % (type(self).__name__, self.center, self.radius)


class AlignmentReport(NamedTuple):
    counts: Tuple[int, ...]
    multiplicities: Tuple[int, ...]
    aligned: bool
    balls_disjoint: bool
    permutation: Permutation
    max_displacement: float
    epsilon: float
    slack: float

    def to_json(self) -> dict:
        return {
            "counts": list(self.counts),
            "multiplicities": list(self.multiplicities),
            "aligned": self.aligned,
            "balls_disjoint": self.balls_disjoint,
            "permutation": list(self.permutation),
            "max_displacement": self.max_displacement,
            "epsilon": self.epsilon,
            "slack": self.slack,
        }


def is_delta_deformation(f: Polynomial, g: Polynomial, delta: float) -> bool:
    if not (delta > 0):
        raise ValueError("delta must be positive, got %s" % delta)
    return max_coefficient_deviation(f, g) < delta


def root_balls(rc: RootClusters, epsilon: float) -> Tuple[Ball, ...]:
    return tuple(Ball(center, epsilon) for center in rc.centers)


def balls_disjoint(rc: RootClusters, epsilon: float) -> bool:
    if not (epsilon > 0):
        raise ValueError("epsilon must be positive, got %s" % epsilon)
    if len(rc.clusters) < 2:
        return True
    return epsilon <= separation(rc) / 2


def is_epsilon_aligned(
    f_clusters: RootClusters,
    g_roots: Sequence[Scalar],
    epsilon: float,
    slack: float = 0.0,
) -> AlignmentReport:
    if not (epsilon > 0):
        raise ValueError("epsilon must be positive, got %s" % epsilon)
    if slack < 0:
        raise ValueError("slack must be non-negative, got %s" % slack)
    if f_clusters.degree != len(g_roots):
        raise ValueError(
            "Root counts differ: f has %s roots, g has %s"
            % (f_clusters.degree, len(g_roots))
        )

    counts = tuple(
        sum(1 for omega in g_roots if ball.contains(omega, slack))
        for ball in root_balls(f_clusters, epsilon)
    )
    multiplicities = f_clusters.multiplicities
    permutation, max_displacement = bottleneck_match(f_clusters.expanded(), g_roots)
    return AlignmentReport(
        counts=counts,
        multiplicities=multiplicities,
        aligned=all(c >= mu for c, mu in zip(counts, multiplicities)),
        balls_disjoint=balls_disjoint(f_clusters, epsilon),
        permutation=permutation,
        max_displacement=max_displacement,
        epsilon=epsilon,
        slack=slack,
    )


def bottleneck_match(
    zetas: Sequence[Scalar], omegas: Sequence[Scalar]
) -> Tuple[Permutation, float]:
    """Pair every ζ_j with a distinct ω_σ(j) minimizing max_j abs(ω_σ(j) - ζ_j).

    Binary search over the sorted pairwise distances; a threshold is
    feasible when the graph of pairs within it has a perfect matching.
    """
    if len(zetas) != len(omegas):
        raise ValueError(
            "Root sequences must have equal lengths, got %s and %s"
            % (len(zetas), len(omegas))
        )
    n = len(zetas)
    if n == 0:
        return (), 0.0

    distances = np.abs(
        np.subtract.outer(
            np.asarray(zetas, dtype=np.complex128),
            np.asarray(omegas, dtype=np.complex128),
        )
    )
    thresholds = np.unique(distances)

    lo, hi = 0, len(thresholds) - 1
    best = _perfect_matching(distances <= thresholds[hi])
    assert best is not None
    while lo < hi:
        mid = (lo + hi) // 2
        matching = _perfect_matching(distances <= thresholds[mid])
        if matching is None:
            lo = mid + 1
        else:
            hi = mid
            best = matching

    permutation = tuple(best)
    max_displacement = float(max(distances[j, permutation[j]] for j in range(n)))
    return permutation, max_displacement


def _perfect_matching(adjacency: np.ndarray) -> Optional[List[int]]:
    """Augmenting-path bipartite matching; returns row -> column or None."""
    n = adjacency.shape[0]
    neighbours = [np.flatnonzero(adjacency[row]).tolist() for row in range(n)]
    match_of_column = [-1] * n

    for row in range(n):
        if not _augment(row, neighbours, match_of_column):
            return None

    assignment = [-1] * n
    for column, row in enumerate(match_of_column):
        assignment[row] = column
    return assignment


def _augment(
    start: int, neighbours: List[List[int]], match_of_column: List[int]
) -> bool:
    """Depth-first search for an augmenting path from the free row ``start``,
    flipping it into ``match_of_column`` when found. The search keeps its own
    stack, so the path length is not bound by the recursion limit."""
    seen = [False] * len(match_of_column)
    # [row, index of its next neighbour to try]; path[i] leads from frame i.
    stack = [[start, 0]]
    path: List[int] = []
    while stack:
        frame = stack[-1]
        row, position = frame
        if position == len(neighbours[row]):
            stack.pop()
            if path:
                path.pop()
            continue
        frame[1] += 1
        column = neighbours[row][position]
        if seen[column]:
            continue
        seen[column] = True
        path.append(column)
        owner = match_of_column[column]
        if owner == -1:
            for (matched_row, _), matched_column in zip(stack, path):
                match_of_column[matched_column] = matched_row
            return True
        stack.append([owner, 0])
    return False
