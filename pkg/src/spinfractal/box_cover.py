"""Greedy box covering of a distance-weighted complete graph.

For a radius eps, the graph is thresholded (keep edges with d <= eps), its
connected components are covered in descending size order, and inside each
component boxes are grown greedily: the next center is the uncovered node
whose ball covers the most uncovered nodes.  Boxes are disjoint: each node
is assigned exactly once, so the box measures sum to one.

All ties break by smallest node index, making coverings fully deterministic.
Node indices are 1-based in public structures.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._kernels import BACKEND, greedy_assign
from .errors import DegenerateInputError, SpecError
from .itf_metric import DistanceMatrix

EXACT_COVER_MAX_NODES = 15


@dataclass(frozen=True)
class RadiusGrid:
    """Strictly increasing covering radii, with their provenance."""

    radii: np.ndarray
    source: str  # "all_unique" or "quantile_subsample"

    def __len__(self) -> int:
        return len(self.radii)


@dataclass(frozen=True)
class Box:
    center: int            # 1-based node
    members: np.ndarray    # 1-based nodes, ascending


@dataclass(frozen=True)
class BoxCovering:
    """Disjoint, exhaustive covering of all nodes at one radius."""

    radius: float
    centers: np.ndarray      # 0-based center node per box, creation order
    assignment: np.ndarray   # box index per 0-based node

    @property
    def n_boxes(self) -> int:
        return len(self.centers)

    @cached_property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.n_boxes)

    @cached_property
    def boxes(self) -> list:
        perm = np.argsort(self.assignment, kind="stable")
        starts = np.searchsorted(self.assignment[perm], np.arange(self.n_boxes + 1))
        return [
            Box(center=int(self.centers[b]) + 1, members=perm[starts[b]:starts[b + 1]] + 1)
            for b in range(self.n_boxes)
        ]


@dataclass(frozen=True)
class BoxMeasures:
    """Node-counting measure of each box: mu_b = |box b| / n."""

    radius: float
    sizes: np.ndarray   # integer node counts per box
    n: int              # total nodes

    @property
    def measures(self) -> np.ndarray:
        return self.sizes / float(self.n)


def _positive_unique_distances(dist: DistanceMatrix) -> np.ndarray:
    iu = np.triu_indices(dist.n, k=1)
    vals = dist.d[iu]
    vals = np.unique(vals[np.isfinite(vals) & (vals > 0)])
    if len(vals) > 1:
        # symmetry-equal weights (e.g. mirror pairs) agree only to eigensolver
        # rounding; treat machine-precision runs as one magnitude, keeping the
        # run's largest value so every member stays coverable at that radius
        distinct = np.diff(vals) > 1e-9 * np.maximum(1.0, vals[:-1])
        vals = vals[np.append(distinct, True)]
    return vals


def _log_subsample(vals: np.ndarray, max_points: int) -> np.ndarray:
    """Pick max_points values at evenly spaced positions of the log range.

    Targets are snapped to the nearest available value; min and max are
    always kept.  If snapping collides, the count is topped up with unused
    values at evenly spaced ranks, so exactly max_points values are returned.
    """
    m = len(vals)
    logs = np.log(vals)
    targets = np.linspace(logs[0], logs[-1], max_points)
    pos = np.clip(np.searchsorted(logs, targets), 1, m - 1)
    left = pos - 1
    idx = np.where(targets - logs[left] <= logs[pos] - targets, left, pos)
    idx[0] = 0
    idx[-1] = m - 1
    idx = np.unique(idx)
    if len(idx) < max_points:
        unused = np.setdiff1d(np.arange(m), idx)
        need = max_points - len(idx)
        extra = unused[np.round(np.linspace(0, len(unused) - 1, need)).astype(np.int64)]
        idx = np.unique(np.concatenate([idx, extra]))
    return vals[idx]


def radius_grid(dist: DistanceMatrix, max_points: int | None = None) -> RadiusGrid:
    """Unique positive distances, optionally subsampled to max_points radii.

    Subsampling picks values at evenly spaced quantiles of the log-distance
    range and always retains the global minimum and maximum.
    """
    if max_points is not None and max_points < 2:
        raise SpecError(f"max_points must be >= 2, got {max_points}")
    vals = _positive_unique_distances(dist)
    if len(vals) == 0:
        raise DegenerateInputError("distance matrix has no positive distances")
    if max_points is None or len(vals) <= max_points:
        return RadiusGrid(radii=vals, source="all_unique")
    return RadiusGrid(radii=_log_subsample(vals, max_points), source="quantile_subsample")


def ball(dist: DistanceMatrix, k: int, eps: float) -> np.ndarray:
    """Nodes within distance eps of node k (inclusive, one hop); 1-based."""
    if not 1 <= k <= dist.n:
        raise SpecError(f"node index {k} out of range [1, {dist.n}]")
    if eps < 0:
        raise SpecError(f"radius must be >= 0, got {eps}")
    return np.flatnonzero(dist.d[k - 1] <= eps) + 1


def greedy_cover(dist: DistanceMatrix, eps: float) -> BoxCovering:
    """Greedy disjoint box covering at radius eps (see module docstring)."""
    if eps <= 0:
        raise SpecError(f"covering radius must be > 0, got {eps}")
    adj = dist.d <= eps
    assignment, centers = greedy_assign(adj)
    return BoxCovering(radius=float(eps), centers=centers, assignment=assignment)


def box_measures(cover: BoxCovering, n: int) -> BoxMeasures:
    """Node-counting measures of a covering's boxes, in box order."""
    sizes = cover.sizes
    if int(sizes.sum()) != n:
        raise SpecError(
            f"covering holds {int(sizes.sum())} nodes but n={n}; not a partition"
        )
    return BoxMeasures(radius=cover.radius, sizes=sizes, n=n)


def exact_min_cover(dist: DistanceMatrix, eps: float) -> int:
    """Exact minimum number of radius-eps balls covering all nodes.

    Exponential bitmask DP over covered-node sets; testing oracle only,
    refuses n > EXACT_COVER_MAX_NODES.
    """
    n = dist.n
    if n > EXACT_COVER_MAX_NODES:
        raise SpecError(f"exact_min_cover refuses n={n} > {EXACT_COVER_MAX_NODES}")
    if eps < 0:
        raise SpecError(f"radius must be >= 0, got {eps}")
    masks = []
    for k in range(n):
        nodes = np.flatnonzero(dist.d[k] <= eps)
        masks.append(int(np.sum(1 << nodes.astype(np.int64))))
    full = (1 << n) - 1
    inf = n + 1
    dp = [inf] * (full + 1)
    dp[0] = 0
    for state in range(full + 1):
        cost = dp[state]
        if cost >= inf or state == full:
            continue
        lowest = (~state & full)
        lowest = lowest & -lowest  # lowest uncovered bit
        for mask in masks:
            if mask & lowest:
                nxt = state | mask
                if cost + 1 < dp[nxt]:
                    dp[nxt] = cost + 1
    return dp[full]


def validate_covering(dist: DistanceMatrix, cover: BoxCovering) -> None:
    """Raise AssertionError unless the covering is a radius-feasible partition."""
    n = dist.n
    assert cover.assignment.shape == (n,)
    assert np.all(cover.assignment >= 0), "some node is unassigned"
    assert cover.assignment.max() == cover.n_boxes - 1
    assert int(cover.sizes.sum()) == n, "boxes do not partition the nodes"
    assert np.all(cover.sizes > 0), "empty box"
    for b, center in enumerate(cover.centers):
        members = np.flatnonzero(cover.assignment == b)
        assert np.all(dist.d[center, members] <= cover.radius), (
            f"box {b} has a member beyond radius {cover.radius}"
        )


def write_covering_dump(covers: list, path) -> None:
    """JSON dump of per-radius covering shapes: radius, box count, box sizes."""
    doc = [
        {
            "radius": c.radius,
            "box_count": c.n_boxes,
            "box_sizes": c.sizes.tolist(),
        }
        for c in covers
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def kernel_backend() -> str:
    """Name of the covering kernel in use ('compiled' or 'python')."""
    return BACKEND
