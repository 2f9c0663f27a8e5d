"""Synthetic distance matrices with known scaling exponents.

These fixtures calibrate the box-covering estimator against closed-form
answers: a uniform 1-D lattice (mono-fractal, all exponents 1) and a
deterministic binomial measure on a dyadic ultrametric (multi-fractal with
tau(q) = -log2(w^q + (1-w)^q)).
"""

from __future__ import annotations

import numpy as np

from .errors import SpecError
from .itf_metric import DistanceMatrix


def lattice_distance_matrix(n: int) -> DistanceMatrix:
    """Uniform 1-D lattice metric d(i, j) = |i - j| / n."""
    if n < 2:
        raise SpecError("lattice needs at least 2 nodes")
    idx = np.arange(n)
    d = np.abs(idx[:, None] - idx[None, :]) / float(n)
    p = np.exp(-d)
    np.fill_diagonal(p, 1.0)
    return DistanceMatrix(
        n=n, d=d, p=p, metadata={"spec": None, "fixture": "uniform_1d_lattice", "n": n}
    )


def binomial_cascade_matrix(levels: int = 10, weight: float = 0.3) -> DistanceMatrix:
    """Binomial measure sampled on a dyadic ultrametric (2**levels points).

    Point i is the i-th measure quantile of the deterministic binomial
    cascade that splits every dyadic cell left/right with mass weight /
    (1 - weight).  The distance between two points is 2**(-l) where l is the
    depth of the deepest dyadic cell containing both, so a ball of radius
    2**(-l) is exactly a depth-l cell and box counts follow the cascade
    weights up to quantile rounding.
    """
    if not 0 < weight < 1:
        raise SpecError(f"cascade weight must lie in (0, 1), got {weight}")
    if not 1 <= levels <= 20:
        raise SpecError(f"levels must be in [1, 20], got {levels}")
    n = 2**levels
    u = (np.arange(n) + 0.5) / n

    # walk each quantile down the cascade tree, recording its cell path
    cells = np.zeros(n, dtype=np.int64)
    mass_lo = np.zeros(n)
    mass_hi = np.ones(n)
    for _ in range(levels):
        split = mass_lo + weight * (mass_hi - mass_lo)
        left = u <= split
        cells = 2 * cells + (~left)
        mass_hi = np.where(left, split, mass_hi)
        mass_lo = np.where(~left, split, mass_lo)

    xor = cells[:, None] ^ cells[None, :]
    bitlen = np.zeros((n, n), dtype=np.int64)
    v = xor.copy()
    for _ in range(levels):
        bitlen += v > 0
        v >>= 1
    # common prefix length of the two cell paths is levels - bitlen
    d = np.where(xor == 0, 0.0, np.exp2(-(levels - bitlen).astype(float)))
    p = np.exp(-d)
    np.fill_diagonal(p, 1.0)
    return DistanceMatrix(
        n=n,
        d=d,
        p=p,
        metadata={
            "spec": None,
            "fixture": "binomial_cascade_ultrametric",
            "levels": levels,
            "weight": weight,
        },
    )


def binomial_cascade_tau(q, weight: float = 0.3):
    """Closed-form mass exponents of the binomial cascade."""
    q = np.asarray(q, dtype=float)
    return -np.log2(weight**q + (1.0 - weight) ** q)
