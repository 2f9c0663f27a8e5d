"""Information-transfer distance between excitation states.

The Hamiltonian is decomposed into distinct eigenvalues and eigenspace
projectors.  For nodes i, j the transfer-probability bound is

    p_max(i, j) = ( sum_k |<j| P_k |i>| )^2,

the square of the summed absolute projector overlaps, which upper-bounds the
excitation transfer probability |<j| exp(-iHt) |i>|^2 at every time t.  The
distance is d(i, j) = -ln p_max(i, j): symmetric, zero on the diagonal, but
not necessarily separating (distinct nodes may sit at distance zero).

Projector overlaps are accumulated from eigenvector components; full n x n
projector matrices are never formed, keeping memory at O(n^2) overall.
Public node indices are 1-based.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import scipy.linalg

from .errors import NumericError, SpecError
from .spin_network import Hamiltonian, NetworkSpec

DEFAULT_DEGENERACY_TOL = 1e-10
P_FLOOR = 1e-300
# Transfer bounds this close to certainty are analytically-exact 1s (mirror /
# antipodal pairs) that eigensolver rounding left a few ulps short; snapping
# them keeps numerically-zero distances out of the radius grid.  Measured
# rounding residue stays below 1e-13 up to n = 1000; real structure starts
# around distance 0.2 (p ~ 0.8).
P_SNAP_TOL = 1e-12


@dataclass
class SpectralDecomposition:
    """Distinct eigenvalues with orthonormal bases of their eigenspaces."""

    distinct_eigenvalues: np.ndarray          # ascending, shape (k,)
    groups: list                              # k arrays of shape (n, m_k), columns orthonormal
    degeneracy_tol: float

    @property
    def n(self) -> int:
        return self.groups[0].shape[0]

    def reconstruct(self) -> np.ndarray:
        """Sum of eigenvalue * projector over all groups (test support)."""
        h = np.zeros((self.n, self.n))
        for lam, vecs in zip(self.distinct_eigenvalues, self.groups):
            h += lam * (vecs @ vecs.T)
        return h


@dataclass
class DistanceMatrix:
    """All-pairs transfer bound p and distance d = -ln p on a network."""

    n: int
    d: np.ndarray
    p: np.ndarray
    metadata: dict = field(default_factory=dict)


def _as_matrix(h: Union[Hamiltonian, np.ndarray]) -> np.ndarray:
    m = h.matrix if isinstance(h, Hamiltonian) else np.asarray(h, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise SpecError(f"Hamiltonian must be a square matrix, got shape {m.shape}")
    return m


def _check_node(i: int, n: int) -> int:
    if not 1 <= i <= n:
        raise SpecError(f"node index {i} out of range [1, {n}]")
    return i - 1


def spectral_decompose(
    h: Union[Hamiltonian, np.ndarray],
    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL,
) -> SpectralDecomposition:
    """Eigendecompose a symmetric matrix, merging near-degenerate eigenvalues.

    Raw eigenvalues (ascending) are merged into one group whenever the gap to
    the previous eigenvalue is <= degeneracy_tol * max(1, spectral range).
    Each group's vectors are re-orthonormalized so the projector overlaps are
    insensitive to the eigensolver's in-eigenspace basis choice.
    """
    if degeneracy_tol <= 0:
        raise SpecError(f"degeneracy_tol must be > 0, got {degeneracy_tol}")
    m = _as_matrix(h)
    try:
        eigvals, eigvecs = scipy.linalg.eigh(m)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise NumericError(
            f"eigendecomposition failed for dimension {m.shape[0]}: {exc}",
            dimension=m.shape[0],
        ) from exc
    spectral_range = float(eigvals[-1] - eigvals[0])
    gap_tol = degeneracy_tol * max(1.0, spectral_range)

    distinct = []
    groups = []
    start = 0
    n = m.shape[0]
    for k in range(1, n + 1):
        if k == n or eigvals[k] - eigvals[k - 1] > gap_tol:
            block = eigvecs[:, start:k]
            if block.shape[1] > 1:
                # re-orthonormalize the (possibly merged) eigenspace basis
                block, _ = np.linalg.qr(block)
            distinct.append(float(np.mean(eigvals[start:k])))
            groups.append(np.ascontiguousarray(block))
            start = k
    return SpectralDecomposition(
        distinct_eigenvalues=np.array(distinct),
        groups=groups,
        degeneracy_tol=degeneracy_tol,
    )


def _overlaps(decomp: SpectralDecomposition, i0: int, j0: int) -> np.ndarray:
    """<j| P_k |i> for every group k, in ascending-eigenvalue order."""
    return np.array([float(vecs[i0] @ vecs[j0]) for vecs in decomp.groups])


def itf_probability(decomp: SpectralDecomposition, i: int, j: int) -> float:
    """Transfer-probability bound p_max(i, j) for 1-based nodes i, j."""
    n = decomp.n
    i0 = _check_node(i, n)
    j0 = _check_node(j, n)
    total = 0.0
    for vecs in decomp.groups:
        total += abs(float(vecs[i0] @ vecs[j0]))
    p = total * total
    return min(max(p, 0.0), 1.0)


def evolve_probability(
    h: Union[Hamiltonian, np.ndarray],
    i: int,
    j: int,
    t,
    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL,
    decomp: Optional[SpectralDecomposition] = None,
):
    """Excitation transfer probability |<j| exp(-iHt) |i>|^2 at time(s) t.

    Accepts a scalar or array of times (all >= 0); returns matching shape.
    Serves as the test oracle for the p_max bound.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise SpecError("evolution time must be >= 0")
    if decomp is None:
        decomp = spectral_decompose(h, degeneracy_tol)
    i0 = _check_node(i, decomp.n)
    j0 = _check_node(j, decomp.n)
    overlaps = _overlaps(decomp, i0, j0)
    phases = np.exp(-1j * np.outer(t_arr.ravel(), decomp.distinct_eigenvalues))
    amps = phases @ overlaps
    probs = np.abs(amps) ** 2
    probs = probs.reshape(t_arr.shape)
    if t_arr.ndim == 0:
        return float(probs)
    return probs


def distance_matrix(
    h: Union[Hamiltonian, np.ndarray],
    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL,
    spec: Optional[NetworkSpec] = None,
) -> DistanceMatrix:
    """All-pairs transfer bound and distance for a Hamiltonian.

    p is clamped to [P_FLOOR, 1] entrywise before d = -ln p, so distances are
    always finite.  Exact symmetry is enforced by computing the upper triangle
    once and mirroring it.
    """
    m = _as_matrix(h)
    if spec is None and isinstance(h, Hamiltonian):
        spec = h.spec
    decomp = spectral_decompose(m, degeneracy_tol)
    n = m.shape[0]

    # Sum |V_k V_k^T| one eigenvalue group at a time (ascending order).
    s = np.zeros((n, n))
    for vecs in decomp.groups:
        s += np.abs(vecs @ vecs.T)
    p = s * s

    # mirror the upper triangle for bitwise symmetry
    iu = np.triu_indices(n, k=1)
    p[(iu[1], iu[0])] = p[iu]
    np.clip(p, P_FLOOR, 1.0, out=p)
    p[p >= 1.0 - P_SNAP_TOL] = 1.0
    np.fill_diagonal(p, 1.0)

    d = -np.log(p) + 0.0  # "+ 0.0" turns -0.0 into +0.0
    np.fill_diagonal(d, 0.0)

    metadata = {
        "spec": spec.to_dict() if spec is not None else None,
        "degeneracy_tol": degeneracy_tol,
        "log_base": "e",
        "p_floor": P_FLOOR,
        "p_snap_tol": P_SNAP_TOL,
        "distinct_eigenvalues": len(decomp.distinct_eigenvalues),
        "identified": False,
    }
    return DistanceMatrix(n=n, d=d, p=p, metadata=metadata)


def identify_zero_pairs(dist: DistanceMatrix, merge_tol: float) -> DistanceMatrix:
    """Merge nodes at distance <= merge_tol into equivalence classes.

    Classes are the connected components of the d <= merge_tol graph
    (transitive closure).  The quotient distance between two classes is the
    minimum distance over their members; the quotient bound p is the
    corresponding maximum.  The class map is recorded in metadata under
    'classes' as lists of 1-based original nodes.
    """
    if merge_tol < 0:
        raise SpecError(f"merge_tol must be >= 0, got {merge_tol}")
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components

    close = dist.d <= merge_tol
    n_classes, labels = connected_components(csr_matrix(close), directed=False)

    # order classes by smallest contained node
    first_node = np.full(n_classes, dist.n, dtype=np.int64)
    np.minimum.at(first_node, labels, np.arange(dist.n))
    class_order = np.argsort(first_node, kind="stable")
    rank = np.empty(n_classes, dtype=np.int64)
    rank[class_order] = np.arange(n_classes)
    labels = rank[labels]

    perm = np.argsort(labels, kind="stable")
    starts = np.searchsorted(labels[perm], np.arange(n_classes))

    def _quotient(mat: np.ndarray, reduce_ufunc) -> np.ndarray:
        by_rows = reduce_ufunc.reduceat(mat[perm], starts, axis=0)
        return reduce_ufunc.reduceat(by_rows[:, perm], starts, axis=1)

    d_q = _quotient(dist.d, np.minimum)
    p_q = _quotient(dist.p, np.maximum)
    np.fill_diagonal(d_q, 0.0)
    np.fill_diagonal(p_q, 1.0)

    classes = [sorted(int(v) + 1 for v in np.flatnonzero(labels == c)) for c in range(n_classes)]
    metadata = dict(dist.metadata)
    metadata.update({"identified": True, "merge_tol": merge_tol, "classes": classes})
    return DistanceMatrix(n=n_classes, d=d_q, p=p_q, metadata=metadata)


def write_distances_csv(dist: DistanceMatrix, path) -> None:
    """CSV export: header i,j,p_max,distance; 1-based nodes, i < j only."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["i", "j", "p_max", "distance"])
        for i in range(dist.n):
            for j in range(i + 1, dist.n):
                writer.writerow(
                    [i + 1, j + 1, format(dist.p[i, j], ".17g"), format(dist.d[i, j], ".17g")]
                )


def write_distances_json(dist: DistanceMatrix, path) -> None:
    """JSON container with metadata and full matrices."""
    doc = {
        "n": dist.n,
        "metadata": dist.metadata,
        "p_max": dist.p.tolist(),
        "distance": dist.d.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


