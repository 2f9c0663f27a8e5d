"""Pure-NumPy greedy box-covering kernel.

Fallback for the compiled kernel in _covercore.pyx; both implement the same
contract and must produce identical output on identical input (verified by
the test suite when the extension is built).
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components


def backend_name():
    return "python"


def greedy_assign(adj):
    """Greedy disjoint covering of a thresholded adjacency matrix.

    adj: (n, n) boolean or uint8 symmetric matrix with True diagonal.
    Returns (assignment, centers): int64 box index per node, and the 0-based
    center node of each box in creation order.
    """
    adj = np.ascontiguousarray(np.asarray(adj, dtype=bool))
    n = adj.shape[0]
    ncomp, labels = connected_components(csr_matrix(adj), directed=False)

    sizes = np.bincount(labels, minlength=ncomp)
    min_node = np.full(ncomp, n, dtype=np.int64)
    np.minimum.at(min_node, labels, np.arange(n))
    order = np.lexsort((min_node, -sizes))

    assignment = np.full(n, -1, dtype=np.int64)
    centers = []
    nbox = 0
    for c in order:
        nodes = np.flatnonzero(labels == c)  # ascending
        sub = adj[np.ix_(nodes, nodes)]
        counts = adj[nodes].sum(axis=1).astype(np.int64)
        uncovered = np.ones(nodes.size, dtype=bool)
        while uncovered.any():
            masked = np.where(uncovered, counts, np.int64(-1))
            best = int(np.argmax(masked))  # first max == smallest node index
            members = sub[best] & uncovered
            assignment[nodes[members]] = nbox
            centers.append(int(nodes[best]))
            uncovered &= ~members
            counts -= sub[:, members].sum(axis=1, dtype=np.int64)
            nbox += 1

    return assignment, np.array(centers, dtype=np.int64)
