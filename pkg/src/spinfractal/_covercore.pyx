# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled greedy box-covering kernel.

Contract shared with the pure-Python fallback (_covercore_py): given a
thresholded boolean adjacency matrix (True diagonal), return the disjoint
greedy covering as (assignment, centers).  Components are processed in
descending size (ties by smallest contained node); inside a component the
next box center is the uncovered node covering the most uncovered nodes
(ties by smallest node index).  Both kernels must produce identical output.
"""

import numpy as np

cimport cython
cimport numpy as cnp

cnp.import_array()


def backend_name():
    return "compiled"


def greedy_assign(adj):
    """Greedy disjoint covering of a thresholded adjacency matrix.

    adj: (n, n) boolean or uint8 symmetric matrix with True diagonal.
    Returns (assignment, centers): int64 box index per node, and the 0-based
    center node of each box in creation order.
    """
    adj_u8 = np.ascontiguousarray(np.asarray(adj)).view(np.uint8)
    cdef const unsigned char[:, ::1] a = adj_u8
    cdef Py_ssize_t n = a.shape[0]

    comp_np = np.full(n, -1, dtype=np.int64)
    queue_np = np.empty(n, dtype=np.int64)
    cdef long long[::1] comp = comp_np
    cdef long long[::1] queue = queue_np
    cdef Py_ssize_t i, u, v, head, tail
    cdef long long ncomp = 0

    # connected components by BFS; seeds ascend, so component id order is
    # smallest-contained-node order
    with nogil:
        for i in range(n):
            if comp[i] < 0:
                comp[i] = ncomp
                queue[0] = i
                head = 0
                tail = 1
                while head < tail:
                    u = queue[head]
                    head += 1
                    for v in range(n):
                        if comp[v] < 0 and a[u, v]:
                            comp[v] = ncomp
                            queue[tail] = v
                            tail += 1
                ncomp += 1

    sizes = np.bincount(comp_np, minlength=ncomp)
    order_np = np.argsort(-sizes, kind="stable").astype(np.int64)

    # nodes grouped by component id, ascending inside each group
    perm_np = np.argsort(comp_np, kind="stable").astype(np.int64)
    starts_np = np.searchsorted(comp_np[perm_np], np.arange(ncomp + 1)).astype(np.int64)

    assignment_np = np.full(n, -1, dtype=np.int64)
    centers_np = np.empty(n if n else 1, dtype=np.int64)
    covered_np = np.zeros(n, dtype=np.uint8)
    counts_np = np.zeros(n, dtype=np.int64)
    removed_np = np.empty(n if n else 1, dtype=np.int64)

    cdef long long[::1] order = order_np
    cdef long long[::1] perm = perm_np
    cdef long long[::1] starts = starts_np
    cdef long long[::1] assignment = assignment_np
    cdef long long[::1] centers = centers_np
    cdef unsigned char[::1] covered = covered_np
    cdef long long[::1] counts = counts_np
    cdef long long[::1] removed = removed_np

    cdef Py_ssize_t ci, c, s0, s1, m, k, b, remaining, nrem
    cdef long long nbox = 0, best, bestc, acc

    with nogil:
        for ci in range(ncomp):
            c = order[ci]
            s0 = starts[c]
            s1 = starts[c + 1]
            m = s1 - s0
            # initial coverage counts: full row sums (edges never leave a component)
            for k in range(s0, s1):
                u = perm[k]
                acc = 0
                for v in range(n):
                    if a[u, v]:
                        acc += 1
                counts[u] = acc
            remaining = m
            while remaining > 0:
                best = -1
                bestc = -1
                for k in range(s0, s1):
                    u = perm[k]
                    if covered[u] == 0 and counts[u] > bestc:
                        bestc = counts[u]
                        best = u
                nrem = 0
                for k in range(s0, s1):
                    v = perm[k]
                    if covered[v] == 0 and a[best, v]:
                        covered[v] = 1
                        assignment[v] = nbox
                        removed[nrem] = v
                        nrem += 1
                remaining -= nrem
                for k in range(s0, s1):
                    u = perm[k]
                    if covered[u] == 0:
                        acc = 0
                        for b in range(nrem):
                            if a[u, removed[b]]:
                                acc += 1
                        counts[u] -= acc
                centers[nbox] = best
                nbox += 1

    return assignment_np, centers_np[:nbox].copy()
