# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: random-walk trajectories and triangle counting.

Every routine here has a line-for-line twin in ``_pykernels``; both consume the
same pre-drawn uniforms so trajectories agree bit for bit.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint8_t

cnp.import_array()


cdef inline int64_t _pick(const int64_t[::1] offsets, const int64_t[::1] neighbors,
                          int64_t i, double u) nogil:
    cdef int64_t lo = offsets[i]
    cdef int64_t d = offsets[i + 1] - lo
    cdef int64_t k = <int64_t>(u * d)
    if k >= d:  # u*d rounding up to d for u just below 1
        k = d - 1
    return neighbors[lo + k]


def srw_walk(const int64_t[::1] offsets, const int64_t[::1] neighbors,
             int64_t start, const double[::1] u):
    """Positions after each of ``len(u)`` simple-random-walk moves from ``start``."""
    cdef Py_ssize_t steps = u.shape[0], t
    cdef int64_t cur = start
    out = np.empty(steps, dtype=np.int64)
    cdef int64_t[::1] o = out
    with nogil:
        for t in range(steps):
            if offsets[cur + 1] == offsets[cur]:
                with gil:
                    raise ValueError(f"node {cur} has no neighbors")
            cur = _pick(offsets, neighbors, cur, u[t])
            o[t] = cur
    return out


def mh_walk(const int64_t[::1] offsets, const int64_t[::1] neighbors,
            int64_t start, const double[::1] u):
    """Metropolis-Hastings moves; ``u`` holds (proposal, acceptance) pairs interleaved.

    Returns (positions, accepted flags), each of length ``len(u) // 2``.
    """
    cdef Py_ssize_t steps = u.shape[0] // 2, t
    cdef int64_t cur = start, nxt, di, dj
    out = np.empty(steps, dtype=np.int64)
    acc = np.zeros(steps, dtype=np.uint8)
    cdef int64_t[::1] o = out
    cdef uint8_t[::1] a = acc
    with nogil:
        for t in range(steps):
            di = offsets[cur + 1] - offsets[cur]
            if di == 0:
                with gil:
                    raise ValueError(f"node {cur} has no neighbors")
            nxt = _pick(offsets, neighbors, cur, u[2 * t])
            dj = offsets[nxt + 1] - offsets[nxt]
            if u[2 * t + 1] * dj < di:
                cur = nxt
                a[t] = 1
            o[t] = cur
    return out, acc


cdef inline int64_t _intersect(const int64_t[::1] nb, int64_t a0, int64_t a1,
                               int64_t b0, int64_t b1) nogil:
    cdef int64_t c = 0, x, y
    while a0 < a1 and b0 < b1:
        x = nb[a0]
        y = nb[b0]
        if x < y:
            a0 += 1
        elif y < x:
            b0 += 1
        else:
            c += 1
            a0 += 1
            b0 += 1
    return c


def triangle_counts(const int64_t[::1] offsets, const int64_t[::1] neighbors):
    """Triangles through every node via sorted neighbor-slice intersection."""
    cdef Py_ssize_t n = offsets.shape[0] - 1
    cdef int64_t v, u, k, c
    tri = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] t = tri
    with nogil:
        for v in range(n):
            for k in range(offsets[v], offsets[v + 1]):
                u = neighbors[k]
                if u <= v:
                    continue
                c = _intersect(neighbors, offsets[v], offsets[v + 1], offsets[u], offsets[u + 1])
                t[v] += c
                t[u] += c
        for v in range(n):
            t[v] //= 2
    return tri


def node_triangles(const int64_t[::1] offsets, const int64_t[::1] neighbors, int64_t v):
    cdef int64_t k, u, total = 0
    for k in range(offsets[v], offsets[v + 1]):
        u = neighbors[k]
        total += _intersect(neighbors, offsets[v], offsets[v + 1], offsets[u], offsets[u + 1])
    return total // 2
