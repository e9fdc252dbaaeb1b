"""Pure-Python twins of the compiled kernels in ``_kernels.pyx``.

Same arguments, same uniforms-in/positions-out contract, same results.
"""
from __future__ import annotations

import numpy as np


def srw_walk(offsets, neighbors, start, u):
    off = np.asarray(offsets).tolist()
    nb = np.asarray(neighbors).tolist()
    cur = int(start)
    out = []
    append = out.append
    for x in np.asarray(u, dtype=np.float64).tolist():
        lo = off[cur]
        d = off[cur + 1] - lo
        if d == 0:
            raise ValueError(f"node {cur} has no neighbors")
        k = int(x * d)
        if k >= d:
            k = d - 1
        cur = nb[lo + k]
        append(cur)
    return np.array(out, dtype=np.int64)


def mh_walk(offsets, neighbors, start, u):
    off = np.asarray(offsets).tolist()
    nb = np.asarray(neighbors).tolist()
    uu = np.asarray(u, dtype=np.float64).tolist()
    steps = len(uu) // 2
    cur = int(start)
    out = [0] * steps
    acc = [0] * steps
    for t in range(steps):
        lo = off[cur]
        di = off[cur + 1] - lo
        if di == 0:
            raise ValueError(f"node {cur} has no neighbors")
        k = int(uu[2 * t] * di)
        if k >= di:
            k = di - 1
        nxt = nb[lo + k]
        dj = off[nxt + 1] - off[nxt]
        if uu[2 * t + 1] * dj < di:
            cur = nxt
            acc[t] = 1
        out[t] = cur
    return np.array(out, dtype=np.int64), np.array(acc, dtype=np.uint8)


def _intersect(nb, a0, a1, b0, b1):
    c = 0
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


def triangle_counts(offsets, neighbors):
    off = np.asarray(offsets).tolist()
    nb = np.asarray(neighbors).tolist()
    n = len(off) - 1
    t = [0] * n
    for v in range(n):
        for k in range(off[v], off[v + 1]):
            u = nb[k]
            if u <= v:
                continue
            c = _intersect(nb, off[v], off[v + 1], off[u], off[u + 1])
            t[v] += c
            t[u] += c
    return np.array(t, dtype=np.int64) // 2


def node_triangles(offsets, neighbors, v):
    off = np.asarray(offsets)
    nb = np.asarray(neighbors)
    mine = nb[off[v]:off[v + 1]].tolist()
    total = 0
    for u in mine:
        theirs = nb[off[u]:off[u + 1]].tolist()
        total += _intersect(mine + theirs, 0, len(mine), len(mine), len(mine) + len(theirs))
    return total // 2
