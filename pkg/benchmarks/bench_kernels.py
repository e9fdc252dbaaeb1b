"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--steps 1000000] [--repeat 3]

Both backends consume the same uniforms, so the walks they produce are checked
for equality before timing is reported.
"""
import argparse
import time

import numpy as np

from netmcse import _pykernels
from netmcse.graph_core import generate_er, largest_connected_component

try:
    from netmcse import _kernels as _cykernels
except ImportError:
    _cykernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=5000)
    ap.add_argument("--p", type=float, default=0.002)
    ap.add_argument("--steps", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    g, _ = largest_connected_component(generate_er(args.n, args.p, seed=1))
    rng = np.random.default_rng(0)
    u1 = rng.random(args.steps)
    u2 = rng.random(2 * args.steps)
    off, nb = g.offsets, g.neighbors
    print(f"graph: n={g.n} n_e={g.n_e}; walk length {args.steps}")

    jobs = [
        ("srw walk", lambda k: k.srw_walk(off, nb, 0, u1)),
        ("mh walk", lambda k: k.mh_walk(off, nb, 0, u2)[0]),
        ("triangles", lambda k: k.triangle_counts(off, nb)),
    ]
    backends = [("python", _pykernels)] + ([("cython", _cykernels)] if _cykernels else [])
    print(f"{'kernel':<12}" + "".join(f"{name:>12}" for name, _ in backends) + f"{'speedup':>10}")
    for label, fn in jobs:
        results = [best_of(lambda k=k: fn(k), args.repeat) for _, k in backends]
        if len(results) == 2:
            assert np.array_equal(results[0][1], results[1][1]), f"{label}: backends disagree"
        cells = "".join(f"{t:>11.3f}s" for t, _ in results)
        speed = f"{results[0][0] / results[1][0]:>9.1f}x" if len(results) == 2 else ""
        print(f"{label:<12}{cells}{speed}")
    if _cykernels is None:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
