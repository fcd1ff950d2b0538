"""Benchmark the compiled evaluation core against the NumPy fallback.

The five kernels are the hot inner loops of every quadrature in the package;
this script times them on grids representative of a 2-D norm/distribution
run (36 lattice terms, ~10^5 evaluation points) and prints a table.

Run:  python3 benchmarks/compare_backends.py [--grid 131072] [--repeats 5]

To time the full test suite under one backend:
  TORICDIST_BACKEND=python  pytest tests/test_acceptance.py
  TORICDIST_BACKEND=compiled pytest tests/test_acceptance.py
"""

import argparse
import time

import numpy as np

from toricdist import _core_py
from toricdist import chart_geometry as cg
from toricdist import projective as pj
from toricdist.polytope import build_vertex_chart, face_of, standard_simplex

try:
    from toricdist import _core
except ImportError:
    _core = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=131072,
                    help="evaluation points per kernel call")
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    P, w = pj.simplex_setup(7, 2)
    B = P.lattice_points.astype(float)
    lw = w.log_for_points(P.lattice_points)
    rho = rng.uniform(-4, 4, size=(args.grid, 2))

    chart = build_vertex_chart(P, face_of(P, [3, 0]), [0, 0])
    la = cg.chart_log_weights(chart, w)
    mu, nu = cg._split(chart)
    t = rng.uniform(0, 2, size=(args.grid, 1))
    t[: args.grid // 16] = 0.0
    crho = rng.uniform(-3, 3, size=(args.grid, 1))

    cases = [
        ("orbit_logk", lambda k: k.orbit_logk(rho, B, lw)),
        ("orbit_moments", lambda k: k.orbit_moments(rho, B, lw)),
        ("orbit_hessian", lambda k: k.orbit_hessian(rho, B, lw)),
        ("chart_logk", lambda k: k.chart_logk(t, crho, la, mu, nu)),
        ("chart_density", lambda k: k.chart_density(t, crho, la, mu, nu)),
    ]

    print(f"grid = {args.grid} points, {len(B)} lattice terms, "
          f"best of {args.repeats}")
    header = f"{'kernel':<16}{'numpy (ms)':>12}"
    if _core is not None:
        header += f"{'compiled (ms)':>15}{'speedup':>9}"
    print(header)
    for name, call in cases:
        t_py = timeit(lambda: call(_core_py), args.repeats) * 1e3
        line = f"{name:<16}{t_py:>12.2f}"
        if _core is not None:
            t_c = timeit(lambda: call(_core), args.repeats) * 1e3
            line += f"{t_c:>15.2f}{t_py / t_c:>9.2f}x"
        print(line)
    if _core is None:
        print("compiled core not built (pip install -e . rebuilds it)")


if __name__ == "__main__":
    main()
