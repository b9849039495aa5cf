"""Compare the compiled kernels with the numpy fallback.

Usage:
    python benchmarks/bench_kernels.py [--repeat 20] [--solve]

``--solve`` also times a perturbed solve end to end under each backend, each
in a fresh interpreter since the backend is chosen at import.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from statdiscs import _kernels_py

try:
    from statdiscs import _ext
except ImportError:
    _ext = None


def poly_case(n, d, terms, points, seed=0):
    rng = np.random.default_rng(seed)
    V = 2 * n + d
    exps = np.zeros((terms, V), dtype=np.int64)
    for t in range(terms):
        while exps[t, :2 * n].sum() + 2 * exps[t, 2 * n:].sum() < 3:
            exps[t, rng.integers(V)] += 1
    return (rng.standard_normal((points, V)), exps, rng.standard_normal(terms),
            rng.integers(0, d, terms), d)


SOLVE_SNIPPET = """
import time
import numpy as np
from statdiscs import kernels
from statdiscs.geometry import DefiningFunction, HermitianPencil, PerturbationPolynomial
from statdiscs.solver import SolverConfig, continuation, family_chart
pencil = HermitianPencil([np.eye(2), np.diag([1.0, -1.0])])
pert = PerturbationPolynomial.single(2, 2, 0, 1.0, re_z=(3, 0))
cfg = SolverConfig()
chart = family_chart(DefiningFunction(pencil), pencil, np.array([1.0, 0.5]), np.array([1.0, 0.0]))
start = time.perf_counter()
continuation(DefiningFunction(pencil, pert, 0.02), None, cfg, chart.initial, chart.frame)
print(kernels.BACKEND, time.perf_counter() - start)
"""


def time_solve(pure_python):
    env = dict(os.environ)
    if pure_python:
        env["STATDISCS_PURE_PYTHON"] = "1"
    out = subprocess.run([sys.executable, "-c", SOLVE_SNIPPET], env=env, check=True,
                         capture_output=True, text=True).stdout.split()
    return out[0], float(out[1])


def best_time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=20)
    parser.add_argument("--solve", action="store_true", help="also time an end-to-end solve")
    args = parser.parse_args(argv)
    if _ext is None:
        print("compiled extension not built; only the fallback is available")
    print(f"{'kernel':<34}{'python [ms]':>12}{'compiled [ms]':>15}{'speedup':>9}")
    cases = []
    for n, d, terms in [(1, 1, 4), (2, 2, 12), (4, 2, 30)]:
        inputs = poly_case(n, d, terms, 256)
        cases.append((f"poly_derivs n={n} d={d} terms={terms}",
                      lambda f, a=inputs: f.poly_derivs(*a, order=2)))
    rng = np.random.default_rng(1)
    for M in (256, 1024):
        samples = rng.standard_normal((8, M)) + 1j * rng.standard_normal((8, M))
        cases.append((f"holder_quotient m=8 M={M}",
                      lambda f, s=samples: f.holder_quotient(s, 0.5)))
    for label, call in cases:
        t_py = best_time(lambda: call(_kernels_py), args.repeat) * 1e3
        if _ext is None:
            print(f"{label:<34}{t_py:>12.3f}{'-':>15}{'-':>9}")
            continue
        t_c = best_time(lambda: call(_ext), args.repeat) * 1e3
        print(f"{label:<34}{t_py:>12.3f}{t_c:>15.3f}{t_py / t_c:>8.1f}x")
    if args.solve:
        _, t_py = time_solve(True)
        backend, t_c = time_solve(False)
        label = "continuation solve n=2 d=2"
        if backend != "compiled":
            print(f"{label:<34}{t_py * 1e3:>12.0f}{'-':>15}{'-':>9}")
        else:
            print(f"{label:<34}{t_py * 1e3:>12.0f}{t_c * 1e3:>15.0f}{t_py / t_c:>8.1f}x")


if __name__ == "__main__":
    main()
