"""Compare the compiled and pure-Python kernel backends.

    python3 bench/bench_kernels.py [--repeat 3] [--quick]

Prints one line per kernel with the best wall time of each backend, the
speedup, and the max abs difference of their outputs.
"""
import argparse
import math
import time

import numpy as np

from nilspec import kernels


def cases(quick):
    rng = np.random.default_rng(0)
    n_orbit = 20_000 if quick else 200_000
    n_nodes = 1 << (14 if quick else 18)
    states = rng.random((n_nodes, 3)) * 4 - 2
    A = np.array([[1, 0], [1, 1]])
    b = np.array([math.sqrt(2) - 1, 0.0])
    values = np.exp(2j * np.pi * rng.random(n_orbit))
    delta = rng.random((n_nodes, 2))
    increments = rng.random((n_orbit, 1))
    return {
        "heis_orbit": (lambda k: k.heis_orbit(0.4142135623730951, 0.7320508075688772, [0.1, 0.2, 0.3], n_orbit)),
        "heis_reduce": (lambda k: k.heis_reduce(states)),
        "affine_orbit": (lambda k: k.affine_orbit(A, b, [0.1, 0.2], n_orbit)),
        "circle_cumsum": (lambda k: k.circle_cumsum([0.1], increments)),
        "zak_eval": (lambda k: k.zak_eval(states, 1, 1.0, 6)),
        "lag_correlation": (lambda k: k.lag_correlation(values, 256)),
        "character_tables": (lambda k: k.character_tables(delta, 4)),
    }


def best_time(fn, repeat):
    best, out = math.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}")
    print(f"{'kernel':<18}{'python s':>12}{'cython s':>12}{'speedup':>10}{'max diff':>12}")
    rows = []
    for name, fn in cases(args.quick).items():
        t_py, out_py = best_time(lambda: fn(kernels.get_backend("python")), args.repeat)
        if "cython" in backends:
            t_cy, out_cy = best_time(lambda: fn(kernels.get_backend("cython")), args.repeat)
            diff = float(np.max(np.abs(np.asarray(out_py) - np.asarray(out_cy))))
            line = f"{name:<18}{t_py:>12.4f}{t_cy:>12.4f}{t_py / t_cy:>10.1f}{diff:>12.2e}"
        else:
            line = f"{name:<18}{t_py:>12.4f}{'-':>12}{'-':>10}{'-':>12}"
        print(line)
        rows.append(line)
    return rows


if __name__ == "__main__":
    main()
