#!/usr/bin/env python3
"""Compare the numba and numpy backends of the summation kernels.

The backend is fixed at import from AUTOWEDGE_BACKEND, so each backend runs
in its own interpreter.  Usage:

    python3 benchmarks/bench_kernels.py [--repeat 5] [--threads N]
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

SIZES = {
    # jump-problem solve: targets x nodes
    "cauchy_sum": [(800, 800), (1600, 1600), (3200, 3200)],
    # field inversion: plane waves x grid side
    "plane_wave_sum": [(1000, 61), (4000, 61), (4000, 121)],
}


def _inputs(kind, m, n, rng):
    if kind == "cauchy_sum":
        tau = np.exp(np.linspace(-30, 30, n)) + 0j
        wts = tau * (60 / n)
        dens = 1 / (1 + tau)
        t = rng.uniform(-5, 5, m) + 1j * rng.uniform(0.1, 2, m)
        pole = np.full(m, -1.0 + 0j)
        return (tau, wts, dens, t, np.zeros(m, complex), np.zeros(m, complex), pole)
    amp = rng.normal(size=m) + 1j * rng.normal(size=m)
    k1 = rng.uniform(-64, 64, m) - 1j * rng.uniform(0.5, 2, m)
    k2 = rng.uniform(-64, 64, m) - 1j * rng.uniform(0.5, 2, m)
    x = np.linspace(0, 6, n)
    return (amp, k1, k2, x, x)


def worker(repeat, threads):
    """Time every kernel size with the backend of this interpreter; print JSON."""
    from autowedge import _accel

    _accel.set_threads(threads)
    rng = np.random.default_rng(0)
    out = {"backend": _accel.BACKEND, "results": []}
    for kind, sizes in SIZES.items():
        fn = getattr(_accel, kind)
        for m, n in sizes:
            args = _inputs(kind, m, n, rng)
            value = fn(*args)  # warm-up (and numba compilation)
            times = []
            for _ in range(repeat):
                start = time.perf_counter()
                fn(*args)
                times.append(time.perf_counter() - start)
            out["results"].append({"kernel": kind, "size": [m, n], "seconds": min(times),
                                   "checksum": [float(np.sum(value).real), float(np.sum(value).imag)]})
    print(json.dumps(out))


def run_backend(name, repeat, threads):
    env = dict(os.environ, AUTOWEDGE_BACKEND=name)
    cmd = [sys.executable, __file__, "--worker", "--repeat", str(repeat)]
    if threads:
        cmd += ["--threads", str(threads)]
    done = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(done.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()
    if args.worker:
        worker(args.repeat, args.threads)
        return

    nb = run_backend("numba", args.repeat, args.threads)
    npy = run_backend("numpy", args.repeat, args.threads)
    if nb["backend"] != "numba":
        print("numba is not importable; only the numpy backend ran")
    print(f"{'kernel':<16}{'size':>14}{'numpy [ms]':>14}{'numba [ms]':>14}{'speedup':>10}"
          f"{'rel diff':>12}")
    for a, b in zip(npy["results"], nb["results"]):
        ca = complex(*a["checksum"])
        cb = complex(*b["checksum"])
        diff = abs(ca - cb) / max(abs(ca), 1e-300)
        size = "x".join(map(str, a["size"]))
        print(f"{a['kernel']:<16}{size:>14}{1e3 * a['seconds']:>14.2f}{1e3 * b['seconds']:>14.2f}"
              f"{a['seconds'] / b['seconds']:>10.1f}{diff:>12.1e}")


if __name__ == "__main__":
    main()
