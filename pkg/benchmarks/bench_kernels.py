"""Time the compiled and pure-Python eigen kernels on the workloads the metrics use.

    python3 benchmarks/bench_kernels.py [--repeat N]

The Jacobi case is the 16x16 real embedding of the 8x8 Hermitian dilation
of a random state, the shape every concurrence evaluation solves; the QR
case is the 4x4 companion matrix of ``rho @ rho~``.
"""
import argparse
import time

import numpy as np

from nmems._backend import get_kernels
from nmems.linalg import JACOBI_TOL, MAX_SWEEPS, _companion, charpoly_coefficients, hermitian_dilation
from nmems.metrics import compute_metrics, spin_flip


def random_density(rng):
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    m = g @ g.conj().T
    return m / np.trace(m).real


def _embed(h):
    return np.ascontiguousarray(np.block([[h.real, -h.imag], [h.imag, h.real]]))


def bench(fn, cases, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        for c in cases:
            fn(c)
        best = min(best, time.perf_counter() - t0)
    return best / len(cases)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--cases", type=int, default=500)
    args = ap.parse_args()

    rng = np.random.default_rng(2024)
    states = [random_density(rng) for _ in range(args.cases)]
    sym = [_embed(hermitian_dilation(s)) for s in states]
    comp = [np.ascontiguousarray(_companion(charpoly_coefficients(s @ spin_flip(s)))) for s in states]

    try:
        backends = {"cython": get_kernels("cython")}
    except ImportError:
        backends = {}
        print("compiled kernels not built; timing the pure-Python fallback only")
    backends["python"] = get_kernels("python")

    print(f"{'kernel':24s}" + "".join(f"{name:>14s}" for name in backends))
    rows = {
        "jacobi 16x16 (us)": lambda k: bench(lambda a: k.jacobi_eigh(a.copy(), JACOBI_TOL, MAX_SWEEPS), sym, args.repeat),
        "hessenberg QR 4x4 (us)": lambda k: bench(lambda h: k.hessenberg_eigvals(h.copy(), 1e-15, 400), comp, args.repeat),
    }
    timings = {}
    for label, run in rows.items():
        vals = [run(k) for k in backends.values()]
        timings[label] = vals
        print(f"{label:24s}" + "".join(f"{v * 1e6:14.1f}" for v in vals))
    if "cython" in backends:
        for label, vals in timings.items():
            print(f"speedup {label.split(' (')[0]}: {vals[1] / vals[0]:.1f}x")

    t0 = time.perf_counter()
    for s in states:
        compute_metrics(s)
    per = (time.perf_counter() - t0) / len(states)
    print(f"compute_metrics with the active backend: {per * 1e6:.1f} us/state")


if __name__ == "__main__":
    main()
