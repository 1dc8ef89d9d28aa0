"""Time the numba and numpy flavours of each hot kernel on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 5]

Compiled kernels are warmed up once before timing; the first call includes
compilation (or cache load) and is reported separately.
"""

import argparse
import time

import numpy as np

from lbmix import kernels
from lbmix.determinants import _delta2_terms, _turns
from lbmix.model import make_coefficients


def _inputs(rng):
    K, ny, nx = 256, 64, 128
    series = (rng.standard_normal((K, ny)), np.arange(1, K + 1, dtype=float), np.linspace(0, 1, nx), 1)

    coeffs = make_coefficients(["1", "1.4142135623730951", "3"])
    terms = _delta2_terms(coeffs)
    ks = np.arange(1, 20001, dtype=float)
    delta2 = (_turns(terms, ks), terms.cos_alpha, terms.sin_alpha, terms.weight, terms.use_cos)

    u = rng.standard_normal((257, 129))
    signs = np.sign(np.linspace(-1, 1, 257))
    stencil = (u, 0.5625, signs, 1.0 / 128)
    return {"series_sum": series, "delta2_scan": delta2, "factor_stencil": stencil}


def _best(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t)
    return best


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    inputs = _inputs(np.random.default_rng(0))
    print(f"{'kernel':<16}{'first jit call':>16}{'numba':>12}{'numpy':>12}{'speedup':>10}{'max diff':>12}")
    for name, a in inputs.items():
        np_fn = kernels.NUMPY_KERNELS[name]
        ref = np_fn(*a)
        t_np = _best(np_fn, a, args.repeat)
        if not kernels.JIT_KERNELS:
            print(f"{name:<16}{'-':>16}{'-':>12}{t_np * 1e3:>10.2f}ms{'-':>10}{'-':>12}")
            continue
        jit_fn = kernels.JIT_KERNELS[name]
        t0 = time.perf_counter()
        got = jit_fn(*a)
        first = time.perf_counter() - t0
        t_jit = _best(jit_fn, a, args.repeat)
        diff = float(np.max(np.abs(np.asarray(got) - np.asarray(ref))))
        print(
            f"{name:<16}{first * 1e3:>14.1f}ms{t_jit * 1e3:>10.2f}ms{t_np * 1e3:>10.2f}ms"
            f"{t_np / t_jit:>9.1f}x{diff:>12.1e}"
        )


if __name__ == "__main__":
    main()
