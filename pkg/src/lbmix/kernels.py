"""Hot numeric loops, each in a numba-compiled and a pure-numpy flavour.

The compiled versions are used when numba imports and ``LBMIX_DISABLE_JIT``
is unset (or "0"). Both flavours sum in ascending k with Neumaier
compensation, so they agree to a few ulps; the benchmark in
``benchmarks/bench_kernels.py`` times them side by side.
"""

from __future__ import annotations

import math
import os

import numpy as np

SQRT2 = math.sqrt(2.0)

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _jit_disabled() -> bool:
    return os.environ.get("LBMIX_DISABLE_JIT", "0").strip().lower() not in ("", "0", "false", "no")


USE_JIT = HAVE_NUMBA and not _jit_disabled()
BACKEND = "numba" if USE_JIT else "numpy"


# ---------------------------------------------------------------- exact-ish trig
def _sinpi_scalar(x):
    # sin(pi*x), exactly 0 at integers and exactly +-1 at half-integers
    r = np.fmod(x, 2.0)
    if r < 0.0:
        r += 2.0
    neg = False
    if r >= 1.0:
        r -= 1.0
        neg = True
    if r > 0.5:
        r = 1.0 - r
    v = math.sin(math.pi * r)
    return -v if neg else v


def _cospi_scalar(x):
    r = np.fmod(abs(x), 2.0)
    neg = False
    if r >= 1.0:
        r -= 1.0
        neg = True
    if r > 0.5:
        r = 1.0 - r
        neg = not neg
    if r == 0.5:
        v = 0.0
    else:
        v = math.cos(math.pi * r)
    return -v if neg else v


def sinpi(x):
    x = np.asarray(x, dtype=float)
    r = np.fmod(x, 2.0)
    r = np.where(r < 0.0, r + 2.0, r)
    neg = r >= 1.0
    r = np.where(neg, r - 1.0, r)
    r = np.where(r > 0.5, 1.0 - r, r)
    v = np.sin(np.pi * r)
    return np.where(neg, -v, v)


def cospi(x):
    x = np.asarray(x, dtype=float)
    r = np.fmod(np.abs(x), 2.0)
    neg = r >= 1.0
    r = np.where(neg, r - 1.0, r)
    flip = r > 0.5
    r = np.where(flip, 1.0 - r, r)
    neg = neg ^ flip
    v = np.where(r == 0.5, 0.0, np.cos(np.pi * r))
    return np.where(neg, -v, v)


def _trig_shift(s, c, j):
    # j-th derivative phase of sin: sin(t + j*pi/2)
    q = j % 4
    if q == 0:
        return s
    if q == 1:
        return c
    if q == 2:
        return -s
    return -c


# ------------------------------------------------------------- numpy flavours
def _np_series_sum(mode_vals, ks, xs, jx):
    """sqrt2 * sum_k mode_vals[k, j] * d^jx/dx^jx sin(pi k x_i), shape (ny, nx)."""
    K, ny = mode_vals.shape
    nx = xs.shape[0]
    total = np.zeros((ny, nx))
    comp = np.zeros((ny, nx))
    for m in range(K):
        k = ks[m]
        kx = k * xs
        w = _trig_shift(sinpi(kx), cospi(kx), jx) * (math.pi * k) ** jx
        term = np.outer(mode_vals[m], w)
        t = total + term
        big = np.abs(total) >= np.abs(term)
        comp += np.where(big, (total - t) + term, (term - t) + total)
        total = t
    return SQRT2 * (total + comp)


def _np_delta2_scan(turns, cos_a, sin_a, weight, use_cos):
    """sum_t weight_t * T(pi*turns[k, t] + alpha_t) for every row k (Neumaier)."""
    sp = sinpi(turns)
    cp = cospi(turns)
    if use_cos:
        vals = cp * cos_a - sp * sin_a
    else:
        vals = sp * cos_a + cp * sin_a
    vals = vals * weight
    total = np.zeros(turns.shape[0])
    comp = np.zeros(turns.shape[0])
    for t in range(vals.shape[1]):
        term = vals[:, t]
        s = total + term
        big = np.abs(total) >= np.abs(term)
        comp += np.where(big, (total - s) + term, (term - s) + total)
        total = s
    return total + comp


def _np_factor_stencil(u, a2, signs, h):
    """Apply a2*dxx + sign(y)*dyy with 3-point centred differences on the interior."""
    inv = 1.0 / (h * h)
    dxx = (u[1:-1, 2:] - 2.0 * u[1:-1, 1:-1] + u[1:-1, :-2]) * inv
    dyy = (u[2:, 1:-1] - 2.0 * u[1:-1, 1:-1] + u[:-2, 1:-1]) * inv
    return a2 * dxx + signs[1:-1, None] * dyy


NUMPY_KERNELS = {
    "series_sum": _np_series_sum,
    "delta2_scan": _np_delta2_scan,
    "factor_stencil": _np_factor_stencil,
}


# --------------------------------------------------------------- jit flavours
JIT_KERNELS = {}

if HAVE_NUMBA:
    _j_sinpi = numba.njit(cache=True)(_sinpi_scalar)
    _j_cospi = numba.njit(cache=True)(_cospi_scalar)

    @numba.njit(cache=True)
    def _jit_series_sum(mode_vals, ks, xs, jx):
        K, ny = mode_vals.shape
        nx = xs.shape[0]
        out = np.empty((ny, nx))
        w = np.empty((K, nx))
        q = jx % 4
        for m in range(K):
            k = ks[m]
            scale = (math.pi * k) ** jx
            for i in range(nx):
                kx = k * xs[i]
                if q == 0:
                    v = _j_sinpi(kx)
                elif q == 1:
                    v = _j_cospi(kx)
                elif q == 2:
                    v = -_j_sinpi(kx)
                else:
                    v = -_j_cospi(kx)
                w[m, i] = v * scale
        for j in range(ny):
            for i in range(nx):
                total = 0.0
                comp = 0.0
                for m in range(K):
                    term = mode_vals[m, j] * w[m, i]
                    t = total + term
                    if abs(total) >= abs(term):
                        comp += (total - t) + term
                    else:
                        comp += (term - t) + total
                    total = t
                out[j, i] = SQRT2 * (total + comp)
        return out

    @numba.njit(cache=True)
    def _jit_delta2_scan(turns, cos_a, sin_a, weight, use_cos):
        nk, nt = turns.shape
        out = np.empty(nk)
        for r in range(nk):
            total = 0.0
            comp = 0.0
            for t in range(nt):
                sp = _j_sinpi(turns[r, t])
                cp = _j_cospi(turns[r, t])
                if use_cos:
                    v = cp * cos_a[t] - sp * sin_a[t]
                else:
                    v = sp * cos_a[t] + cp * sin_a[t]
                term = v * weight[t]
                s = total + term
                if abs(total) >= abs(term):
                    comp += (total - s) + term
                else:
                    comp += (term - s) + total
                total = s
            out[r] = total + comp
        return out

    @numba.njit(cache=True)
    def _jit_factor_stencil(u, a2, signs, h):
        ny, nx = u.shape
        inv = 1.0 / (h * h)
        out = np.empty((ny - 2, nx - 2))
        for j in range(1, ny - 1):
            sg = signs[j]
            for i in range(1, nx - 1):
                c = u[j, i]
                dxx = (u[j, i + 1] - 2.0 * c + u[j, i - 1]) * inv
                dyy = (u[j + 1, i] - 2.0 * c + u[j - 1, i]) * inv
                out[j - 1, i - 1] = a2 * dxx + sg * dyy
        return out

    JIT_KERNELS = {
        "series_sum": _jit_series_sum,
        "delta2_scan": _jit_delta2_scan,
        "factor_stencil": _jit_factor_stencil,
    }


_ACTIVE = JIT_KERNELS if USE_JIT else NUMPY_KERNELS


def series_sum(mode_vals, ks, xs, jx=0):
    return _ACTIVE["series_sum"](
        np.ascontiguousarray(mode_vals, dtype=float),
        np.ascontiguousarray(ks, dtype=float),
        np.ascontiguousarray(xs, dtype=float),
        int(jx),
    )


def delta2_scan(turns, cos_a, sin_a, weight, use_cos):
    return _ACTIVE["delta2_scan"](
        np.ascontiguousarray(turns, dtype=float),
        np.ascontiguousarray(cos_a, dtype=float),
        np.ascontiguousarray(sin_a, dtype=float),
        np.ascontiguousarray(weight, dtype=float),
        bool(use_cos),
    )


def factor_stencil(u, a2, signs, h):
    return _ACTIVE["factor_stencil"](
        np.ascontiguousarray(u, dtype=float),
        float(a2),
        np.ascontiguousarray(signs, dtype=float),
        float(h),
    )
