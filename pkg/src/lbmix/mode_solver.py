"""Per-mode boundary value problem in exponentially scaled variables.

For frequency k the mode u_k(y) is

    y > 0:  sum_s c_{2s-1} exp(pi k a_s y) + c_{2s} exp(-pi k a_s y)
    y < 0:  sum_s d_{2s-1} cos(pi k a_s y) + d_{2s} sin(pi k a_s y)

The growing elliptic coefficient is stored as chat_s = c_{2s-1} exp(pi k a_s),
so every exponential that is ever evaluated has a non-positive argument.
Unknowns are ordered chat_1, c_2, chat_3, c_4, ..., then d_1, ..., d_2n; rows
are n top-edge rows, n bottom-edge rows, then 2n interface rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateModeError, DegenerateUnsolvable, NumericalBreakdown
from .kernels import cospi, sinpi
from .model import Coefficients

SCALING = "chat_{2s-1} = c_{2s-1} * exp(pi*k*a_s)"


@dataclass(frozen=True)
class ModeSystem:
    k: int
    n: int
    matrix: np.ndarray
    rhs: np.ndarray
    scaling: str = SCALING

    @property
    def dim(self) -> int:
        return 4 * self.n


@dataclass(frozen=True)
class ModeSolution:
    k: int
    c_hat: np.ndarray  # (chat_1, c_2, chat_3, c_4, ...)
    d: np.ndarray  # (d_1, d_2, ..., d_2n)
    cond_estimate: float = float("nan")
    smallest_singular: float = float("nan")
    degenerate: bool = False

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.c_hat, self.d])

    @classmethod
    def from_vector(cls, k, x, **diag) -> "ModeSolution":
        x = np.asarray(x, dtype=float)
        h = x.shape[0] // 2
        return cls(k=k, c_hat=x[:h].copy(), d=x[h:].copy(), **diag)


def _as_array(coeffs) -> np.ndarray:
    if isinstance(coeffs, Coefficients):
        return coeffs.as_array()
    return np.atleast_1d(np.asarray(coeffs, dtype=float))


def mode_matrix(k: int, coeffs) -> np.ndarray:
    a = _as_array(coeffs)
    n = a.shape[0]
    dim = 4 * n
    A = np.zeros((dim, dim))
    pk = math.pi * k
    eps = np.exp(-pk * a)
    ka = k * a
    C = cospi(ka)
    S = sinpi(ka)
    for m in range(n):
        p = a ** (2 * m)
        A[m, 0:2 * n:2] = p
        A[m, 1:2 * n:2] = p * eps
        A[n + m, 2 * n::2] = p * C
        A[n + m, 2 * n + 1::2] = -p * S
    for t in range(2 * n):
        r = 2 * n + t
        p = a ** t
        A[r, 0:2 * n:2] = eps * p
        A[r, 1:2 * n:2] = (-a) ** t
        # cos(pi t/2), sin(pi t/2) for integer t
        ct = (1.0, 0.0, -1.0, 0.0)[t % 4]
        st = (0.0, 1.0, 0.0, -1.0)[t % 4]
        A[r, 2 * n::2] = -p * ct
        A[r, 2 * n + 1::2] = -p * st
    return A


def mode_rhs(k: int, phi_k, psi_k) -> np.ndarray:
    phi_k = np.atleast_1d(np.asarray(phi_k, dtype=float))
    psi_k = np.atleast_1d(np.asarray(psi_k, dtype=float))
    n = phi_k.shape[0]
    b = np.zeros(4 * n)
    pk = math.pi * k
    for m in range(n):
        scale = pk ** (2 * m)
        b[m] = phi_k[m] / scale
        b[n + m] = (-1) ** m * psi_k[m] / scale
    return b


def assemble_mode_system(k: int, coeffs, phi_k, psi_k) -> ModeSystem:
    if k < 1:
        raise ValueError("k must be >= 1")
    a = _as_array(coeffs)
    if np.atleast_1d(phi_k).shape[0] != a.shape[0] or np.atleast_1d(psi_k).shape[0] != a.shape[0]:
        raise ValueError("need one phi and one psi value per factor")
    return ModeSystem(k=k, n=a.shape[0], matrix=mode_matrix(k, a), rhs=mode_rhs(k, phi_k, psi_k))


def solve_mode(system: ModeSystem, degeneracy_tol: float = 1e-8,
               consistency_tol: float = 1e-8) -> ModeSolution:
    """Solve one mode; singular systems get the minimum-norm solution if consistent."""
    A, b = system.matrix, system.rhs
    if not np.all(np.isfinite(A)) or not np.all(np.isfinite(b)):
        raise NumericalBreakdown(f"non-finite mode system at k={system.k}")
    try:
        U, sv, Vt = np.linalg.svd(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalBreakdown(f"SVD failed at k={system.k}") from exc
    smax, smin = float(sv[0]), float(sv[-1])
    cond = smax / smin if smin > 0 else math.inf
    degenerate = smin < degeneracy_tol * smax
    if not degenerate:
        if not math.isfinite(cond):
            raise NumericalBreakdown(f"condition estimate overflow at k={system.k}")
        lu = scipy.linalg.lu_factor(A, check_finite=False)
        x = scipy.linalg.lu_solve(lu, b, check_finite=False)
        x = x + scipy.linalg.lu_solve(lu, b - A @ x, check_finite=False)
    else:
        null = sv < degeneracy_tol * smax
        bnorm = float(np.linalg.norm(b))
        leak = float(np.linalg.norm(U[:, null].T @ b))
        if leak > consistency_tol * bnorm:
            raise DegenerateUnsolvable(
                f"mode k={system.k} is singular and the data is not in its range", ks=[system.k]
            )
        keep = ~null
        x = Vt[keep].T @ ((U[:, keep].T @ b) / sv[keep])
    if not np.all(np.isfinite(x)):
        raise NumericalBreakdown(f"non-finite solution at k={system.k}")
    return ModeSolution.from_vector(
        system.k, x, cond_estimate=cond, smallest_singular=smin, degenerate=bool(degenerate)
    )


def closed_form_n1(k: int, a1: float, phi_k: float, psi_k: float, tol: float = 1e-8) -> ModeSolution:
    """Eliminate the interface rows of the n = 1 system by hand.

    d_1 = c_1 + c_2 and d_2 = c_1 - c_2 leave a 2x2 system that is solved by
    Cramer's rule in scaled form (first row divided by exp(pi k a1)).
    """
    phi = float(np.atleast_1d(phi_k)[0])
    psi = float(np.atleast_1d(psi_k)[0])
    eps = math.exp(-math.pi * k * a1)
    C = float(cospi(k * a1))
    S = float(sinpi(k * a1))
    det = (C + S) - eps * eps * (C - S)
    if abs(det) < tol:
        raise DegenerateModeError(f"n=1 mode k={k} is degenerate (det={det:.3e})", ks=[k])
    chat = (phi * (C + S) - eps * psi) / det
    c2 = (psi - eps * (C - S) * phi) / det
    c1 = eps * chat
    small = np.linalg.svd(np.array([[1.0, eps], [eps * (C - S), C + S]]), compute_uv=False)
    return ModeSolution(
        k=k,
        c_hat=np.array([chat, c2]),
        d=np.array([c1 + c2, c1 - c2]),
        cond_estimate=float(small[0] / small[-1]),
        smallest_singular=float(small[-1]),
        degenerate=False,
    )


_COS_SHIFT = ((1, "c"), (-1, "s"), (-1, "c"), (1, "s"))  # cos(t + j pi/2)
_SIN_SHIFT = ((1, "s"), (1, "c"), (-1, "s"), (-1, "c"))  # sin(t + j pi/2)


def mode_values(c_hat: np.ndarray, d: np.ndarray, ks, coeffs, ys, j: int = 0) -> np.ndarray:
    """Vectorised j-th y-derivative of many modes; rows index modes, columns index y.

    ``c_hat`` and ``d`` have shape (K, 2n). A y equal to -0.0 selects the
    hyperbolic representation, +0.0 the elliptic one.
    """
    a = _as_array(coeffs)
    n = a.shape[0]
    if j < 0 or j > 2 * n:
        raise ValueError(f"derivative order must be in 0..{2 * n}")
    c_hat = np.atleast_2d(np.asarray(c_hat, dtype=float))
    d = np.atleast_2d(np.asarray(d, dtype=float))
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    upper = np.copysign(1.0, ys) > 0
    out = np.zeros((ks.shape[0], ys.shape[0]))
    yu = ys[upper]
    yl = ys[~upper]
    for s in range(n):
        w = math.pi * ks * a[s]  # (K,)
        wj = w ** j
        if yu.size:
            grow = np.exp(np.outer(w, yu - 1.0))
            decay = np.exp(-np.outer(w, yu))
            out[:, upper] += (wj * c_hat[:, 2 * s])[:, None] * grow
            out[:, upper] += ((-w) ** j * c_hat[:, 2 * s + 1])[:, None] * decay
        if yl.size:
            th = np.outer(w, yl)
            trig = {"c": np.cos(th), "s": np.sin(th)}
            sc, kind_c = _COS_SHIFT[j % 4]
            ss, kind_s = _SIN_SHIFT[j % 4]
            part = (sc * d[:, 2 * s])[:, None] * trig[kind_c] + (ss * d[:, 2 * s + 1])[:, None] * trig[kind_s]
            out[:, ~upper] += wj[:, None] * part
    return out


def mode_value(sol: ModeSolution, coeffs, y: float, j: int = 0) -> float:
    if not -1.0 <= y <= 1.0:
        raise ValueError("y must lie in [-1, 1]")
    return float(mode_values(sol.c_hat[None, :], sol.d[None, :], [sol.k], coeffs, [y], j)[0, 0])


def matching_residual(sol: ModeSolution, coeffs) -> float:
    """Interface mismatch of orders t = 0..2n-1 in the units of the matching rows.

    The jump of the t-th derivative is divided by (pi k max(1, a_n))^t so the
    check is insensitive to the growth of derivatives with k.
    """
    a = _as_array(coeffs)
    n = a.shape[0]
    big = 1.0 + float(np.max(np.abs(sol.vector))) if sol.vector.size else 1.0
    unit = math.pi * sol.k * max(1.0, float(a[-1]))
    worst = 0.0
    for t in range(2 * n):
        up = mode_value(sol, a, 0.0, t)
        lo = mode_value(sol, a, -0.0, t)
        worst = max(worst, abs(up - lo) / unit ** t)
    return worst / big


def operator_polynomial(k: int, coeffs, sign: float) -> np.ndarray:
    """Coefficients e_m of prod_j (sign*z - (pi k a_j)^2) in powers z^m, m = 0..n."""
    a = _as_array(coeffs)
    poly = np.array([1.0])
    for aj in a:
        factor = np.array([-(math.pi * k * aj) ** 2, sign])
        poly = np.convolve(poly, factor)
    return poly


def ode_residual(sol: ModeSolution, coeffs, y: float) -> float:
    """Relative residual of the factored mode ODE at y (applied through derivatives)."""
    a = _as_array(coeffs)
    sign = 1.0 if math.copysign(1.0, y) > 0 else -1.0
    e = operator_polynomial(sol.k, a, sign)
    terms = [e[m] * mode_value(sol, a, y, 2 * m) for m in range(a.shape[0] + 1)]
    scale = sum(abs(t) for t in terms)
    return abs(math.fsum(terms)) / scale if scale > 0 else 0.0
