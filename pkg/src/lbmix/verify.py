"""Independent checks: manufactured modes, finite-difference residuals and oracle scans."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .builtins import BoundaryFunction
from .determinants import delta_ratio
from .errors import DegenerateModeError, DegenerateUnsolvable, GridError, MatchingSingular
from .mode_solver import (
    ModeSolution,
    _as_array,
    assemble_mode_system,
    closed_form_n1,
    mode_matrix,
    mode_values,
    solve_mode,
)
from .model import BoundaryData, ProblemSpec, Tolerances, make_coefficients
from .series import SeriesSolution, evaluate_grid
from .spectral import SpectralBoundary, spectrum_from_modes

MATCHING_COND_LIMIT = 1e12


@dataclass(frozen=True)
class ManufacturedCase:
    k: int
    coeffs: object
    exact_mode: ModeSolution
    phi_k: np.ndarray
    psi_k: np.ndarray

    @property
    def induced_data(self):
        return self.phi_k, self.psi_k

    def spectrum(self, K: int | None = None) -> SpectralBoundary:
        K = self.k if K is None else K
        n = self.phi_k.shape[0]
        return spectrum_from_modes(
            n, K,
            {(s, self.k): v for s, v in enumerate(self.phi_k)},
            {(s, self.k): v for s, v in enumerate(self.psi_k)},
        )

    def boundary_data(self) -> BoundaryData:
        k = self.k

        def wave(amp):
            def coeffs(K):
                c = np.zeros(K)
                if k <= K:
                    c[k - 1] = amp
                return c

            return BoundaryFunction(
                lambda x: amp * kernels.SQRT2 * kernels.sinpi(k * np.asarray(x, dtype=float)), coeffs
            )

        return BoundaryData(
            phi=tuple(wave(v) for v in self.phi_k), psi=tuple(wave(v) for v in self.psi_k)
        )

    def problem(self, tolerances: Tolerances | None = None, k_cap: int = 256) -> ProblemSpec:
        return ProblemSpec(
            coefficients=self.coeffs,
            boundary=self.boundary_data(),
            tolerances=tolerances or Tolerances(),
            k_cap=k_cap,
        )

    def exact_field(self, xs, ys) -> np.ndarray:
        """u on the grid ys x xs from the ground-truth mode (y = 0 uses the hyperbolic side)."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        y_eval = np.where(ys == 0.0, -0.0, ys)
        m = self.exact_mode
        vals = mode_values(m.c_hat[None, :], m.d[None, :], [self.k], self.coeffs, y_eval, 0)
        return kernels.SQRT2 * np.outer(vals[0], kernels.sinpi(self.k * xs))


def manufactured_case(k: int, coeffs, seed: int) -> ManufacturedCase:
    """Random elliptic coefficients, interface-matched hyperbolic ones, and the data they induce."""
    if k < 1:
        raise ValueError("k must be >= 1")
    a = _as_array(coeffs)
    n = a.shape[0]
    rng = np.random.default_rng(seed)
    c_hat = rng.uniform(-1.0, 1.0, 2 * n)
    A = mode_matrix(k, a)
    block_c = A[2 * n:, :2 * n]
    block_d = A[2 * n:, 2 * n:]
    if np.linalg.cond(block_d) > MATCHING_COND_LIMIT:
        raise MatchingSingular(f"interface block singular for a={a.tolist()}")
    d = np.linalg.solve(block_d, -block_c @ c_hat)
    x = np.concatenate([c_hat, d])
    pk = math.pi * k
    rows = A @ x
    phi = np.array([pk ** (2 * m) * rows[m] for m in range(n)])
    psi = np.array([(-1) ** m * pk ** (2 * m) * rows[n + m] for m in range(n)])
    return ManufacturedCase(k=k, coeffs=coeffs, exact_mode=ModeSolution(k, c_hat, d), phi_k=phi, psi_k=psi)


# ------------------------------------------------------------------ finite differences
@dataclass(frozen=True)
class ResidualReport:
    h: float
    interior_max_residual_elliptic: float
    interior_max_residual_hyperbolic: float
    order_elliptic: float
    order_hyperbolic: float

    @property
    def convergence_order(self) -> float:
        """The subdomain order farther from 2 (the weaker of the two)."""
        return max((self.order_elliptic, self.order_hyperbolic), key=lambda p: abs(p - 2.0))


def _grid_points(h: float, lo: float, hi: float) -> np.ndarray:
    steps = (hi - lo) / h
    m = int(round(steps))
    if m < 1 or abs(steps - m) > 1e-9 * max(1.0, steps):
        raise GridError(f"h={h} does not divide [{lo}, {hi}]")
    return lo + h * np.arange(m + 1)


def _residual_maxima(sol, a, h, flip_sign, h_ref):
    """Max |composed stencil| per subdomain over points of the h_ref lattice.

    Both runs of a study use the same point set (footprint and interface band
    sized by h_ref), so the error ratio measures the stencil alone.
    """
    n = a.shape[0]
    xs = _grid_points(h, 0.0, 1.0)
    ys = _grid_points(h, -1.0, 1.0)
    exclusion = max(5, n + 1) * h_ref
    margin = n * h_ref
    if xs.shape[0] <= 2 * n + 1 or exclusion + margin >= 1.0 - margin:
        raise GridError(f"grid h={h} too coarse for a {2 * n + 1}-point composite stencil")
    u = evaluate_grid(sol, a, xs, ys).values
    signs = np.sign(ys)
    if flip_sign:
        signs = np.where(ys < 0, 1.0, signs)
    for j in range(n):
        u = kernels.factor_stencil(u, a[j] ** 2, signs[j:ys.shape[0] - j], h)
    xc = xs[n:xs.shape[0] - n]
    yc = ys[n:ys.shape[0] - n]
    stride = int(round(h_ref / h))
    on_x = (np.arange(n, xs.shape[0] - n) % stride == 0) & (xc >= margin - 1e-12) & (xc <= 1 - margin + 1e-12)
    on_y = (np.arange(n, ys.shape[0] - n) % stride == 0) & (np.abs(yc) <= 1 - margin + 1e-12)
    r = np.abs(u[np.ix_(on_y, on_x)])
    yk = yc[on_y]
    upper = yk > exclusion
    lower = yk < -exclusion
    ell = float(r[upper].max()) if np.any(upper) else 0.0
    hyp = float(r[lower].max()) if np.any(lower) else 0.0
    return ell, hyp


def _order(coarse, fine):
    if coarse == 0.0 or fine == 0.0:
        return float("nan")
    return math.log2(coarse / fine)


def fd_residual(sol: SeriesSolution, coeffs, grid_h: float, flip_sign: bool = False) -> ResidualReport:
    """Composed centred-difference operator applied to the sampled series, at h and h/2."""
    a = _as_array(coeffs)
    e1, h1 = _residual_maxima(sol, a, grid_h, flip_sign, grid_h)
    e2, h2 = _residual_maxima(sol, a, grid_h / 2, flip_sign, grid_h)
    return ResidualReport(
        h=grid_h,
        interior_max_residual_elliptic=e1,
        interior_max_residual_hyperbolic=h1,
        order_elliptic=_order(e1, e2),
        order_hyperbolic=_order(h1, h2),
    )


# ------------------------------------------------------------ mode-estimate scan
@dataclass(frozen=True)
class EstimateFit:
    M: float
    witness: tuple | None  # (k, j, y) attaining M
    skipped: tuple = ()


def theorem2_check(coeffs, spectrum: SpectralBoundary, k_range, degeneracy_tol: float = 1e-8) -> EstimateFit:
    """Smallest M with |u_k^(j)(y)| <= M k^j sum_s(|phi|+|psi|) / |Delta2+Delta_k| over the scan."""
    a = _as_array(coeffs)
    n = a.shape[0]
    orders = sorted({0, 1, 2 * n - 1})
    side = np.linspace(1.0, 0.05, 20)
    ys = np.concatenate([side, -side])
    best, witness, skipped = 0.0, None, []
    for k in k_range:
        if k > spectrum.K:
            break
        phi_k, psi_k = spectrum.at(k)
        mag = float(np.abs(phi_k).sum() + np.abs(psi_k).sum())
        if mag == 0.0:
            continue
        try:
            sol = solve_mode(assemble_mode_system(k, a, phi_k, psi_k), degeneracy_tol)
        except DegenerateUnsolvable:
            skipped.append(k)
            continue
        if sol.degenerate:
            skipped.append(k)
            continue
        denom = abs(delta_ratio(k, a))
        for j in orders:
            vals = np.abs(mode_values(sol.c_hat[None, :], sol.d[None, :], [k], a, ys, j)[0])
            need = vals * denom / (float(k) ** j * mag)
            i = int(np.argmax(need))
            if need[i] > best:
                best, witness = float(need[i]), (int(k), j, float(ys[i]))
    return EstimateFit(M=best, witness=witness, skipped=tuple(skipped))


# ------------------------------------------------------------- n = 1 oracle
def oracle_compare_n1(a1, k_range, trials: int, seed: int, degeneracy_tol: float = 1e-8,
                      zero_data: bool = False) -> float:
    """Max relative deviation between the general solver and hand elimination for n = 1.

    Modes flagged degenerate by either route are skipped.
    """
    a = _as_array(make_coefficients([a1]) if isinstance(a1, str) else a1)
    if a.shape[0] != 1:
        raise ValueError("the hand elimination covers n = 1 only")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        for k in k_range:
            phi, psi = (0.0, 0.0) if zero_data else rng.standard_normal(2)
            try:
                ref = closed_form_n1(k, float(a[0]), phi, psi, degeneracy_tol)
                got = solve_mode(assemble_mode_system(k, a, [phi], [psi]), degeneracy_tol)
            except (DegenerateModeError, DegenerateUnsolvable):
                continue
            if got.degenerate:
                continue
            scale = float(np.max(np.abs(ref.vector)))
            diff = float(np.max(np.abs(got.vector - ref.vector)))
            if scale > 0:
                worst = max(worst, diff / scale)
            else:
                worst = max(worst, diff)
    return worst
