import math

import mpmath
import numpy as np
import pytest

from lbmix.builtins import polynomial, sine
from lbmix.determinants import SmallDenominatorEstimate
from lbmix.errors import CapExceeded, DegenerateUnsolvable, NotDegenerate
from lbmix.mode_solver import matching_residual, mode_matrix
from lbmix.model import BoundaryData, ProblemSpec, Tolerances, make_coefficients
from lbmix.series import (
    choose_truncation,
    evaluate,
    evaluate_derivative,
    evaluate_grid,
    homogeneous_mode,
    solve_dirichlet,
)
from lbmix.spectral import spectrum_from_modes

UNIT = SmallDenominatorEstimate(M_fit=1.0, gamma_fit=0.0, k_scanned=100, violations=0)


def problem(entries, phi, psi, **kw):
    c = make_coefficients(entries)
    return c, ProblemSpec(c, BoundaryData(tuple(phi), tuple(psi)), **kw)


def test_truncation_single_mode():
    sp = spectrum_from_modes(1, 50, {(0, 1): 1.0})
    assert choose_truncation(sp, make_coefficients(["1"]), UNIT, 1e-8) == 1


def test_truncation_zero():
    assert choose_truncation(spectrum_from_modes(2, 50), make_coefficients(["1", "2"]), UNIT, 1e-8) == 1


def test_truncation_power_law_direct_tail():
    K_store = 4000
    sp = spectrum_from_modes(1, K_store, {(0, k): float(k) ** -5 for k in range(1, K_store + 1)})
    K = choose_truncation(sp, make_coefficients(["1"]), UNIT, 1e-6)
    # direct tail summation over the same stored range
    tails = {}  # tails[j] = sum_{k > j} k^-3
    acc = 0.0
    for k in range(K_store, 0, -1):
        acc = math.fsum([acc, float(k) ** -3])
        tails[k - 1] = acc
    want = min(j for j in range(1, K_store) if tails[j] < 1e-6)
    assert K == want
    # closed-form cross-check: Hurwitz zeta differences give the stored-range tail
    assert mpmath.zeta(3, K + 1) - mpmath.zeta(3, K_store + 1) < 1e-6
    assert mpmath.zeta(3, K) - mpmath.zeta(3, K_store + 1) >= 1e-6


def test_truncation_cap():
    sp = spectrum_from_modes(1, 200, {(0, k): float(k) ** -2 for k in range(1, 201)})
    with pytest.raises(CapExceeded):
        choose_truncation(sp, make_coefficients(["1"]), UNIT, 1e-8, k_cap=100)


def test_zero_data_solution():
    c = make_coefficients(["1", "2"])
    sol = solve_dirichlet(ProblemSpec(c, BoundaryData.zeros(2), k_cap=32))
    assert sol.K == 1 and sol.degenerate_modes == [] and sol.tail_bound == 0.0
    assert not np.any(sol.modes[0].vector)
    assert evaluate(sol, c, 0.3, 0.4) == 0.0


def test_edges_exactly_zero():
    c, spec = problem(["1"], [sine([[1, 1.0], [3, 0.2]])], [sine([[2, -0.5]])], k_cap=16)
    sol = solve_dirichlet(spec)
    for y in np.linspace(-1, 1, 9):
        assert evaluate(sol, c, 0.0, y) == 0.0 and evaluate(sol, c, 1.0, y) == 0.0


def test_derivative_orders():
    c, spec = problem(["1"], [sine([[1, 1.0]])], [sine([[1, 0.0]])], k_cap=8)
    sol = solve_dirichlet(spec)
    assert evaluate_derivative(sol, c, 0.4, 0.3, 0, 0) == evaluate(sol, c, 0.4, 0.3)
    with pytest.raises(ValueError):
        evaluate_derivative(sol, c, 0.4, 0.3, 2, 1)
    with pytest.raises(ValueError):
        evaluate_derivative(sol, c, 0.4, 0.0, 1, 1)
    evaluate_derivative(sol, c, 0.4, 0.2, 1, 1)
    with pytest.raises(ValueError):
        evaluate(sol, c, 1.2, 0.0)


def test_x_derivative_of_single_mode():
    c, spec = problem(["1"], [sine([[2, 1.0]])], [sine([[2, 0.0]])], k_cap=8)
    sol = solve_dirichlet(spec)
    # u = g(y) sin(2 pi x): d/dx at (x, y) = 2 pi cot(2 pi x) * u
    x, y = 0.13, 0.6
    u = evaluate(sol, c, x, y)
    assert evaluate_derivative(sol, c, x, y, 1, 0) == pytest.approx(2 * math.pi * u / math.tan(2 * math.pi * x), rel=1e-12)


@pytest.mark.parametrize("entries,order", [(["1"], 3), (["1", "2"], 4)])
def test_boundary_reproduction(entries, order):
    n = len(entries)
    phi = [polynomial(order, 1.0 + s) for s in range(n)]
    psi = [polynomial(order, -0.5 * (s + 1)) for s in range(n)]
    c, spec = problem(entries, phi, psi, k_cap=128)
    sol = solve_dirichlet(spec)
    xs = np.linspace(0, 1, 50)
    for s in range(n):
        top = evaluate_grid(sol, c, xs, [1.0], 0, 2 * s).values[0]
        bot = evaluate_grid(sol, c, xs, [-1.0], 0, 2 * s).values[0]
        assert np.max(np.abs(top - phi[s](xs))) <= 10 * spec.tolerances.series_tol
        assert np.max(np.abs(bot - psi[s](xs))) <= 10 * spec.tolerances.series_tol


def test_interface_mismatch_shrinks():
    entries = ["1/2", "3/2"]
    c, spec = problem(entries, [polynomial(4), polynomial(4, 0.3)], [polynomial(4, -1.0), polynomial(4, 0.7)], k_cap=128)
    sol = solve_dirichlet(spec)
    xs = np.linspace(0, 1, 50)
    for t in range(2 * c.n):
        gaps = []
        for eps in (1e-3, 1e-4):
            up = evaluate_grid(sol, c, xs, [eps], 0, t).values[0]
            lo = evaluate_grid(sol, c, xs, [-eps], 0, t).values[0]
            gaps.append(np.max(np.abs(up - lo)))
        assert 8.0 < gaps[0] / gaps[1] < 12.0  # jump is O(eps): derivative t is continuous
        at0 = evaluate_grid(sol, c, xs, [0.0], 0, t).values[0]  # interface uses the hyperbolic side
        assert np.all(np.isfinite(at0))


def test_superposition(rng):
    c = make_coefficients(["1", "2"])
    d1 = ([sine([[1, 1.0], [2, 0.5]]), polynomial(4)], [sine([[3, 0.1]]), sine([[1, -0.4]])])
    d2 = ([polynomial(4, 2.0), sine([[5, 0.25]])], [polynomial(4, -1.0), sine([[2, 1.0]])])
    alpha, beta = 1.7, -0.6
    combo = tuple(
        tuple((lambda x, f=f, g=g: alpha * f(x) + beta * g(x)) for f, g in zip(p, q)) for p, q in zip(d1, d2)
    )
    sols = [solve_dirichlet(ProblemSpec(c, BoundaryData(*d), k_cap=128)) for d in (d1, d2, combo)]
    pts = rng.uniform([0, -1], [1, 1], size=(20, 2))
    for x, y in pts:
        lhs = evaluate(sols[2], c, x, y)
        rhs = alpha * evaluate(sols[0], c, x, y) + beta * evaluate(sols[1], c, x, y)
        assert abs(lhs - rhs) <= 1e-9


def test_worker_count_bit_identical():
    c, spec = problem(["1/2", "3/2"], [polynomial(4), sine([[3, 1.0]])], [polynomial(4, 0.5), sine([[1, 1.0]])], k_cap=96)
    a = solve_dirichlet(spec, workers=1)
    b = solve_dirichlet(spec, workers=4)
    assert a.K == b.K
    for m1, m2 in zip(a.modes, b.modes):
        assert m1.vector.tobytes() == m2.vector.tobytes()
    xs, ys = np.linspace(0, 1, 11), np.linspace(-1, 1, 11)
    assert evaluate_grid(a, c, xs, ys).values.tobytes() == evaluate_grid(b, c, xs, ys).values.tobytes()


def test_degenerate_orthogonal_recorded():
    c, spec = problem(["3/4"], [sine([[6, 1.0]])], [sine([[2, 0.3]])], k_cap=16)
    sol = solve_dirichlet(spec)
    assert [r.k for r in sol.degenerate_modes] == [5]
    rec = sol.degenerate_modes[0]
    assert rec.data_orthogonal and rec.homogeneous_dim >= 1
    assert sol.mode(5) is None and sol.mode(6) is not None
    assert len(sol.modes) == sol.K - 1


def test_degenerate_loaded_unsolvable():
    _, spec = problem(["3/4"], [sine([[5, 1.0]])], [sine([[5, 0.0]])], k_cap=16)
    with pytest.raises(DegenerateUnsolvable) as info:
        solve_dirichlet(spec)
    assert info.value.ks == [5]


def test_homogeneous_mode():
    c = make_coefficients(["3/4"])
    with pytest.raises(NotDegenerate):
        homogeneous_mode(2, c)
    for k in (5, 9, 13):
        v = homogeneous_mode(k, c)
        A = mode_matrix(k, c)
        assert np.linalg.norm(A @ v.vector) <= 1e-8 * np.linalg.norm(A, 2)
        assert np.linalg.norm(v.vector) == pytest.approx(1.0, abs=1e-14)
        assert v.vector[np.argmax(np.abs(v.vector))] > 0
        assert matching_residual(v, c) <= 1e-9


def test_cap_exceeded_for_rough_data():
    _, spec = problem(["1"], [lambda x: x * (1 - x)], [lambda x: 0 * x], k_cap=64)
    with pytest.raises(CapExceeded):
        solve_dirichlet(spec)


def test_rejects_invalid_spec():
    c = make_coefficients(["1"])
    with pytest.raises(ValueError):
        solve_dirichlet(ProblemSpec(c, BoundaryData.zeros(1), Tolerances(series_tol=-1.0)))
