from fractions import Fraction

import numpy as np
import pytest

from lbmix.errors import CoefficientError
from lbmix.model import (
    BoundaryData,
    ProblemSpec,
    Regime,
    Tolerances,
    evaluate_callable,
    make_coefficients,
    validate_problem,
)


def test_natural_regime():
    c = make_coefficients(["1", "2"])
    assert c.regime is Regime.NATURAL
    assert c.a == (1.0, 2.0)
    assert c.exact == (Fraction(1), Fraction(2))


def test_rational_regime():
    c = make_coefficients(["1/2", "3/2"])
    assert c.regime is Regime.RATIONAL
    assert c.exact == (Fraction(1, 2), Fraction(3, 2))


def test_decimal_is_floating():
    c = make_coefficients(["1.41421356237"])
    assert c.regime is Regime.FLOATING
    assert c.exact is None


def test_reducible_fraction_counts_as_natural():
    assert make_coefficients(["4/2", "3"]).regime is Regime.NATURAL


def test_one_decimal_makes_all_floating():
    assert make_coefficients(["1", "2.5"]).regime is Regime.FLOATING


@pytest.mark.parametrize("bad", [["2", "1"], ["1", "1"], ["0"], ["-1"], ["abc"], [], ["1/0"]])
def test_rejects_bad_entries(bad):
    with pytest.raises(CoefficientError):
        make_coefficients(bad)


def test_render_roundtrip():
    for entries in (["1", "2"], ["1/2", "3/2"], ["0.75", "1.4142135623730951"]):
        c = make_coefficients(entries)
        assert make_coefficients(c.render()) == c


def test_rational_values_match_exact():
    c = make_coefficients(["2/7", "1/3", "5/3"])
    for v, q in zip(c.a, c.exact):
        assert abs(v - float(q)) <= 1e-15 * float(q)


def _spec(coeffs, k_cap=16, **tol):
    return ProblemSpec(coeffs, BoundaryData.zeros(coeffs.n), Tolerances(**tol), k_cap)


def test_validate_ok():
    assert validate_problem(_spec(make_coefficients(["1", "2"]))) == []


def test_validate_k_cap():
    assert validate_problem(_spec(make_coefficients(["1"]), k_cap=0))


def test_validate_tolerance():
    assert validate_problem(_spec(make_coefficients(["1"]), series_tol=0.0))


def test_evaluate_callable_scalar_and_pointwise():
    x = np.linspace(0, 1, 5)
    assert np.all(evaluate_callable(lambda t: 3.0, x) == 3.0)
    import math

    np.testing.assert_allclose(evaluate_callable(lambda t: math.sin(t), x), np.sin(x))


def test_evaluate_callable_rejects_nonfinite():
    with pytest.raises(ValueError):
        evaluate_callable(lambda t: np.full_like(t, np.nan), np.linspace(0, 1, 3))
