import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hyperperc.asymptotics import (
    chi_formula,
    cube_root,
    chi_line_coefficient,
    chi_line_formula,
    gw_mean_progeny,
    pc_coefficient,
    pc_expansion,
    pc_from_pi,
    pi_coefficients,
    pl_lower_bound,
    second_moment_formula,
    surplus_formula,
)
from hyperperc.errg import exact_susceptibility


def test_chi_formula():
    assert chi_formula(0.5, 100) == pytest.approx(1.965)
    for n in (10, 1000):
        assert chi_formula(0.5, n) == pytest.approx(2 - 3.5 / n)
    assert chi_formula(0.0, 10) == 1.0
    with pytest.raises(ValueError):
        chi_formula(1.0, 10)


def test_second_moment_and_surplus():
    assert second_moment_formula(0.5) == pytest.approx(8.0)
    assert surplus_formula(0.5, 40) == pytest.approx(0.25 / 40)
    assert second_moment_formula(0.0) == 1.0 and surplus_formula(0.0, 5) == 0.0
    assert second_moment_formula(0.7) == pytest.approx(0.3**-3)
    assert surplus_formula(0.7, 1) == pytest.approx(1.90555, abs=1e-4)


def test_chi_line():
    assert chi_line_coefficient(2) == Fraction(7, 2)
    assert chi_line_coefficient(3) == Fraction(17, 16)
    d, n = 3, 20
    m = d * (n - 1)
    main = chi_line_formula(1 / m, d, n) / (1 - 17 / 16 / m)
    assert main == pytest.approx(d / (d - 1))
    with pytest.raises(ValueError):
        chi_line_formula(0.2, 2, 10)
    with pytest.raises(ValueError):
        chi_line_coefficient(1)


def test_pc_expansion():
    assert pc_coefficient(2) == Fraction(7, 2)
    assert pc_coefficient(3) == Fraction(17, 8)
    assert pc_coefficient(4) == Fraction(31, 18)
    ex = pc_expansion(4, 100)
    assert ex.m == 396
    assert ex.term_values[0] == pytest.approx(0.00252525, abs=1e-8)
    assert ex.term_values[1] == pytest.approx(0.00001098, abs=1e-8)
    assert ex.value == pytest.approx(sum(ex.term_values))
    assert "V^-1/3" in ex.error_order
    with pytest.raises(ValueError):
        pc_expansion(1, 10)


def test_pi_coefficients():
    assert pi_coefficients(3) == (Fraction(5, 8), Fraction(11, 4))
    assert pi_coefficients(2) == (Fraction(3, 2), Fraction(5))
    lo, up = pi_coefficients(10**6)
    assert float(lo) < 1e-5 and abs(float(up) - 1) < 1e-5


def test_pc_from_pi():
    assert pc_from_pi(0.0, math.inf, 50, 1000) == pytest.approx(1 / 50)
    m, c = 1000, 2.0
    p = pc_from_pi(-c / m, math.inf, m, 10**6)
    assert p * m == pytest.approx(1 + c / m, abs=10 / m**2)
    with pytest.raises(ValueError):
        pc_from_pi(-1.0, 1.0, 10, 100)
    with pytest.raises(ValueError):
        pc_from_pi(0.0, 0.0, 10, 100)


def test_gw_mean_progeny():
    assert gw_mean_progeny(1.0, 3) == 1.0
    assert gw_mean_progeny(1.5, 2) == pytest.approx(3.0)
    assert gw_mean_progeny(1.25, 3) == pytest.approx(2.5)
    with pytest.raises(ValueError):
        gw_mean_progeny(2.0, 2)


def test_pl_lower_bound_examples():
    # theta V^(1/3) = 1 gives p = 0
    assert pl_lower_bound(3, 10, 0.1) == 0.0
    with pytest.raises(ValueError):
        pl_lower_bound(3, 10, 0.05)
    with pytest.raises(ValueError):
        pl_lower_bound(1, 10, 1.0)
    p = pl_lower_bound(2, 50, 1.0)
    c = exact_susceptibility(50, p)
    assert abs(gw_mean_progeny(c, 2) - 2500 ** (1 / 3)) < 1e-10


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("n", [10, 20, 30, 50])
def test_pl_below_expansion(d, n):
    assert pl_lower_bound(d, n, 1.0) < pc_expansion(d, n).value


def test_pl_large_theta_still_solvable():
    # the progeny mean diverges as the line-wise branching becomes critical
    p = pl_lower_bound(4, 10, 100.0)
    target = 100 * 10 ** (4 / 3)
    assert gw_mean_progeny(exact_susceptibility(10, p), 4) == pytest.approx(target, rel=1e-6)


def test_cube_root():
    assert cube_root(64) == 4.0 and cube_root(1000) == 10.0
    assert cube_root(100) == pytest.approx(100 ** (1 / 3))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 0.95), st.integers(10, 10**6))
def test_formula_monotonicity(lam, n):
    assert chi_formula(lam, n) <= 1 / (1 - lam)
    assert second_moment_formula(lam) >= 1 / (1 - lam) ** 2
    assert surplus_formula(lam, n) > 0
