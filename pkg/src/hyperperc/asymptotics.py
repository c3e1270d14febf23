"""Closed-form asymptotic expressions and the line-wise lower bound on p_c.

Rational coefficients are kept as ``fractions.Fraction``; floats appear only
when an expression is evaluated at concrete (d, n).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errg import exact_susceptibility


@dataclass(frozen=True)
class ExpansionValue:
    """Truncated expansion: ``terms[k]`` multiplies ``m**-(k+1)``."""
    terms: tuple
    m: int
    error_order: str

    @property
    def term_values(self) -> tuple:
        return tuple(float(c) / self.m ** (k + 1) for k, c in enumerate(self.terms))

    @property
    def value(self) -> float:
        return float(sum(Fraction(c) / self.m ** (k + 1) for k, c in enumerate(self.terms)))

    def __float__(self):
        return self.value


def cube_root(V: int) -> float:
    """V^(1/3), exact when V is a perfect cube (64 ** (1/3) is 3.9999999999999996)."""
    r = round(V ** (1.0 / 3.0))
    return float(r) if r**3 == V else V ** (1.0 / 3.0)


def _check_lambda(lam):
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"lambda must lie in [0, 1), got {lam!r}")


def chi_formula(lam: float, n: int) -> float:
    """Two-term susceptibility of the subcritical ERRG with p = lam/(n-1)."""
    _check_lambda(lam)
    return 1.0 / (1.0 - lam) - (2 * lam**2 - lam**4) / (2 * (1.0 - lam) ** 4) / n


def second_moment_formula(lam: float) -> float:
    _check_lambda(lam)
    return 1.0 / (1.0 - lam) ** 3


def surplus_formula(lam: float, n: int) -> float:
    _check_lambda(lam)
    return lam**3 / (2 * (1.0 - lam) ** 2) / n


def chi_line_coefficient(d: int) -> Fraction:
    """(2d^2 - 1) / (2 (d-1)^3)."""
    if d < 2:
        raise ValueError("line susceptibility correction needs d >= 2")
    return Fraction(2 * d * d - 1, 2 * (d - 1) ** 3)


def chi_line_formula(p: float, d: int, n: int) -> float:
    """Line-cluster susceptibility near p = 1/m, with the geometric factor 1/(1 - p(n-1))."""
    lam = p * (n - 1)
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"need 0 <= p(n-1) < 1, got {lam!r}")
    m = d * (n - 1)
    return (1.0 / (1.0 - lam)) * (1.0 - float(chi_line_coefficient(d)) / m)


def pc_coefficient(d: int) -> Fraction:
    if d < 2:
        raise ValueError("the second-order critical-point coefficient needs d >= 2")
    return Fraction(2 * d * d - 1, 2 * (d - 1) ** 2)


def pc_expansion(d: int, n: int) -> ExpansionValue:
    """m^-1 + (2d^2-1)/(2(d-1)^2) m^-2."""
    c2 = pc_coefficient(d)
    return ExpansionValue((Fraction(1), c2), d * (n - 1), "O(m^-3 + m^-1 V^-1/3)")


def pi_coefficients(d: int) -> tuple[Fraction, Fraction]:
    """(lower coefficient of Pi^(0), upper coefficient of Pi^(1)), both multiplying m^-1."""
    if d < 2:
        raise ValueError("lace-expansion coefficients need d >= 2")
    return Fraction(2 * d - 1, 2 * (d - 1) ** 2), Fraction(d * d + d - 1, (d - 1) ** 2)


def pc_from_pi(pi_hat: float, theta: float, m: int, V: int) -> float:
    """Solve m p = 1/(1 + pi_hat) + V^(-1/3)/theta for p."""
    if theta <= 0:
        raise ValueError("theta must be positive")
    if pi_hat <= -1:
        raise ValueError("pi_hat must exceed -1")
    return (1.0 / (1.0 + pi_hat) + 1.0 / (cube_root(V) * theta)) / m


def gw_mean_progeny(chi_line: float, d: int) -> float:
    denom = 1.0 - (d - 1) * (chi_line - 1.0)
    if denom <= 0:
        raise ValueError(
            f"supercritical line-wise branching: (d-1)(chi_line-1) = {1 - denom:.6g} >= 1"
        )
    return chi_line / denom


def _bisect(f, lo, hi, rel_tol=1e-15, max_iter=400):
    """Smallest bracket [lo, hi] with f(lo) < 0 <= f(hi), shrunk to float resolution."""
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= rel_tol * hi:
            break
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return lo, hi


def line_supercritical_point(d: int, n: int) -> float:
    """The p at which (d-1)(chi_line(p) - 1) reaches 1 (exact ERRG chi_line)."""
    target = 1.0 + 1.0 / (d - 1)
    lo, hi = _bisect(lambda p: exact_susceptibility(n, p) - target, 0.0, 1.0)
    return lo


def pl_lower_bound(d: int, n: int, theta: float) -> float:
    """Line-wise lower bound on p_c(theta) using the exact ERRG line susceptibility."""
    if d < 2:
        raise ValueError("the line-wise bound needs d >= 2")
    if theta <= 0:
        raise ValueError("theta must be positive")
    V = n**d
    target = theta * cube_root(V)
    if target < 1.0:
        raise ValueError(f"theta V^(1/3) = {target:.6g} < 1: no solution with p >= 0")
    if target == 1.0:
        return 0.0
    p_sup = line_supercritical_point(d, n)

    def f(p):
        c = exact_susceptibility(n, p)
        denom = 1.0 - (d - 1) * (c - 1.0)
        if denom <= 0:
            return 1.0
        return c / denom - target

    if f(p_sup) < 0:
        raise ValueError("denominator vanishes before the target is reached")
    lo, hi = _bisect(f, 0.0, p_sup)
    return lo if abs(f(lo)) <= abs(f(hi)) else hi
