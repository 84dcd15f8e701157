"""Quadrature rules against closed forms and mpmath."""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cesaro_lab.quadrature import depth_for, gauss_jacobi, gauss_laguerre, gauss_legendre, graded_rule, panel_rule


@pytest.mark.parametrize("n", [1, 4, 16])
def test_legendre_exact_for_polynomials(n):
    r = gauss_legendre(n)
    for k in range(2 * n):
        assert abs(r.integrate(r.nodes**k) - 1.0 / (k + 1)) < 1e-14


@given(st.floats(min_value=-0.95, max_value=3.0), st.floats(min_value=-0.95, max_value=3.0))
def test_jacobi_moments_are_beta_values(a, b):
    r = gauss_jacobi(12, a, b)
    for k in range(5):
        ref = math.exp(math.lgamma(a + k + 1) + math.lgamma(b + 1) - math.lgamma(a + b + k + 2))
        assert abs(r.integrate(r.nodes**k) - ref) <= 1e-11 * ref


def test_laguerre_moments():
    r = gauss_laguerre(20)
    for k in range(10):
        assert abs(r.integrate(r.nodes**k) - math.factorial(k)) <= 1e-11 * math.factorial(k)


def _singular_reference(a, b, phi):
    # substitute x = u^{1/(a+1)} on [0, 1/2] and 1 - x = v^{1/(b+1)} on [1/2, 1],
    # which removes both endpoint singularities before mpmath integrates
    mp.mp.dps = 30
    pa, pb = a + 1, b + 1

    def left(u):
        x = u ** (1 / mp.mpf(pa))
        return (1 - x) ** b * phi(x) / pa

    def right(v):
        c = v ** (1 / mp.mpf(pb))
        return (1 - c) ** a * phi(1 - c) / pb

    return complex(mp.quad(left, [0, mp.mpf(0.5) ** pa]) + mp.quad(right, [0, mp.mpf(0.5) ** pb]))


@pytest.mark.parametrize("a,b", [(-0.5, 0.0), (0.0, -0.9), (-0.7, -0.3), (1.5, 2.0)])
def test_graded_rule_oscillatory_singular(a, b):
    # ∫ x^a (1-x)^b x^{5i} cos(x) dx, singular at one or both ends
    r = graded_rule(a, b)
    val = r.integrate(r.nodes ** (5j) * np.cos(r.nodes))
    ref = _singular_reference(a, b, lambda x: x ** mp.mpc(0, 5) * mp.cos(x))
    assert abs(val - ref) < 1e-12 * max(1.0, abs(ref))


def test_graded_rule_complement_is_accurate():
    r = graded_rule(0.0, -0.5)
    assert np.all(r.complement() > 0)
    assert np.allclose(r.complement(), 1 - r.nodes, atol=1e-15)


def test_panel_rule_total_mass():
    r = panel_rule(np.array([0.0, 0.1, 0.5, 1.0]), 8)
    assert abs(r.weights.sum() - 1.0) < 1e-15
    assert abs(r.integrate(np.exp(r.nodes)) - (math.e - 1)) < 1e-14


def test_depth_for_makes_tail_negligible():
    for a in (-0.9, -0.5, 0.0, 2.0):
        d = depth_for(a)
        assert d ** (a + 1) <= 1.0001e-17
