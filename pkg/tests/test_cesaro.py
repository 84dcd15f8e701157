"""Cesàro-Hardy operators, resolvent integrals and the functional L^λ."""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cesaro_lab.cesaro import (
    OrderParameter,
    ResolventWarning,
    apply_C_alpha,
    apply_C_alpha_star,
    c1_nystrom_matrix,
    cesaro_norm_bound,
    classify_L,
    eigen_multiplier,
    functional_L,
    unbounded_prediction,
    unbounded_witness,
    resolvent_Lambda0,
    resolvent_Lambda1,
    unboundedness_sweep,
)
from cesaro_lab.funcspace import GridFunction, default_grid, lp_norm, monomial, pairing
from cesaro_lab.koopman import apply_A

PTS = np.array([1e-6, 0.03, 0.4, 0.95])


def _rel(a, b):
    return lp_norm(a - b, 2) / lp_norm(b, 2)


def _smooth(g):
    return GridFunction.from_callable(g, lambda s: np.cos(3 * s) + s**2, "smooth", power=0.0)


def test_order_parameter_validation():
    with pytest.raises(ValueError):
        OrderParameter(-0.5 + 1j)
    with pytest.raises(ValueError):
        apply_C_alpha(0.0, _smooth(default_grid(256)))


@pytest.mark.parametrize("alpha", [1.0, 0.5, 1 + 1j, 2.5])
@pytest.mark.parametrize("lam", [-1.0, -2 + 3j, -0.7 - 5j])
def test_eigen_identity(grid, alpha, lam):
    gl = monomial(lam, grid)
    assert _rel(apply_C_alpha(alpha, gl), eigen_multiplier(alpha, lam) * gl) < 1e-9


def test_eigen_multiplier_mpmath():
    for alpha, lam in ((1.0, -1.0), (0.5, -2 + 3j), (1 + 1j, -0.75 + 0.5j)):
        a, l_ = mp.mpc(alpha), mp.mpc(lam)
        ref = complex(mp.gamma(a + 1) * mp.gamma(-l_) / mp.gamma(a - l_))
        assert abs(eigen_multiplier(alpha, lam) - ref) < 1e-13 * abs(ref)
    # C_1 g_λ = g_λ / (-λ)
    assert abs(eigen_multiplier(1.0, -3 + 2j) - 1 / (3 - 2j)) < 1e-15


@pytest.mark.parametrize("alpha", [1.0, 0.3, 2 - 0.5j])
def test_C_alpha_star_mpmath(grid, alpha):
    f = GridFunction.from_callable(grid, lambda s: np.exp(s) + 1j * s**2)
    got = apply_C_alpha_star(alpha, f)(PTS)
    a = mp.mpc(alpha)
    r = 1 / min(a.real, 1)
    for s, v in zip(PTS, got):
        # u = s + (1-s) x^{1/Re α} absorbs the (u-s)^{α-1} endpoint singularity
        def integrand(x):
            w = x**r
            u = s + (1 - s) * w
            return a * (1 - s) ** a * w ** (a - 1) * u ** (-a) * (mp.exp(u) + 1j * u**2) * r * x ** (r - 1)

        ref = mp.quad(integrand, [0, 0.5, 1])
        assert abs(v - complex(ref)) < 1e-9 * max(1.0, abs(complex(ref)))


def test_C_star_of_constant_is_minus_log(grid):
    one = GridFunction.from_callable(grid, lambda s: np.ones_like(s, dtype=complex))
    ref = GridFunction.from_callable(grid, lambda s: -np.log(s) + 0j)
    assert _rel(apply_C_alpha_star(1.0, one), ref) < 1e-10


@pytest.mark.parametrize("alpha", [1.0, 0.5, 1.5 + 1j])
def test_subordination_agrees_with_direct(grid, alpha):
    f = _smooth(grid)
    assert _rel(apply_C_alpha(alpha, f, method="subordination"), apply_C_alpha(alpha, f)) < 1e-8
    assert _rel(apply_C_alpha_star(alpha, f, method="subordination"), apply_C_alpha_star(alpha, f)) < 1e-8


@settings(max_examples=6)
@given(st.floats(min_value=0.2, max_value=3.0), st.floats(min_value=-2.0, max_value=2.0))
def test_duality(grid_fine, a, b):
    # grid pairing converges slowly for the oscillatory s^{-i Im α} part of C_α* h
    g = grid_fine
    alpha = complex(a, b)
    f = _smooth(g)
    h = GridFunction.from_callable(g, lambda s: np.exp(s) - 1j * s)
    lhs = pairing(apply_C_alpha(alpha, f), h)
    rhs = pairing(f, apply_C_alpha_star(alpha, h))
    assert abs(lhs - rhs) < 1e-6 * abs(lhs)


def test_unknown_method(grid):
    with pytest.raises(ValueError):
        apply_C_alpha(1.0, _smooth(grid), method="nope")
    with pytest.raises(ValueError):
        resolvent_Lambda1(1.0, _smooth(grid), method="nope")


@pytest.mark.parametrize("lam", [0.5, 1.0, 0.2 + 2j])
@pytest.mark.parametrize("k", [0, 2])
def test_resolvents_on_powers(grid, lam, k):
    f = GridFunction.from_callable(grid, lambda s: s**k + 0j, power=float(k))
    s = grid.nodes
    ref0 = s**k / (lam + k + 1)
    ref1 = s**lam * (1 - s ** (k - lam)) / (k - lam)
    assert np.max(np.abs(resolvent_Lambda0(lam, f).values - ref0)) < 1e-12
    assert np.max(np.abs(resolvent_Lambda1(lam, f).values - ref1)) < 1e-11


@pytest.mark.parametrize("lam", [0.5, 1.0])
def test_resolvents_match_laplace_transforms(grid, lam):
    f = _smooth(grid)
    assert _rel(resolvent_Lambda0(lam, f), resolvent_Lambda0(lam, f, method="laplace")) < 1e-9
    assert _rel(resolvent_Lambda1(lam, f), resolvent_Lambda1(lam, f, method="laplace")) < 1e-9


def test_Lambda0_inverts_lambda_minus_A(grid):
    f = _smooth(grid)
    g = resolvent_Lambda0(0.5, f)
    r = (0.5 * g - apply_A(g) - f).values
    sel = (grid.nodes > 1e-3) & (grid.nodes < 1 - 1e-3)
    assert np.sqrt(np.sum(grid.weights[sel] * np.abs(r[sel]) ** 2)) < 1e-6


def test_resolvent_region_flag(grid):
    f = _smooth(grid)
    assert resolvent_Lambda0(1.0, f).meta["in_resolvent"]
    with pytest.warns(ResolventWarning):
        out = resolvent_Lambda0(-0.6, f)
    assert not out.meta["in_resolvent"]
    with pytest.warns(ResolventWarning):
        resolvent_Lambda1(-0.6, f)


def test_C1_is_inverse_of_minus_A(grid):
    f = _smooth(grid)
    g = apply_C_alpha(1.0, f)
    assert np.max(np.abs(apply_A(g).values + f.values)) < 1e-8


def test_classify_L():
    assert classify_L(-1.0, 2.0) == "bounded"
    assert classify_L(-0.5, 2.0) == "unbounded"
    assert classify_L(-0.2, 2.0) == "undefined"
    assert classify_L(-1.0, 1.0) == "bounded"
    assert classify_L(-1 / 3, 3.0) == "unbounded"


def test_functional_L_value(grid):
    f = GridFunction.from_callable(grid, lambda s: s + 0j)
    # ∫ u · u^{-(λ+1)} du = 1/(1-λ) at λ = -1
    v = functional_L(-1.0, f)
    assert v.classification == "bounded"
    assert abs(v.value - 0.5) < 1e-14


@pytest.mark.parametrize("p", [2.0, 3.0, 1.5])
def test_unbounded_witness_matches_closed_form(p):
    n = 1e4
    g = default_grid(2048, breakpoints=(1 / n, 0.5))
    fn = unbounded_witness(n, p, g)
    L, norm, ratio = unbounded_prediction(n, p)
    assert abs(functional_L(-1 / p, fn, p).value / L - 1) < 1e-10
    assert abs(lp_norm(fn, p) / norm - 1) < 1e-10


def test_unbounded_closed_form_p2():
    for n in (1e2, 1e4, 1e6):
        ratio = unbounded_prediction(n, 2.0)[2]
        ref = 2 * (math.sqrt(math.log(n)) - math.sqrt(math.log(2))) / math.sqrt(
            math.log(math.log(n)) - math.log(math.log(2))
        )
        assert abs(ratio - ref) < 1e-14 * ref


def test_unboundedness_sweep_records():
    recs = unboundedness_sweep(2.0, [1e2, 1e4, 1e6], grid_size=1024)
    assert [r.identity for r in recs] == ["L-unbounded-ratio"] * 3 + ["L-unbounded-increasing"]
    assert all(r.verdict == "pass" for r in recs)
    with pytest.raises(ValueError):
        unboundedness_sweep(1.0, [10.0])


def test_norm_bounds():
    assert abs(cesaro_norm_bound(1.0, 2.0) - 2.0) < 1e-14
    assert abs(cesaro_norm_bound(0.5, 2.0) - math.pi / 2) < 1e-14
    # p = 3: Γ(1)Γ(2/3)/Γ(5/3) = 3/2
    assert abs(cesaro_norm_bound(1.0, 3.0) - 1.5) < 1e-14
    assert cesaro_norm_bound(1.0, 1.0) == math.inf


def test_nystrom_matrix_exact_on_polynomials(grid):
    M = c1_nystrom_matrix(grid)
    s = grid.nodes
    for k in (0, 1, 3, 7):
        assert np.max(np.abs(M @ s**k - s**k / (k + 1))) < 1e-12
