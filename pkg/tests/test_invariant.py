"""Monomial spaces, the Müntz sum, cyclic iterates, generalized eigenspaces, Caradus witnesses."""

from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cesaro_lab.funcspace import (
    GridFunction,
    default_grid,
    distance_to_span,
    log_monomial,
    lp_norm,
    monomial,
    random_smooth,
)
from cesaro_lab.invariant import (
    MonomialSpaceSpec,
    caradus_preimage,
    caradus_witness,
    cyclic_distance_closed_form,
    cyclic_iterate_distance,
    generalized_eigenspace_residual,
    log_cyclic_iterate_distance,
    log_gram,
    monomial_invariance_residual,
    muntz_criterion,
    shift_matrix,
    write_muntz_trace,
)
from cesaro_lab.koopman import apply_T

# -- monomial spaces -----------------------------------------------------------


def test_spec_validation():
    with pytest.raises(ValueError):
        MonomialSpaceSpec(())
    with pytest.raises(ValueError):
        MonomialSpaceSpec((-1.0, -0.4))
    spec = MonomialSpaceSpec((-1.0, -2 + 1j))
    with pytest.raises(ValueError):
        spec.combination([1.0], default_grid(128))


@given(
    st.lists(st.complex_numbers(max_magnitude=5), min_size=3, max_size=3),
    st.floats(min_value=0.0, max_value=3.0),
)
def test_monomial_span_is_T_invariant(coefs, t):
    g = default_grid(512)
    spec = MonomialSpaceSpec((-1.0, -2 + 1j, -0.8 - 3j))
    if max(abs(c) for c in coefs) < 1e-3:
        return
    scale = lp_norm(spec.combination(coefs, g), 2)
    assert monomial_invariance_residual(spec, t, coefs, g) < 1e-8 * max(scale, 1.0)


def test_random_function_is_not_in_a_small_span(grid):
    spec = MonomialSpaceSpec((-1.0, -2.0))
    f = GridFunction.from_callable(grid, lambda s: np.sin(7 * s))
    assert distance_to_span(f, spec.basis(grid)) > 0.1


# -- Müntz ---------------------------------------------------------------------


def test_muntz_examples():
    v = muntz_criterion(lambda n: -1 + 1j * n, 4096)
    assert (v.verdict, v.conclusion) == ("convergent", "nontrivial-subspace")
    w = muntz_criterion(lambda n: -0.5 - 1 / (n + 1), 4096)
    assert (w.verdict, w.conclusion) == ("divergent", "dense")
    c = muntz_criterion(lambda n: -2.0, 128)
    assert c.verdict == "divergent"
    for x in (v, w, c):
        assert np.all(np.diff(x.partial_sums) >= 0)
        assert not x.certified and x.method == "dyadic-block-heuristic"


def test_muntz_terms_closed_form():
    v = muntz_criterion(lambda n: -1 + 1j * n, 128)
    n = np.arange(128)
    assert np.allclose(v.terms, 1 / (1 + n**2), rtol=1e-15)
    # Σ_{n≥0} 1/(1+n²) = (1 + π coth π)/2
    limit = (1 + math.pi / math.tanh(math.pi)) / 2
    big = muntz_criterion(lambda n: -1 + 1j * n, 1 << 16)
    assert abs(big.partial_sums[-1] - limit) < 2e-5


def test_muntz_tail_bound_certifies():
    v = muntz_criterion(lambda n: -1 + 1j * n, 256, tail_bound=lambda N: 1.0 / (N - 1))
    assert v.certified and v.method == "tail-bound" and v.verdict == "convergent"


def test_muntz_accepts_iterables_and_checks_input():
    v = muntz_criterion(iter([-1 + 1j * n for n in range(200)]), 200)
    assert v.terms_used == 200
    with pytest.raises(ValueError):
        muntz_criterion([-1.0] * 50, 100)
    with pytest.raises(ValueError):
        muntz_criterion(lambda n: -1.0, 10)
    with pytest.raises(ValueError):
        muntz_criterion(lambda n: -0.5 + 1j * n, 128)


@given(st.randoms(use_true_random=False))
def test_muntz_final_sum_invariant_under_reordering(rnd):
    seq = [-1 + 1j * n for n in range(256)]
    shuffled = seq[:]
    rnd.shuffle(shuffled)
    a = muntz_criterion(seq, 256).partial_sums[-1]
    b = muntz_criterion(shuffled, 256).partial_sums[-1]
    assert abs(a - b) < 1e-13 * a


def test_muntz_trace(tmp_path):
    v = muntz_criterion(lambda n: -1 + 1j * n, 128)
    path = write_muntz_trace(v, tmp_path / "m.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "n,term,partial_sum" and len(lines) == 129


# -- cyclic iterates -----------------------------------------------------------


@pytest.mark.parametrize("t", [0.5, 1.0])
def test_cyclic_distance_closed_form(grid, t):
    f = GridFunction.from_callable(grid, lambda s: 1.0 + s)
    for n in range(0, 12):
        d = cyclic_iterate_distance(-1.0, f, 1.0, t, n)
        assert abs(d / (math.exp(-n * t) / math.sqrt(3)) - 1) < 1e-10


def test_cyclic_distance_matches_quadrature_form(grid):
    lam = -2 + 1j
    fn = lambda s: 1.0 + np.sqrt(s)  # noqa: E731
    f = GridFunction.from_callable(grid, fn)
    for n in (1, 5, 30):
        d = cyclic_iterate_distance(lam, f, 1.0, 0.5, n)
        ref = cyclic_distance_closed_form(lam, fn, 1.0, 0.5, n, grid)
        assert abs(d - ref) < 1e-12 * ref
    # ‖g_λ √(e^{-nt}s)‖ = e^{-nt/2} / √(-2 Re λ)
    n = 30
    exact = math.exp(-n * 0.5 / 2) / math.sqrt(-2 * lam.real)
    assert abs(cyclic_iterate_distance(lam, f, 1.0, 0.5, n) - exact) < 1e-10 * exact


def test_log_cyclic_trivial_case(grid):
    one = GridFunction.from_callable(grid, lambda s: np.ones_like(s, dtype=complex))
    for n in (1, 4, 16):
        d = log_cyclic_iterate_distance(-1.0, 1, one, 1.0, 1.0, n)
        assert d.to_h_n < 1e-12
        assert abs(d.h_n_to_target - math.sqrt(2) / n) < 1e-10 / n


def test_log_cyclic_rates(grid):
    f = GridFunction.from_callable(grid, lambda s: 1.0 + s)
    ns = [8, 16, 32, 64]
    for m in (1, 2):
        ds = [log_cyclic_iterate_distance(-1.0, m, f, 1.0, 1.0, n) for n in ns]
        assert all(b.to_h_n <= a.to_h_n for a, b in zip(ds, ds[1:]))
        assert all(b.h_n_to_target < a.h_n_to_target for a, b in zip(ds, ds[1:]))
    ds = [log_cyclic_iterate_distance(-1.0, 1, f, 1.0, 1.0, n) for n in ns]
    slope = np.polyfit(np.log(ns), np.log([d.h_n_to_target for d in ds]), 1)[0]
    assert abs(slope + 1) < 0.1


# -- generalized eigenspaces ---------------------------------------------------


def test_shift_matrix_expands_binomials():
    U = shift_matrix(3, 0.7)
    x = 1.3
    powers = x ** np.arange(4)
    assert np.allclose(powers @ U, (x - 0.7) ** np.arange(4))


def test_log_gram_against_quadrature(grid):
    lam, m = -1.3 + 2j, 3
    G = log_gram(lam, m)
    for i in range(m + 1):
        for j in range(m + 1):
            gi, gj = log_monomial(lam, i, grid), log_monomial(lam, j, grid)
            val = np.sum(grid.weights * gi.values * np.conj(gj.values))
            assert abs(val - G[i, j]) < 1e-10 * max(1.0, abs(G[i, j]))


@pytest.mark.parametrize("lam", [-1.0, -2 + 1j, -0.75 + 3j])
@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_nilpotency(lam, m):
    assert generalized_eigenspace_residual(lam, m, 0.7) < 1e-12


@pytest.mark.parametrize("lam", [-1.0, -2 + 1j])
@pytest.mark.parametrize("m", [1, 2])
def test_growth_at_power_m_closed_form(lam, m):
    a = -(2 * complex(lam).real + 1)
    t = 0.7
    closed = math.exp(m * complex(lam).real * t) * math.factorial(m) * t**m * a**m / math.sqrt(math.factorial(2 * m))
    got = generalized_eigenspace_residual(lam, m, t, power=m, relative=True)
    assert abs(got / closed - 1) < 1e-12


def test_pointwise_method_agrees(grid):
    for lam, m in ((-1.0, 1), (-2 + 1j, 2)):
        c = generalized_eigenspace_residual(lam, m, 0.7, power=m)
        p = generalized_eigenspace_residual(lam, m, 0.7, power=m, method="pointwise", grid=grid)
        assert abs(c - p) < 1e-8 * c
        assert generalized_eigenspace_residual(lam, m, 0.7, method="pointwise", grid=grid) < 1e-8
    with pytest.raises(ValueError):
        generalized_eigenspace_residual(-1.0, 1, 0.7, method="pointwise")
    with pytest.raises(ValueError):
        generalized_eigenspace_residual(-0.2, 1, 0.7)


# -- Caradus witnesses ---------------------------------------------------------


def test_preimage_mu_zero(grid_cut):
    rng = np.random.default_rng(0)
    f = random_smooth(grid_cut, rng)
    g = caradus_preimage(1.0, 0.0, f.analytic)
    s = grid_cut.nodes
    image = -math.exp(-1) * g(math.exp(-1) * s)
    assert np.max(np.abs(image - f.values)) < 1e-13


def test_preimage_band_recursion(grid_cut):
    mu = 0.3 * cmath.exp(1j * math.pi / 3)
    rng = np.random.default_rng(1)
    f = random_smooth(grid_cut, rng)
    g = caradus_preimage(1.0, mu, f.analytic)
    s = grid_cut.nodes
    image = mu * g(s) - math.exp(-1) * g(math.exp(-1) * s)
    assert np.max(np.abs(image - f.values)) < 1e-12 * np.abs(f.values).max()
    with pytest.raises(ValueError):
        caradus_preimage(0.0, mu, f.analytic)


@pytest.mark.parametrize("mu", [0.0, 0.3 * cmath.exp(1j * math.pi / 3)])
def test_caradus_universal_cases(grid_cut, mu):
    w = caradus_witness(1.0, mu, grid=grid_cut)
    assert w.universal and w.decay_ok
    assert w.kernel_dim_witness >= 10
    assert np.max(w.kernel_residuals) < 1e-10
    assert w.surjectivity_residual < 1e-8


def test_caradus_non_universal(grid_cut):
    w = caradus_witness(1.0, 0.7, grid=grid_cut)
    assert not w.universal and not w.decay_ok and w.band_ratio >= 1
    assert "not in L²" in w.notes


def test_kernel_elements_are_annihilated(grid_cut):
    mu = 0.3 * cmath.exp(1j * math.pi / 3)
    lam = cmath.log(mu)
    for k in (-3, 0, 5):
        gk = monomial(lam + 2j * math.pi * k, grid_cut)
        r = mu * gk - apply_T(1.0, gk)
        assert lp_norm(r, 2) < 1e-12 * lp_norm(gk, 2)
