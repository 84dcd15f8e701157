"""Truncated sequence-space operators and the Poisson maps."""

from __future__ import annotations

import csv
import json
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cesaro_lab.discrete import (
    INTERTWINING_KINDS,
    DiscreteOperatorMatrix,
    SequenceVector,
    export_matrix,
    intertwine_residual,
    intertwine_sides,
    map_V,
    map_V_star,
    matrix_C_alpha_disc,
    matrix_C_alpha_star_disc,
    matrix_S_disc,
    matrix_T_disc,
)
from cesaro_lab.funcspace import GridFunction

times = st.floats(min_value=0.0, max_value=5.0)


def _k(alpha, n):
    a = mp.mpc(alpha)
    return mp.gamma(n + a) / (mp.gamma(a) * mp.factorial(n))


@pytest.mark.parametrize("alpha", [1.0, 0.5, 2.0, 1 + 1j])
def test_C_alpha_disc_entries(alpha):
    M = matrix_C_alpha_disc(alpha, 12).entries
    for n, j in ((0, 0), (5, 2), (11, 0), (11, 11), (7, 3)):
        ref = complex(_k(alpha, n - j) / _k(complex(alpha) + 1, n))
        assert abs(M[n, j] - ref) < 1e-14 * abs(ref)
    assert np.all(np.triu(M, 1) == 0)


@pytest.mark.parametrize("alpha", [1.0, 0.3, 2 - 1j])
def test_C_alpha_disc_rows_sum_to_one(alpha):
    # Σ_{j≤n} k^α(n-j) = k^{α+1}(n)
    M = matrix_C_alpha_disc(alpha, 200).entries
    assert np.max(np.abs(M.sum(axis=1) - 1)) < 1e-12


def test_C1_disc_is_running_mean():
    M = matrix_C_alpha_disc(1.0, 6).entries
    assert np.allclose(M, np.tril(np.ones((6, 6))) / np.arange(1, 7)[:, None])


def test_star_is_transpose():
    M = matrix_C_alpha_disc(0.7, 20)
    Ms = matrix_C_alpha_star_disc(0.7, 20)
    assert Ms.structure == "upper-triangular"
    assert np.array_equal(Ms.entries, M.entries.T)


def test_T_disc_entries_binomial():
    t = 0.5
    T = matrix_T_disc(t, 40).entries
    x = mp.e ** (-t)
    for n, j in ((0, 0), (10, 3), (39, 20), (39, 0)):
        ref = mp.binomial(n, j) * x**j * (1 - x) ** (n - j)
        assert abs(T[n, j] - float(ref)) < 1e-13 * float(ref)


@given(times, times)
def test_T_disc_semigroup(s, t):
    N = 64
    lhs = matrix_T_disc(s, N).entries @ matrix_T_disc(t, N).entries
    assert np.max(np.abs(lhs - matrix_T_disc(s + t, N).entries)) < 1e-12


@given(times)
def test_T_disc_stochastic_and_S_transpose(t):
    T = matrix_T_disc(t, 80).entries
    assert np.max(np.abs(T.sum(axis=1) - 1)) < 1e-12
    assert np.array_equal(matrix_S_disc(t, 80).entries, T.T) or np.max(np.abs(matrix_S_disc(t, 80).entries - T.T)) < 1e-15


def test_identity_at_zero_time():
    assert np.array_equal(matrix_T_disc(0.0, 5).entries, np.eye(5))
    assert np.array_equal(matrix_S_disc(0.0, 5).entries, np.eye(5))


def test_V_on_powers_mpmath(grid):
    # V(s^k)(n) = γ(n+k+1, 1) / n!
    k = 2
    f = GridFunction.from_callable(grid, lambda s: s**k + 0j)
    v = map_V(f, 30).entries
    for n in (0, 1, 10, 29):
        ref = float(mp.gammainc(n + k + 1, 0, 1) / mp.factorial(n))
        assert abs(v[n] - ref) < 1e-10 * ref


def test_V_star_of_unit_vector(grid):
    e = SequenceVector.unit(3, 10)
    g = map_V_star(e, grid)
    s = grid.nodes
    assert np.max(np.abs(g.values - s**3 / 6 * np.exp(-s))) < 1e-16


@pytest.mark.parametrize("kind", INTERTWINING_KINDS)
@pytest.mark.parametrize("param", [0.5, 1.0, 0.5 + 0.5j])
def test_intertwining_relations(grid, kind, param):
    if kind in ("S-V", "V*-T") and isinstance(param, complex):
        return
    f = GridFunction.from_callable(grid, lambda s: np.cos(3 * s) + s**2, power=0.0)
    n = np.arange(128)
    a = SequenceVector(1 / (1 + n) ** 2 + 0.3j * np.exp(-n))
    inp = f if kind in ("S-V", "C*-V") else (a, grid)
    # for Re α < 1, C_α* f ~ (1-s)^α at s = 1, which the grid resolves only to ~1e-7
    tol = 1e-12 if kind != "C*-V" or param == 1.0 else 1e-6
    assert intertwine_residual(kind, param, inp, 128) < tol


def test_intertwining_input_checks(grid):
    f = GridFunction.from_callable(grid, np.cos)
    with pytest.raises(TypeError):
        intertwine_sides("V*-T", 0.5, f, 8)
    with pytest.raises(TypeError):
        intertwine_sides("S-V", 0.5, (np.ones(8), grid), 8)
    with pytest.raises(ValueError):
        intertwine_sides("T-V", 0.5, f, 8)


def test_structure_validation():
    with pytest.raises(ValueError):
        DiscreteOperatorMatrix(np.ones((3, 3)), "lower-triangular")
    with pytest.raises(ValueError):
        DiscreteOperatorMatrix(np.ones((3, 2)))
    with pytest.raises(ValueError):
        DiscreteOperatorMatrix(np.eye(3), "banded")
    M = matrix_C_alpha_disc(1.0, 4)
    assert M.transpose().structure == "upper-triangular"
    prod = M @ M
    assert isinstance(prod, DiscreteOperatorMatrix) and prod.structure == "dense"
    v = M @ SequenceVector(np.ones(4))
    assert np.allclose(v.entries, 1.0)
    with pytest.raises(ValueError):
        matrix_C_alpha_disc(1.0, 0)


def test_export_round_trip(tmp_path):
    M = matrix_C_alpha_disc(1 + 1j, 9)
    csv_path, json_path = export_matrix(M, tmp_path / "c")
    back = np.zeros((9, 9), dtype=complex)
    with csv_path.open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 9 * 10 // 2
    for r in rows:
        back[int(r["row"]), int(r["col"])] = complex(float(r["re"]), float(r["im"]))
    assert np.array_equal(back, M.entries)
    header = json.loads(json_path.read_text())
    assert header["N"] == 9 and header["structure"] == "lower-triangular"
    assert math.isclose(header["params"]["alpha"]["im"] if isinstance(header["params"]["alpha"], dict) else 1.0, 1.0)
