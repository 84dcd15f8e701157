"""Truncated ℓ^p operators and the Poisson-kernel maps ``V``, ``V*``.

    𝒞_α a(n)   = Σ_{j≤n} k^α(n-j) a(j) / k^{α+1}(n)
    𝒞*_α a(n)  = Σ_{j≥n} k^α(j-n) a(j) / k^{α+1}(j)
    𝒯(t) a(n)  = Σ_{j≤n} C(n,j) e^{-tj} (1-e^{-t})^{n-j} a(j),   𝒮(t) = 𝒯(t)^T
    V f(n)     = ∫_0^1 t^n/n! e^{-t} f(t) dt,   V* a(t) = Σ_n t^n/n! e^{-t} a(n)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np
from scipy.special import gammaln

from .cesaro import apply_C_alpha, apply_C_alpha_star, _alpha
from .funcspace import Grid, GridFunction
from .koopman import apply_S, apply_T, _time
from .report import canonical_json, write_atomic
from .specfun import cesaro_numbers

__all__ = [
    "SequenceVector",
    "DiscreteOperatorMatrix",
    "matrix_C_alpha_disc",
    "matrix_C_alpha_star_disc",
    "matrix_T_disc",
    "matrix_S_disc",
    "map_V",
    "map_V_star",
    "intertwine_sides",
    "intertwine_residual",
    "export_matrix",
    "INTERTWINING_KINDS",
]

STRUCTURES = ("lower-triangular", "upper-triangular", "dense")


@dataclass(frozen=True, eq=False)
class SequenceVector:
    """First ``N`` entries of a sequence."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        e = np.asarray(self.entries, dtype=complex)
        if e.ndim != 1:
            raise ValueError("sequence entries must be 1-d")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def N(self) -> int:
        return self.entries.size

    @classmethod
    def unit(cls, k: int, N: int) -> SequenceVector:
        e = np.zeros(N, dtype=complex)
        e[k] = 1.0
        return cls(e)

    def norm(self, p: float = 2.0) -> float:
        return float(np.sum(np.abs(self.entries) ** p) ** (1.0 / p))


@dataclass(frozen=True, eq=False)
class DiscreteOperatorMatrix:
    """Dense ``N x N`` truncation with a structure tag checked on construction."""

    entries: np.ndarray
    structure: str = "dense"
    label: str = ""
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator matrices must be square")
        if self.structure not in STRUCTURES:
            raise ValueError(f"unknown structure {self.structure!r}")
        if self.structure == "lower-triangular" and np.any(np.triu(m, 1)):
            raise ValueError("entries above the diagonal in a lower-triangular matrix")
        if self.structure == "upper-triangular" and np.any(np.tril(m, -1)):
            raise ValueError("entries below the diagonal in an upper-triangular matrix")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def N(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, other: Any) -> Any:
        if isinstance(other, SequenceVector):
            return SequenceVector(self.entries @ other.entries)
        if isinstance(other, DiscreteOperatorMatrix):
            return DiscreteOperatorMatrix(self.entries @ other.entries, "dense",
                                          f"{self.label}*{other.label}")
        return self.entries @ other

    def transpose(self) -> DiscreteOperatorMatrix:
        flip = {"lower-triangular": "upper-triangular", "upper-triangular": "lower-triangular"}
        return DiscreteOperatorMatrix(
            self.entries.T, flip.get(self.structure, "dense"), f"({self.label})^T", self.params
        )


# ---------------------------------------------------------------------------
# matrices


def matrix_C_alpha_disc(alpha: complex, N: int) -> DiscreteOperatorMatrix:
    a = _alpha(alpha)
    if N < 1:
        raise ValueError("N must be >= 1")
    k_a = cesaro_numbers(a, N)
    k_a1 = cesaro_numbers(a + 1.0, N)
    n = np.arange(N)
    diff = n[:, None] - n[None, :]
    M = np.where(diff >= 0, k_a[np.clip(diff, 0, None)], 0.0) / k_a1[:, None]
    return DiscreteOperatorMatrix(M, "lower-triangular", f"Cdisc[{a}]", {"alpha": a})


def matrix_C_alpha_star_disc(alpha: complex, N: int) -> DiscreteOperatorMatrix:
    a = _alpha(alpha)
    M = matrix_C_alpha_disc(a, N).entries.T
    return DiscreteOperatorMatrix(M, "upper-triangular", f"Cdisc*[{a}]", {"alpha": a})


def _log_binomial(n: np.ndarray, j: np.ndarray) -> np.ndarray:
    return gammaln(n + 1.0) - gammaln(j + 1.0) - gammaln(n - j + 1.0)


def matrix_T_disc(t: float, N: int) -> DiscreteOperatorMatrix:
    """Binomial (Bernstein) lower-triangular matrix of ``𝒯(t)``."""
    t = _time(t)
    if N < 1:
        raise ValueError("N must be >= 1")
    n = np.arange(N, dtype=float)[:, None]
    j = np.arange(N, dtype=float)[None, :]
    mask = j <= n
    gap = np.where(mask, n - j, 0.0)
    if t == 0.0:
        M = np.eye(N)
    else:
        log_q = math.log(-math.expm1(-t))
        logs = _log_binomial(n, np.where(mask, j, 0.0)) - t * j + gap * log_q
        M = np.where(mask, np.exp(logs), 0.0)
    return DiscreteOperatorMatrix(M, "lower-triangular", f"Tdisc[{t}]", {"t": t})


def matrix_S_disc(t: float, N: int) -> DiscreteOperatorMatrix:
    """``𝒮(t)``: entry ``(n, j) = e^{-tn} C(j,n) (1-e^{-t})^{j-n}`` for ``j >= n``."""
    t = _time(t)
    n = np.arange(N, dtype=float)[:, None]
    j = np.arange(N, dtype=float)[None, :]
    mask = j >= n
    if t == 0.0:
        M = np.eye(N)
    else:
        log_q = math.log(-math.expm1(-t))
        gap = np.where(mask, j - n, 0.0)
        logs = -t * n + _log_binomial(np.where(mask, j, n), n) + gap * log_q
        M = np.where(mask, np.exp(logs), 0.0)
    return DiscreteOperatorMatrix(M, "upper-triangular", f"Sdisc[{t}]", {"t": t})


# ---------------------------------------------------------------------------
# Poisson maps


def _poisson(t: np.ndarray, N: int) -> np.ndarray:
    """``t^n/n! e^{-t}`` for ``n < N``, shape ``t.shape + (N,)``."""
    t = np.asarray(t, dtype=float)[..., None]
    n = np.arange(N, dtype=float)
    with np.errstate(divide="ignore"):
        logt = np.log(t)
    logs = np.where(n == 0, 0.0, n * logt) - gammaln(n + 1.0) - t
    return np.exp(logs)


def map_V(f: GridFunction, N: int) -> SequenceVector:
    """``V f(n) = ∫_0^1 t^n/n! e^{-t} f(t) dt`` by the grid quadrature."""
    g = f.grid
    K = _poisson(g.nodes, N)
    return SequenceVector((g.weights * f.values) @ K)


def map_V_star(a: SequenceVector | np.ndarray, grid: Grid) -> GridFunction:
    """``V* a(t) = Σ_n t^n/n! e^{-t} a(n)`` (truncated at ``len(a)``)."""
    entries = a.entries if isinstance(a, SequenceVector) else np.asarray(a, dtype=complex)
    N = entries.size
    coef = entries * np.exp(-gammaln(np.arange(N) + 1.0))

    def evaluator(t: np.ndarray) -> np.ndarray:
        # Horner in t; all terms are positive-weighted for t in [0, 1]
        t = np.asarray(t, dtype=float)
        return np.polynomial.polynomial.polyval(t, coef) * np.exp(-t)

    return GridFunction(grid, evaluator(grid.nodes), evaluator, f"V*[N={N}]")


# ---------------------------------------------------------------------------
# intertwining relations

INTERTWINING_KINDS = ("S-V", "V*-T", "C*-V", "V*-C")


def intertwine_sides(kind: str, param: float | complex, inp: Any, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of an intertwining relation as arrays.

    ``S-V``:  𝒮(t) V f   vs  e^t V S(t) f        (sequences)
    ``V*-T``: V* 𝒯(t) a  vs  e^t T(t) V* a       (functions on the grid)
    ``C*-V``: V C_α* f   vs  𝒞*_α V f            (sequences)
    ``V*-C``: V* 𝒞_α a   vs  C_α V* a            (functions on the grid)
    """
    if kind == "S-V":
        f = _need_function(inp, kind)
        lhs = matrix_S_disc(param, N) @ map_V(f, N).entries
        rhs = math.exp(param) * map_V(apply_S(param, f), N).entries
    elif kind == "V*-T":
        a, grid = _need_sequence(inp, kind)
        lhs = map_V_star(matrix_T_disc(param, N) @ a.entries, grid).values
        rhs = math.exp(param) * apply_T(param, map_V_star(a, grid)).values
    elif kind == "C*-V":
        f = _need_function(inp, kind)
        lhs = map_V(apply_C_alpha_star(param, f), N).entries
        rhs = matrix_C_alpha_star_disc(param, N) @ map_V(f, N).entries
    elif kind == "V*-C":
        a, grid = _need_sequence(inp, kind)
        lhs = map_V_star(matrix_C_alpha_disc(param, N) @ a.entries, grid).values
        rhs = apply_C_alpha(param, map_V_star(a, grid)).values
    else:
        raise ValueError(f"unknown intertwining kind {kind!r}; expected one of {INTERTWINING_KINDS}")
    return np.asarray(lhs), np.asarray(rhs)


def intertwine_residual(kind: str, param: float | complex, inp: Any, N: int = 128) -> float:
    """Max-modulus gap between the two sides.

    Sequence-valued kinds are compared on the first ``N // 2`` coordinates
    (the truncated tail is polluted); function-valued kinds on all nodes.
    """
    lhs, rhs = intertwine_sides(kind, param, inp, N)
    if kind in ("S-V", "C*-V"):
        lhs, rhs = lhs[: N // 2], rhs[: N // 2]
    return float(np.max(np.abs(lhs - rhs)))


def _need_function(inp: Any, kind: str) -> GridFunction:
    if not isinstance(inp, GridFunction):
        raise TypeError(f"kind {kind!r} takes a GridFunction input")
    return inp


def _need_sequence(inp: Any, kind: str) -> tuple[SequenceVector, Grid]:
    if not (isinstance(inp, tuple) and len(inp) == 2 and isinstance(inp[1], Grid)):
        raise TypeError(f"kind {kind!r} takes a (SequenceVector, Grid) input")
    a, grid = inp
    if not isinstance(a, SequenceVector):
        a = SequenceVector(a)
    return a, grid


# ---------------------------------------------------------------------------
# export


def export_matrix(M: DiscreteOperatorMatrix, stem: str | Path) -> tuple[Path, Path]:
    """Write ``<stem>.csv`` (row, col, re, im over the structural support) and ``<stem>.json``."""
    stem = Path(stem)
    rows = ["row,col,re,im"]
    n = M.N
    for i in range(n):
        if M.structure == "lower-triangular":
            cols = range(0, i + 1)
        elif M.structure == "upper-triangular":
            cols = range(i, n)
        else:
            cols = range(n)
        for j in cols:
            v = M.entries[i, j]
            rows.append(f"{i},{j},{v.real:.17g},{v.imag:.17g}")
    csv_path = stem.with_suffix(".csv")
    json_path = stem.with_suffix(".json")
    write_atomic(csv_path, "\n".join(rows) + "\n")
    header = {"label": M.label, "N": n, "structure": M.structure, "params": dict(M.params)}
    write_atomic(json_path, canonical_json(header) + "\n")
    return csv_path, json_path
