"""Sampled functions on (0, 1]: grids, norms, monomials and span distances.

The default grid is a composite Gauss-Legendre rule on geometric panels
``[e^{-(k+1)h}, e^{-kh}]`` plus one bottom panel ``[0, e^{-L}]``.  Every
operator in this package either rescales ``s`` by ``e^{±t}`` or integrates
functions such as ``s^{-(λ+1)}`` whose mass sits near 0, and geometric
panels are invariant under both: with a dyadic ``h`` the map
``s -> e^{t} s`` sends panels to panels whenever ``t`` is a multiple of
``h``.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .quadrature import gauss_legendre

__all__ = [
    "Grid",
    "GridFunction",
    "LebesgueExponent",
    "LambdaExponent",
    "IllConditionedWarning",
    "default_grid",
    "as_exponent",
    "as_lambda",
    "lp_norm",
    "max_modulus",
    "inner",
    "pairing",
    "monomial",
    "log_monomial",
    "constant",
    "project_truncation",
    "distance_to_span",
    "random_smooth",
    "write_csv",
    "read_csv",
]

Evaluator = Callable[[np.ndarray], np.ndarray]


class IllConditionedWarning(RuntimeWarning):
    """Gram matrix condition estimate above the warning threshold."""


# ---------------------------------------------------------------------------
# exponents


@dataclass(frozen=True)
class LebesgueExponent:
    """Exponent ``p`` in ``[1, ∞)`` with its conjugate ``p'``.

    For ``p = 1`` the conjugate is ``inf`` and ``1/p'`` is taken as 0.
    """

    p: float = 2.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.p) and self.p >= 1.0):
            raise ValueError(f"p must lie in [1, inf), got {self.p!r}")

    @property
    def conjugate(self) -> float:
        return math.inf if self.p == 1.0 else self.p / (self.p - 1.0)

    @property
    def inv(self) -> float:
        """1/p."""
        return 1.0 / self.p

    @property
    def inv_conj(self) -> float:
        """1/p' (0 when p = 1)."""
        return 1.0 - 1.0 / self.p


def as_exponent(p: LebesgueExponent | float) -> LebesgueExponent:
    return p if isinstance(p, LebesgueExponent) else LebesgueExponent(float(p))


_REGION_TOL = 1e-14


@dataclass(frozen=True)
class LambdaExponent:
    """Complex spectral parameter classified against ``Re λ < -1/p'``."""

    value: complex
    p: LebesgueExponent = field(default_factory=LebesgueExponent)

    def __post_init__(self) -> None:
        v = complex(self.value)
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValueError(f"non-finite exponent {self.value!r}")
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "p", as_exponent(self.p))

    @property
    def threshold(self) -> float:
        return -self.p.inv_conj

    @property
    def region(self) -> str:
        """``inside-S``, ``boundary`` or ``outside``."""
        d = self.value.real - self.threshold
        if abs(d) <= _REGION_TOL:
            return "boundary"
        return "inside-S" if d < 0 else "outside"


def as_lambda(lam: LambdaExponent | complex | float) -> complex:
    return lam.value if isinstance(lam, LambdaExponent) else complex(lam)


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True, eq=False)
class Grid:
    """Quadrature nodes in (0, 1] with positive weights summing to 1.

    ``kind`` is ``geometric``, ``graded`` or ``uniform-midpoint``; ``edges``
    lists panel edges (geometric grids) and ``exponent`` the grading
    exponent (graded grids).
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str = "custom"
    exponent: float | None = None
    edges: np.ndarray | None = None

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.size == 0:
            raise ValueError("nodes and weights must be equal-length 1-d arrays")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("grid nodes must be strictly increasing")
        if nodes[0] <= 0 or nodes[-1] > 1:
            raise ValueError("grid nodes must lie in (0, 1]")
        if np.any(weights <= 0):
            raise ValueError("grid weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"grid weights sum to {weights.sum()!r}, expected 1")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.nodes.size

    @cached_property
    def log_nodes(self) -> np.ndarray:
        return np.log(self.nodes)

    @property
    def depth(self) -> float:
        """``-log`` of the smallest node."""
        return float(-self.log_nodes[0])

    # constructors ---------------------------------------------------------

    @classmethod
    def geometric(
        cls,
        size: int = 4096,
        *,
        order: int = 8,
        depth: float = 32.0,
        breakpoints: Iterable[float] = (),
    ) -> Grid:
        """Composite Gauss-Legendre on panels with edges ``e^{-kh}``.

        ``h`` is the power of two closest to ``depth / (size/order - 1)``;
        extra ``breakpoints`` in (0, 1) are inserted as panel edges.
        """
        panels = size // order
        if panels < 2:
            raise ValueError(f"grid size {size} too small for order {order}")
        count = panels - 1
        h = 2.0 ** round(math.log2(depth / count))
        edges = np.exp(-h * np.arange(count, -1, -1, dtype=float))
        edges = np.concatenate(([0.0], edges))
        edges[-1] = 1.0
        extra = [float(b) for b in breakpoints if 0.0 < float(b) < 1.0]
        if extra:
            keep = [
                b for b in extra if np.min(np.abs(edges - b)) > 1e-14 * b
            ]
            edges = np.unique(np.concatenate((edges, keep)))
        base = gauss_legendre(order)
        a = edges[:-1, None]
        w = np.diff(edges)[:, None]
        nodes = (a + w * base.nodes[None, :]).ravel()
        weights = (w * base.weights[None, :]).ravel()
        weights = weights / weights.sum()
        return cls(nodes, weights, "geometric", None, edges)

    @classmethod
    def graded(cls, size: int = 4096, exponent: float = 2.0) -> Grid:
        """Midpoint rule on cells ``[(k/n)^q, ((k+1)/n)^q]``."""
        if exponent < 1:
            raise ValueError("grading exponent must be >= 1")
        edges = (np.arange(size + 1) / size) ** exponent
        nodes = 0.5 * (edges[:-1] + edges[1:])
        return cls(nodes, np.diff(edges), "graded", float(exponent), edges)

    @classmethod
    def uniform_midpoint(cls, size: int = 4096) -> Grid:
        edges = np.arange(size + 1) / size
        nodes = 0.5 * (edges[:-1] + edges[1:])
        return cls(nodes, np.diff(edges), "uniform-midpoint", 1.0, edges)

    @classmethod
    def from_nodes(cls, nodes: Sequence[float]) -> Grid:
        """Grid with cell weights from midpoints between consecutive nodes."""
        x = np.asarray(nodes, dtype=float)
        cuts = np.concatenate(([0.0], 0.5 * (x[:-1] + x[1:]), [1.0]))
        return cls(x, np.diff(cuts), "custom")


def default_grid(size: int = 4096, breakpoints: Iterable[float] = ()) -> Grid:
    return Grid.geometric(size, breakpoints=breakpoints)


# ---------------------------------------------------------------------------
# grid functions


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex samples on a grid, optionally backed by an exact evaluator.

    ``analytic`` maps an array of points in (0, 1] to complex values.  When
    it is present every off-node evaluation goes through it; otherwise
    values are interpolated by monotone cubics in ``log s`` with constant
    extrapolation.  ``meta`` carries hints such as ``power`` (the leading
    exponent ``w`` in ``f(s) ~ s^w`` as ``s -> 0``).
    """

    grid: Grid
    values: np.ndarray
    analytic: Evaluator | None = None
    label: str = ""
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.grid.nodes.shape:
            raise ValueError(
                f"values have shape {v.shape}, grid has {self.grid.nodes.shape}"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(
        cls, grid: Grid, func: Evaluator, label: str = "", **meta: Any
    ) -> GridFunction:
        def evaluator(s: np.ndarray) -> np.ndarray:
            return np.asarray(func(np.asarray(s, dtype=float)), dtype=complex)

        values = np.broadcast_to(evaluator(grid.nodes), grid.nodes.shape)
        return cls(grid, values, evaluator, label, dict(meta))

    @cached_property
    def _interp(self) -> PchipInterpolator:
        y = np.stack((self.values.real, self.values.imag), axis=1)
        return PchipInterpolator(self.grid.log_nodes, y, axis=0, extrapolate=False)

    def __call__(self, s: np.ndarray | float) -> np.ndarray:
        return self.evaluate(s)

    def evaluate(self, s: np.ndarray | float) -> np.ndarray:
        """Values at arbitrary points of (0, 1]."""
        s = np.asarray(s, dtype=float)
        if self.analytic is not None:
            return np.asarray(self.analytic(s), dtype=complex)
        x = np.clip(np.log(s), self.grid.log_nodes[0], self.grid.log_nodes[-1])
        y = self._interp(x)
        return y[..., 0] + 1j * y[..., 1]

    @property
    def is_analytic(self) -> bool:
        return self.analytic is not None

    def with_values(self, values: np.ndarray, label: str | None = None) -> GridFunction:
        """Same grid, new samples, no evaluator."""
        return GridFunction(self.grid, values, None, self.label if label is None else label)

    # arithmetic --------------------------------------------------------------

    def _combine(self, other: Any, op: Callable[[Any, Any], Any], sym: str) -> GridFunction:
        if isinstance(other, GridFunction):
            if other.grid is not self.grid:
                raise ValueError("grid functions live on different grids")
            values = op(self.values, other.values)
            analytic = None
            if self.analytic is not None and other.analytic is not None:
                fa, fb = self.analytic, other.analytic

                def combined(s: np.ndarray) -> np.ndarray:
                    return op(fa(s), fb(s))

                analytic = combined

            label = f"({self.label}){sym}({other.label})"
            return GridFunction(self.grid, values, analytic, label)
        c = complex(other)
        values = op(self.values, c)
        analytic = None
        if self.analytic is not None:
            fa = self.analytic

            def analytic(s: np.ndarray) -> np.ndarray:
                return op(fa(s), c)

        meta = dict(self.meta) if sym in "*/" else {}
        return GridFunction(self.grid, values, analytic, f"({self.label}){sym}{c}", meta)

    def __add__(self, other: Any) -> GridFunction:
        return self._combine(other, np.add, "+")

    def __radd__(self, other: Any) -> GridFunction:
        return self._combine(other, np.add, "+")

    def __sub__(self, other: Any) -> GridFunction:
        return self._combine(other, np.subtract, "-")

    def __rsub__(self, other: Any) -> GridFunction:
        return (-self)._combine(other, np.add, "+")

    def __mul__(self, other: Any) -> GridFunction:
        return self._combine(other, np.multiply, "*")

    def __rmul__(self, other: Any) -> GridFunction:
        return self._combine(other, np.multiply, "*")

    def __truediv__(self, other: Any) -> GridFunction:
        if isinstance(other, GridFunction):
            return self._combine(other, np.divide, "/")
        return self._combine(1.0 / complex(other), np.multiply, "*")

    def __neg__(self) -> GridFunction:
        return self._combine(-1.0, np.multiply, "*")


# ---------------------------------------------------------------------------
# norms and pairings


def lp_norm(f: GridFunction, p: LebesgueExponent | float = 2.0) -> float:
    """``(Σ w_i |f_i|^p)^{1/p}``."""
    q = as_exponent(p).p
    w = f.grid.weights
    a = np.abs(f.values)
    scale = a.max(initial=0.0)
    if scale == 0.0:
        return 0.0
    return float(scale * np.sum(w * (a / scale) ** q) ** (1.0 / q))


def max_modulus(f: GridFunction) -> float:
    """Largest ``|f|`` over the nodes (a diagnostic, not an L^∞ norm)."""
    return float(np.abs(f.values).max(initial=0.0))


def inner(f: GridFunction, g: GridFunction) -> complex:
    """``⟨f, g⟩ = Σ w f conj(g)``."""
    return complex(np.sum(f.grid.weights * f.values * np.conj(g.values)))


def pairing(f: GridFunction, g: GridFunction) -> complex:
    """Bilinear ``Σ w f g`` (the L^p / L^{p'} duality)."""
    return complex(np.sum(f.grid.weights * f.values * g.values))


# ---------------------------------------------------------------------------
# monomials and basic functions


def monomial(lam: LambdaExponent | complex | float, grid: Grid) -> GridFunction:
    """``g_λ(s) = s^{-(λ+1)}`` on the principal branch."""
    w = -(as_lambda(lam) + 1.0)

    def g(s: np.ndarray) -> np.ndarray:
        return np.exp(w * np.log(s))

    return GridFunction.from_callable(grid, g, f"g[{as_lambda(lam)}]", power=w)


def log_monomial(lam: LambdaExponent | complex | float, m: int, grid: Grid) -> GridFunction:
    """``s^{-(λ+1)} (log s)^m``."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    w = -(as_lambda(lam) + 1.0)

    def g(s: np.ndarray) -> np.ndarray:
        x = np.log(s)
        return np.exp(w * x) * x**m

    return GridFunction.from_callable(
        grid, g, f"g[{as_lambda(lam)}]*log^{m}", power=w, log_power=m
    )


def constant(c: complex, grid: Grid) -> GridFunction:
    c = complex(c)
    return GridFunction.from_callable(
        grid, lambda s: np.full(np.shape(s), c), f"{c}", power=0.0
    )


def project_truncation(f: GridFunction, r: float) -> GridFunction:
    """Zero ``f`` on ``(0, r]``."""
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    values = np.where(f.grid.nodes <= r, 0.0, f.values)
    analytic = None
    if f.analytic is not None:
        fa = f.analytic

        def truncated(s: np.ndarray) -> np.ndarray:
            s = np.asarray(s, dtype=float)
            return np.where(s <= r, 0.0, fa(s))

        analytic = truncated

    return GridFunction(f.grid, values, analytic, f"P[{r}]({f.label})")


# ---------------------------------------------------------------------------
# distances to spans


def distance_to_span(
    f: GridFunction,
    basis: Sequence[GridFunction],
    *,
    ridge: float = 1e-12,
    cond_warn: float = 1e12,
    return_coefficients: bool = False,
) -> float | tuple[float, np.ndarray]:
    """L² distance from ``f`` to ``span(basis)`` via the Gram system.

    The normal equations are regularized by ``ridge * trace(G)``; the
    distance is the norm of the explicit residual vector.
    """
    if not basis:
        raise ValueError("basis must be nonempty")
    w = f.grid.weights
    B = np.stack([b.values for b in basis], axis=1)
    G = (B.conj().T * w) @ B
    rhs = (B.conj().T * w) @ f.values
    eps = ridge * float(np.real(np.trace(G)))
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > cond_warn:
        warnings.warn(
            f"Gram matrix condition estimate {cond:.3e} exceeds {cond_warn:.0e}",
            IllConditionedWarning,
            stacklevel=2,
        )
    coef = np.linalg.solve(G + eps * np.eye(len(basis)), rhs)
    r = f.values - B @ coef
    dist = float(np.sqrt(np.sum(w * np.abs(r) ** 2)))
    return (dist, coef) if return_coefficients else dist


# ---------------------------------------------------------------------------
# random test functions


def random_smooth(
    grid: Grid, rng: np.random.Generator, terms: int = 4, max_power: float = 3.0
) -> GridFunction:
    """Random ``Σ c_k s^{a_k}`` with complex normal ``c_k`` and ``a_k ∈ [0, max_power]``."""
    c = rng.normal(size=terms) + 1j * rng.normal(size=terms)
    a = rng.uniform(0.0, max_power, size=terms)
    a[0] = 0.0

    def f(s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return np.tensordot(c, s[None, ...] ** a.reshape((-1,) + (1,) * s.ndim), axes=1)

    return GridFunction.from_callable(grid, f, "random-smooth", power=0.0)


# ---------------------------------------------------------------------------
# CSV import / export


def write_csv(f: GridFunction, path: str | Path) -> None:
    """Write ``node,re,im`` rows after a ``# expression:`` header line."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with tmp.open("w", newline="") as fh:
        fh.write(f"# expression: {f.label}\n")
        writer = csv.writer(fh)
        writer.writerow(["node", "re", "im"])
        for s, v in zip(f.grid.nodes, f.values):
            writer.writerow([f"{s:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])
    tmp.replace(path)


def read_csv(path: str | Path, grid: Grid | None = None) -> GridFunction:
    """Read a file produced by :func:`write_csv`.

    Without ``grid`` the nodes define a new grid with midpoint cell weights.
    """
    label = ""
    rows: list[list[str]] = []
    with Path(path).open(newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                if line.startswith("# expression:"):
                    label = line.split(":", 1)[1].strip()
                continue
            rows.append(line.strip().split(","))
    if not rows or rows[0] != ["node", "re", "im"]:
        raise ValueError(f"{path}: missing 'node,re,im' header")
    data = np.array([[float(x) for x in r] for r in rows[1:] if r and r[0]])
    nodes, values = data[:, 0], data[:, 1] + 1j * data[:, 2]
    if grid is None:
        grid = Grid.from_nodes(nodes)
    elif not np.allclose(grid.nodes, nodes, rtol=1e-15, atol=0.0):
        raise ValueError("CSV nodes do not match the supplied grid")
    return GridFunction(grid, values, None, label)
