"""Weighted Koopman semigroups on L^p[0,1], their generators and ODE solutions.

    T(t)f(s) = e^{-t} f(e^{-t} s),      A f = -s f' - f,
    S(t)f(s) = χ_{[0,e^{-t})}(s) f(e^t s),   B f = s f'.

Compositions go through the exact evaluator of a :class:`GridFunction`
when it has one, so ``T(t) g_λ = e^{λt} g_λ`` holds to rounding.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .funcspace import GridFunction, LambdaExponent, as_lambda
from .quadrature import gauss_legendre

__all__ = [
    "SemigroupTime",
    "NonSmoothWarning",
    "DomainWarning",
    "T_at",
    "S_at",
    "apply_T",
    "apply_S",
    "preimage_T",
    "log_derivative",
    "apply_A",
    "apply_B",
    "integral_to_one",
    "ode_solution_A",
    "ode_solution_B",
]


class NonSmoothWarning(RuntimeWarning):
    """Difference stencils disagree: the input is not smooth enough."""


class DomainWarning(RuntimeWarning):
    """The input violates a generator domain condition."""


@dataclass(frozen=True)
class SemigroupTime:
    t: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t) and self.t >= 0):
            raise ValueError(f"semigroup time must be finite and >= 0, got {self.t!r}")


def _time(t: SemigroupTime | float) -> float:
    return SemigroupTime(t.t if isinstance(t, SemigroupTime) else float(t)).t


# ---------------------------------------------------------------------------
# semigroups


def _times(t: SemigroupTime | float | np.ndarray) -> float | np.ndarray:
    if isinstance(t, np.ndarray):
        if not np.all(np.isfinite(t) & (t >= 0)):
            raise ValueError("semigroup times must be finite and >= 0")
        return t
    return _time(t)


def T_at(t: SemigroupTime | float | np.ndarray, f: GridFunction, s: np.ndarray) -> np.ndarray:
    """``(T(t)f)(s)`` at arbitrary points; ``t`` may be an array broadcasting with ``s``."""
    t = _times(t)
    s = np.asarray(s, dtype=float)
    x = np.exp(-t)
    return x * f.evaluate(x * s)


def S_at(t: SemigroupTime | float | np.ndarray, f: GridFunction, s: np.ndarray) -> np.ndarray:
    """``(S(t)f)(s)`` at arbitrary points (strict cut at ``e^{-t}``)."""
    t = _times(t)
    t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
    inside = s < np.exp(-t)
    out = np.zeros(s.shape, dtype=complex)
    if np.any(inside):
        out[inside] = f.evaluate(np.exp(t[inside]) * s[inside])
    return out


def apply_T(t: SemigroupTime | float, f: GridFunction) -> GridFunction:
    t = _time(t)
    analytic = None
    if f.analytic is not None:
        analytic = lambda s: T_at(t, f, s)  # noqa: E731
    meta = {"power": f.meta["power"]} if "power" in f.meta else {}
    return GridFunction(f.grid, T_at(t, f, f.grid.nodes), analytic, f"T({t}){f.label}", meta)


def apply_S(t: SemigroupTime | float, f: GridFunction) -> GridFunction:
    t = _time(t)
    analytic = None
    if f.analytic is not None:
        analytic = lambda s: S_at(t, f, s)  # noqa: E731
    meta = {"power": f.meta["power"]} if "power" in f.meta else {}
    return GridFunction(f.grid, S_at(t, f, f.grid.nodes), analytic, f"S({t}){f.label}", meta)


def preimage_T(t: SemigroupTime | float, f: GridFunction) -> GridFunction:
    """``g = e^t χ_{[0,e^{-t})} f(e^t ·)``, which satisfies ``T(t) g = f``."""
    t = _time(t)
    scale = math.exp(t)

    def evaluator(s: np.ndarray) -> np.ndarray:
        return scale * S_at(t, f, s)

    return GridFunction(
        f.grid, evaluator(f.grid.nodes), evaluator if f.analytic else None,
        f"Tinv({t}){f.label}",
    )


# ---------------------------------------------------------------------------
# derivatives in x = log s

_STEP = 1e-3
_SMOOTH_TOL = 1e-6  # evaluator path
_NODE_SMOOTH_TOL = 1e-2  # node path: stencils already differ at O(Δx²)


def _stencil_d(F, x: np.ndarray, h: float) -> np.ndarray:
    """4th-order ``dF/dx``; central where ``x + 2h <= 0``, backward otherwise."""
    out = np.empty(x.shape, dtype=complex)
    central = x + 2 * h <= 0.0
    xc = x[central]
    if xc.size:
        out[central] = (
            -F(xc + 2 * h) + 8 * F(xc + h) - 8 * F(xc - h) + F(xc - 2 * h)
        ) / (12 * h)
    xb = x[~central]
    if xb.size:
        out[~central] = (
            25 * F(xb) - 48 * F(xb - h) + 36 * F(xb - 2 * h) - 16 * F(xb - 3 * h)
            + 3 * F(xb - 4 * h)
        ) / (12 * h)
    return out


def _fornberg_weights(x: np.ndarray, x0: np.ndarray) -> np.ndarray:
    """First-derivative weights for stencils ``x`` (rows) centred at ``x0``."""
    d = x - x0[:, None]
    n = x.shape[1]
    V = np.stack([d**k for k in range(n)], axis=1)  # (rows, power, point)
    rhs = np.zeros((x.shape[0], n))
    rhs[:, 1] = 1.0
    return np.linalg.solve(V, rhs[..., None])[..., 0]


def _node_derivative(f: GridFunction) -> tuple[np.ndarray, float]:
    """``d f / d log s`` on the nodes: 5-point interior, 3-point one-sided ends.

    Also returns the largest disagreement with a 3-point central estimate,
    used as the smoothness indicator.
    """
    x = f.grid.log_nodes
    v = f.values
    n = x.size
    if n < 5:
        raise ValueError("need at least 5 nodes for differencing")
    out = np.empty(n, dtype=complex)
    mid = np.arange(2, n - 2)
    st = mid[:, None] + np.arange(-2, 3)[None, :]
    w5 = _fornberg_weights(x[st], x[mid])
    out[mid] = np.sum(w5 * v[st], axis=1)
    ends = ((0, [0, 1, 2]), (1, [0, 1, 2]), (n - 2, [n - 3, n - 2, n - 1]),
            (n - 1, [n - 3, n - 2, n - 1]))
    for i, st_i in ends:
        w = _fornberg_weights(x[st_i][None, :], x[[i]])[0]
        out[i] = np.dot(w, v[st_i])
    st3 = mid[:, None] + np.arange(-1, 2)[None, :]
    w3 = _fornberg_weights(x[st3], x[mid])
    low = np.sum(w3 * v[st3], axis=1)
    disagreement = float(np.max(np.abs(low - out[mid]), initial=0.0))
    return out, disagreement


def log_derivative(f: GridFunction, *, warn: bool = True) -> GridFunction:
    """``s f'(s)`` on the grid.

    Uses the exact evaluator with step ``1e-3`` in ``log s`` when available
    (smoothness judged by comparing steps ``h`` and ``2h``), otherwise
    finite-difference weights on the nodes.  ``meta['smooth']`` records the
    verdict; a :class:`NonSmoothWarning` is issued when it is False.
    """
    scale = float(np.max(np.abs(f.values), initial=0.0)) + 1.0
    if f.analytic is not None:
        fa = f.analytic

        def F(x: np.ndarray) -> np.ndarray:
            return np.asarray(fa(np.exp(x)), dtype=complex)

        def evaluator(s: np.ndarray) -> np.ndarray:
            s = np.asarray(s, dtype=float)
            return _stencil_d(F, np.log(s).ravel(), _STEP).reshape(s.shape)

        x = f.grid.log_nodes
        d1 = _stencil_d(F, x, _STEP)
        d2 = _stencil_d(F, x, 2 * _STEP)
        gap = float(np.max(np.abs(d1 - d2)))
        values, analytic = d1, evaluator
        scale += float(np.max(np.abs(d1)))
    else:
        values, gap = _node_derivative(f)
        analytic = None
        scale += float(np.max(np.abs(values)))
    tol = _SMOOTH_TOL if analytic is not None else _NODE_SMOOTH_TOL
    smooth = gap <= tol * scale
    if warn and not smooth:
        warnings.warn(
            f"difference stencils disagree by {gap:.3e}; input looks non-smooth",
            NonSmoothWarning,
            stacklevel=3,
        )
    return GridFunction(
        f.grid, values, analytic, f"s d/ds {f.label}", {"smooth": smooth, "stencil_gap": gap}
    )


def apply_A(f: GridFunction) -> GridFunction:
    """``A f = -s f' - f``."""
    d = log_derivative(f)
    out = -d - f
    return GridFunction(out.grid, out.values, out.analytic, f"A({f.label})", dict(d.meta))


def apply_B(f: GridFunction, *, domain_tol: float = 1e-8) -> GridFunction:
    """``B f = s f'``; warns when ``|f(1)| > domain_tol``."""
    f1 = complex(np.asarray(f.evaluate(np.array([1.0])))[0])
    in_domain = abs(f1) <= domain_tol
    if not in_domain:
        warnings.warn(
            f"|f(1)| = {abs(f1):.3e} > {domain_tol:g}: f is outside D(B)",
            DomainWarning,
            stacklevel=2,
        )
    d = log_derivative(f)
    meta = dict(d.meta)
    meta.update(in_domain=in_domain, boundary_value=f1)
    return GridFunction(d.grid, d.values, d.analytic, f"B({f.label})", meta)


# ---------------------------------------------------------------------------
# ODE solution formulas

_PANEL = 1.0
_ORDER = 20


def integral_to_one(s: np.ndarray, phi, *, chunk: int = 512) -> np.ndarray:
    """``∫_{log s}^0 φ(x) dx`` for each ``s`` by composite Gauss-Legendre.

    ``φ`` receives an array of ``x`` values (any shape) and must broadcast.
    """
    s = np.asarray(s, dtype=float)
    flat = s.ravel()
    out = np.empty(flat.shape, dtype=complex)
    if flat.size == 0:
        return out.reshape(s.shape)
    span = -np.log(flat)
    panels = max(1, math.ceil(float(span.max()) / _PANEL))
    rule = gauss_legendre(_ORDER)
    ref = (np.arange(panels)[:, None] + rule.nodes[None, :]).ravel() / panels
    wref = np.tile(rule.weights, panels) / panels
    for lo in range(0, flat.size, chunk):
        sp = span[lo : lo + chunk, None]
        x = -sp + sp * ref[None, :]
        out[lo : lo + chunk] = np.sum(phi(x) * wref[None, :], axis=1) * sp[:, 0]
    return out.reshape(s.shape)


def ode_solution_A(
    lam: LambdaExponent | complex, f: GridFunction, K: complex
) -> GridFunction:
    """``g(s) = s^{-(λ+1)} (K - ∫_s^1 u^λ f(u) du)``, a solution of ``(λ-A)g = f``."""
    lam = as_lambda(lam)
    K = complex(K)

    def phi(x: np.ndarray) -> np.ndarray:
        return np.exp((lam + 1.0) * x) * f.evaluate(np.exp(x))

    def evaluator(s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return np.exp(-(lam + 1.0) * np.log(s)) * (K - integral_to_one(s, phi))

    return GridFunction(
        f.grid, evaluator(f.grid.nodes), evaluator, f"gA[{lam},{K}]({f.label})"
    )


def ode_solution_B(
    lam: LambdaExponent | complex, f: GridFunction, K: complex
) -> GridFunction:
    """``h(s) = s^λ (K + ∫_s^1 f(u) u^{-(λ+1)} du)``, a solution of ``(λ-B)h = f``."""
    lam = as_lambda(lam)
    K = complex(K)

    def phi(x: np.ndarray) -> np.ndarray:
        return np.exp(-lam * x) * f.evaluate(np.exp(x))

    def evaluator(s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return np.exp(lam * np.log(s)) * (K + integral_to_one(s, phi))

    return GridFunction(
        f.grid, evaluator(f.grid.nodes), evaluator, f"hB[{lam},{K}]({f.label})"
    )
