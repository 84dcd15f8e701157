"""Predicted spectral sets, a dense complex eigensolver and norm estimates.

Predicted sets are one of three shapes: a closed disk, a closed half-plane
``Re λ <= c``, or the region enclosed by the Gamma-quotient curve

    F(z) = Γ(α+1) Γ(z+c) / Γ(α+z+c),   z ∈ iℝ,

together with the adjoined point 0.  Membership in the curve region is a
winding-number test against a dense closed polyline through 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .cesaro import _alpha, cesaro_norm_bound
from .discrete import DiscreteOperatorMatrix
from .funcspace import Grid, GridFunction, as_exponent, lp_norm, random_smooth, LebesgueExponent
from .report import canonical_json, write_atomic, write_table
from .specfun import log_gamma, log_gamma_ratio

__all__ = [
    "SpectralSet",
    "predicted_spectrum",
    "gamma_curve",
    "EigenDecomposition",
    "ConvergenceError",
    "eigenvalues",
    "balance",
    "hessenberg",
    "NormEstimate",
    "operator_norm_estimate",
    "matrix_operator",
    "theoretical_norm_bound",
    "SetDistance",
    "set_distance",
    "hausdorff_distance",
    "write_spectral_report",
    "OPERATOR_IDS",
]

BOUNDARY_SAMPLES = 512
DENSE_SAMPLES = 20000
TAIL_FRACTION = 1e-6

OPERATOR_IDS = ("A", "B", "T(t)", "S(t)", "C_alpha", "C_alpha_star", "C_alpha_disc", "C_alpha_star_disc")


# ---------------------------------------------------------------------------
# Gamma-quotient curves


def gamma_curve(alpha: complex, c: float, z: np.ndarray | complex) -> np.ndarray:
    """``Γ(α+1) Γ(z+c) / Γ(α+z+c)`` elementwise, stable for large ``|z|``."""
    a = _alpha(alpha)
    lead = log_gamma(a + 1.0)
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.array([np.exp(lead + log_gamma_ratio(w, c, a + c)) for w in z_arr.ravel()])
    out = out.reshape(z_arr.shape)
    return out if np.ndim(z) else complex(out[0])


def _tail_height(alpha: complex, c: float) -> float:
    """Smallest ``Y`` (to 1%) with ``|F(iy)| < 1e-6 |F(0)|`` for ``|y| >= Y``."""
    f0 = abs(gamma_curve(alpha, c, 0.0))
    target = TAIL_FRACTION * f0

    def small(y: float) -> bool:
        return max(abs(gamma_curve(alpha, c, 1j * y)), abs(gamma_curve(alpha, c, -1j * y))) < target

    hi = 1.0
    while not small(hi):
        hi *= 2.0
        if hi > 1e300:
            raise ValueError("Gamma curve does not decay; Re alpha must be positive")
    lo = hi / 2.0 if hi > 1.0 else 0.0
    while hi - lo > 0.01 * hi:
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if small(mid) else (mid, hi)
    return hi


def _symmetric_heights(Y: float, count: int) -> np.ndarray:
    """``count`` heights in ``[-Y, Y]``, uniform in ``asinh``, including 0 when odd."""
    u = np.linspace(-math.asinh(Y), math.asinh(Y), count)
    return np.sinh(u)


# ---------------------------------------------------------------------------
# spectral sets


@dataclass(frozen=True, eq=False)
class SpectralSet:
    """A predicted spectrum.

    ``kind`` is ``disk`` (``center``, ``radius``), ``half-plane``
    (``Re λ <= bound``) or ``gamma-curve`` (``alpha``, ``shift``).  ``parts``
    maps fine-spectrum names to descriptions of the predicted parts.
    """

    kind: str
    params: Mapping[str, Any]
    boundary_samples: np.ndarray
    label: str
    parts: Mapping[str, str] = field(default_factory=dict)
    isolated_points: tuple[complex, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("disk", "half-plane", "gamma-curve"):
            raise ValueError(f"unknown set kind {self.kind!r}")
        b = np.asarray(self.boundary_samples, dtype=complex)
        b.setflags(write=False)
        object.__setattr__(self, "boundary_samples", b)

    # -- gamma-curve machinery --------------------------------------------

    @cached_property
    def _polyline(self) -> np.ndarray:
        """Dense closed boundary (curve, then 0, then back to the start)."""
        a, c, Y = self.params["alpha"], self.params["shift"], self.params["Y"]
        y = np.union1d(_symmetric_heights(Y, DENSE_SAMPLES), self.params["_heights"])
        pts = gamma_curve(a, c, 1j * y)
        return np.concatenate([pts, [0.0], pts[:1]])

    def _winding(self, z: np.ndarray) -> np.ndarray:
        P = self._polyline
        out = np.empty(z.size, dtype=np.int64)
        step = max(1, 4_000_000 // P.size)
        for i in range(0, z.size, step):
            d = P[None, :] - z[i:i + step, None]
            ang = np.angle(d[:, 1:] / d[:, :-1])
            out[i:i + step] = np.rint(ang.sum(axis=1) / (2.0 * math.pi)).astype(np.int64)
        return out

    def _polyline_distance(self, z: np.ndarray) -> np.ndarray:
        P = self._polyline
        a, b = P[:-1], P[1:]
        ab = b - a
        L2 = np.maximum(np.abs(ab) ** 2, 1e-300)
        out = np.empty(z.size)
        step = max(1, 4_000_000 // P.size)
        for i in range(0, z.size, step):
            w = z[i:i + step, None]
            tpar = np.clip(((w - a) * ab.conj()).real / L2, 0.0, 1.0)
            out[i:i + step] = np.min(np.abs(w - (a + tpar * ab)), axis=1)
        return out

    # -- public predicates ---------------------------------------------------

    def distance(self, z: Any) -> np.ndarray | float:
        """Euclidean distance to the set (0 inside)."""
        arr = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
        if self.kind == "disk":
            d = np.maximum(np.abs(arr - self.params["center"]) - self.params["radius"], 0.0)
        elif self.kind == "half-plane":
            d = np.maximum(arr.real - self.params["bound"], 0.0)
        else:
            d = self._polyline_distance(arr)
            off = d > 1e-15
            if np.any(off):
                d[off] = np.where(self._winding(arr[off]) != 0, 0.0, d[off])
        for q in self.isolated_points:
            d = np.minimum(d, np.abs(arr - q))
        return d if np.ndim(z) else float(d[0])

    def contains(self, z: Any, tol: float = 1e-9) -> np.ndarray | bool:
        d = self.distance(z)
        return d <= tol if np.ndim(d) else bool(d <= tol)

    def as_dict(self) -> dict[str, Any]:
        params = {k: v for k, v in self.params.items() if not k.startswith("_")}
        return {"label": self.label, "kind": self.kind, "params": params, "parts": dict(self.parts),
                "isolated_points": list(self.isolated_points)}


def _disk(center: complex, radius: float, label: str, parts: Mapping[str, str], **extra: Any) -> SpectralSet:
    theta = 2.0 * math.pi * np.arange(BOUNDARY_SAMPLES) / BOUNDARY_SAMPLES
    samples = center + radius * np.exp(1j * theta)
    return SpectralSet("disk", {"center": complex(center), "radius": float(radius), **extra},
                       samples, label, parts)


def _half_plane(bound: float, label: str, parts: Mapping[str, str], height: float = 100.0,
                **extra: Any) -> SpectralSet:
    y = np.linspace(-height, height, BOUNDARY_SAMPLES)
    return SpectralSet("half-plane", {"bound": float(bound), **extra}, bound + 1j * y, label, parts)


def _gamma_region(alpha: complex, c: float, label: str, parts: Mapping[str, str], **extra: Any) -> SpectralSet:
    a = _alpha(alpha)
    Y = _tail_height(a, c)
    # 511 curve samples (odd, so y = 0 is included) plus the adjoined 0
    heights = _symmetric_heights(Y, BOUNDARY_SAMPLES - 1)
    heights[(BOUNDARY_SAMPLES - 1) // 2] = 0.0
    samples = np.concatenate([gamma_curve(a, c, 1j * heights), [0.0]])
    params = {"alpha": a, "shift": float(c), "Y": float(Y), "_heights": heights, **extra}
    return SpectralSet("gamma-curve", params, samples, label, parts, (0j,))


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def predicted_spectrum(op_id: str, params: Mapping[str, Any] | None, p: LebesgueExponent | float) -> SpectralSet:
    """The spectrum of ``op_id`` on ``L^p`` (or ``ℓ^p`` for the discrete ids)."""
    params = dict(params or {})
    pe = as_exponent(p)
    inv_p, inv_q = pe.inv, pe.inv_conj  # 1/p and 1/p'
    if op_id == "A":
        b = -inv_q
        parts = {
            "spectrum": f"Re λ <= {_fmt(b)}",
            "point": f"Re λ < {_fmt(b)}",
            "approximate_point": f"Re λ <= {_fmt(b)}",
            "residual": "empty",
            "essential": f"Re λ = {_fmt(b)}",
        }
        return _half_plane(b, "generator A", parts, p=pe.p)
    if op_id == "B":
        b = -inv_p
        parts = {
            "spectrum": f"Re λ <= {_fmt(b)}",
            "point": "empty",
            "approximate_point": f"Re λ = {_fmt(b)}",
            "residual": f"Re λ <= {_fmt(b)}" if pe.p == 1.0 else f"Re λ < {_fmt(b)}",
            "essential": f"Re λ = {_fmt(b)}",
        }
        return _half_plane(b, "generator B", parts, p=pe.p)
    if op_id in ("T(t)", "S(t)"):
        if "t" not in params:
            raise ValueError(f"{op_id} needs params['t']")
        t = float(params["t"])
        if t < 0:
            raise ValueError("t must be nonnegative")
        if op_id == "T(t)":
            r = math.exp(-t * inv_q)
            parts = {
                "spectrum": f"|λ| <= {_fmt(r)}",
                "point": f"|λ| < {_fmt(r)}",
                "approximate_point": f"|λ| <= {_fmt(r)}",
                "residual": "empty",
                "essential": f"|λ| <= {_fmt(r)}",
            }
            return _disk(0.0, r, "semigroup T(t)", parts, t=t, p=pe.p)
        r = math.exp(-t * inv_p)
        residual = f"|λ| <= {_fmt(r)}" if pe.p == 1.0 else f"|λ| < {_fmt(r)}"
        parts = {
            "spectrum": f"|λ| <= {_fmt(r)}",
            "point": "empty",
            "approximate_point": f"|λ| = {_fmt(r)}",
            "residual": residual,
            "essential": f"|λ| <= {_fmt(r)}",
        }
        return _disk(0.0, r, "semigroup S(t)", parts, t=t, p=pe.p)
    if op_id in ("C_alpha", "C_alpha_disc", "C_alpha_star", "C_alpha_star_disc"):
        if "alpha" not in params:
            raise ValueError(f"{op_id} needs params['alpha']")
        a = _alpha(params["alpha"])
        star = "star" in op_id
        if star:
            c = inv_p
        else:
            if pe.p == 1.0:
                raise ValueError(f"{op_id} is not supported for p = 1")
            c = inv_q
        curve = f"F(z) = Γ(α+1)Γ(z+{_fmt(c)})/Γ(α+z+{_fmt(c)})"
        if star:
            parts = {
                "spectrum": f"{curve}, Re z >= 0, together with 0",
                "point": "empty",
                "approximate_point": f"contains {curve}, Re z = 0, together with 0",
                "residual": f"{curve}, Re z {'>=' if pe.p == 1.0 else '>'} 0",
                "essential": f"{curve}, Re z = 0, together with 0",
            }
        else:
            parts = {
                "spectrum": f"{curve}, Re z >= 0, together with 0",
                "point": f"{curve}, Re z > 0",
                "approximate_point": f"{curve}, Re z >= 0, together with 0",
                "residual": "empty",
                "essential": f"{curve}, Re z = 0, together with 0",
            }
        label = {"C_alpha": "Cesàro-Hardy C_alpha", "C_alpha_star": "Cesàro-Hardy adjoint C_alpha*",
                 "C_alpha_disc": "discrete Cesàro matrix", "C_alpha_star_disc": "discrete adjoint Cesàro matrix"}[op_id]
        return _gamma_region(a, c, label, parts, p=pe.p)
    raise ValueError(f"unsupported op_id {op_id!r}; expected one of {OPERATOR_IDS}")


# ---------------------------------------------------------------------------
# eigensolver


class ConvergenceError(RuntimeError):
    """QR iteration failed to converge; ``partial`` holds eigenvalues found so far."""

    def __init__(self, message: str, partial: np.ndarray) -> None:
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """All eigenvalues plus inverse-iteration residuals for a sample of them."""

    eigenvalues: np.ndarray
    residuals: np.ndarray
    sampled: np.ndarray
    method: str
    sweeps: int = 0

    def __post_init__(self) -> None:
        for name in ("eigenvalues", "residuals", "sampled"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.residuals < 0):
            raise ValueError("residuals must be nonnegative")


def balance(M: np.ndarray, *, permute: bool = True, scale: bool = True) -> tuple[np.ndarray, int, int]:
    """Permutation isolation and power-of-2 diagonal scaling.

    Returns ``(B, lo, hi)``: ``B`` is similar to ``M``; rows/columns outside
    ``lo..hi`` are already triangular, so their diagonal entries are
    eigenvalues.
    """
    B = np.array(M, dtype=complex)
    n = B.shape[0]
    lo, hi = 0, n - 1

    def swap(i: int, j: int) -> None:
        if i != j:
            B[[i, j], :] = B[[j, i], :]
            B[:, [i, j]] = B[:, [j, i]]

    if permute:
        # rows with zero off-diagonal part in the active block go to the bottom
        found = True
        while found and hi > lo:
            found = False
            for j in range(hi, lo - 1, -1):
                row = B[j, lo:hi + 1]
                if not np.any(np.delete(row, j - lo)):
                    swap(j, hi)
                    hi -= 1
                    found = True
                    break
        # columns with zero off-diagonal part go to the top
        found = True
        while found and hi > lo:
            found = False
            for j in range(lo, hi + 1):
                col = B[lo:hi + 1, j]
                if not np.any(np.delete(col, j - lo)):
                    swap(j, lo)
                    lo += 1
                    found = True
                    break

    if scale and hi > lo:
        radix = 2.0
        converged = False
        while not converged:
            converged = True
            for i in range(lo, hi + 1):
                c = np.sum(np.abs(B[lo:hi + 1, i])) - abs(B[i, i])
                r = np.sum(np.abs(B[i, lo:hi + 1])) - abs(B[i, i])
                if c == 0.0 or r == 0.0:
                    continue
                g, f, s = r / radix, 1.0, c + r
                while c < g:
                    f *= radix
                    c *= radix
                    r /= radix
                    g /= radix
                g = r / radix
                while g >= c and f > 1e-150:
                    f /= radix
                    c /= radix
                    r *= radix
                    g /= radix * radix
                if (c + r) < 0.95 * s * f and f != 1.0:
                    converged = False
                    B[i, :] /= f
                    B[:, i] *= f
    return B, lo, hi


def hessenberg(M: np.ndarray) -> np.ndarray:
    """Upper Hessenberg form by Householder reflections (eigenvalues only)."""
    H = np.array(M, dtype=complex)
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        H[k + 1:, k:] -= 2.0 * np.outer(v, v.conj() @ H[k + 1:, k:])
        H[:, k + 1:] -= 2.0 * np.outer(H[:, k + 1:] @ v, v.conj())
        H[k + 2:, k] = 0.0
    return H


def _givens(a: complex, b: complex) -> tuple[float, complex]:
    """``(c, s)`` with ``[[c, s], [-conj(s), c]] @ [a, b] = [r, 0]``."""
    if b == 0:
        return 1.0, 0j
    if a == 0:
        return 0.0, 1.0 + 0j
    r = math.hypot(abs(a), abs(b))
    return abs(a) / r, (a / abs(a)) * b.conjugate() / r


def _eig2(a: complex, b: complex, c: complex, d: complex) -> tuple[complex, complex]:
    half_tr = 0.5 * (a + d)
    disc = np.sqrt(complex(0.25 * (a - d) ** 2 + b * c))
    return half_tr + disc, half_tr - disc


def _hessenberg_qr(H: np.ndarray, max_sweeps: int) -> tuple[np.ndarray, int]:
    """Eigenvalues of an upper Hessenberg matrix by single-shift QR."""
    n = H.shape[0]
    eig = np.zeros(n, dtype=complex)
    eps = np.finfo(float).eps
    tiny = np.finfo(float).tiny / eps
    hi = n - 1
    its = 0
    sweeps = 0
    while hi >= 0:
        if hi == 0:
            eig[0] = H[0, 0]
            break
        l = hi
        while l > 0:
            sub = abs(H[l, l - 1])
            if sub <= max(eps * (abs(H[l, l]) + abs(H[l - 1, l - 1])), tiny):
                H[l, l - 1] = 0.0
                break
            l -= 1
        if l == hi:
            eig[hi] = H[hi, hi]
            hi -= 1
            its = 0
            continue
        if l == hi - 1:
            eig[hi - 1], eig[hi] = _eig2(H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi])
            hi -= 2
            its = 0
            continue
        if sweeps >= max_sweeps:
            eig[: hi + 1] = np.nan
            raise ConvergenceError(f"QR did not converge after {sweeps} sweeps", eig)
        its += 1
        sweeps += 1
        if its % 10 == 0:
            shift = H[hi, hi] + 0.75 * abs(H[hi, hi - 1]) * (1.0 + 1.0j)
        else:
            e1, e2 = _eig2(H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi])
            shift = e1 if abs(e1 - H[hi, hi]) <= abs(e2 - H[hi, hi]) else e2
        B = H[l:hi + 1, l:hi + 1]
        m = B.shape[0]
        idx = np.arange(m)
        B[idx, idx] -= shift
        rots = []
        for k in range(m - 1):
            c, s = _givens(B[k, k], B[k + 1, k])
            rk = B[k, k:].copy()
            rk1 = B[k + 1, k:].copy()
            B[k, k:] = c * rk + s * rk1
            B[k + 1, k:] = -s.conjugate() * rk + c * rk1
            rots.append((c, s))
        for k, (c, s) in enumerate(rots):
            top = min(k + 2, m - 1) + 1
            ck = B[:top, k].copy()
            ck1 = B[:top, k + 1].copy()
            B[:top, k] = c * ck + s.conjugate() * ck1
            B[:top, k + 1] = -s * ck + c * ck1
        B[idx, idx] += shift
    return eig, sweeps


def _inverse_iteration_residual(M: np.ndarray, lam: complex, rng: np.random.Generator) -> float:
    n = M.shape[0]
    scale = max(np.linalg.norm(M, 1), 1.0)
    shift = lam + 1e-10 * scale * (1.0 + 0.5j)
    A = M - shift * np.eye(n)
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    x /= np.linalg.norm(x)
    best = math.inf
    # for strongly non-normal M later steps can drift; keep the best vector
    for _ in range(3):
        try:
            x = np.linalg.solve(A, x)
        except np.linalg.LinAlgError:
            break
        nx = np.linalg.norm(x)
        if not np.isfinite(nx) or nx == 0.0:
            break
        x /= nx
        best = min(best, float(np.linalg.norm(M @ x - lam * x)))
    return best if math.isfinite(best) else float(np.linalg.norm(M @ x - lam * x))


def eigenvalues(
    M: DiscreteOperatorMatrix | np.ndarray,
    method: str = "auto",
    *,
    permute: bool = True,
    samples: int = 10,
    seed: int = 0,
) -> EigenDecomposition:
    """All eigenvalues of a square matrix (``N <= 1024``).

    ``method="auto"`` reads triangular matrices off the diagonal;
    ``method="qr"`` always runs balancing, Hessenberg reduction and shifted
    QR.  ``permute=False`` skips permutation isolation so QR sees the whole
    matrix; for triangular inputs with ill-conditioned eigenvalues that
    costs accuracy, exactly as in any backward-stable solver.
    """
    entries = M.entries if isinstance(M, DiscreteOperatorMatrix) else np.asarray(M, dtype=complex)
    n = entries.shape[0]
    if entries.ndim != 2 or entries.shape[1] != n:
        raise ValueError("eigenvalues need a square matrix")
    if n > 1024:
        raise ValueError("eigenvalues supports N <= 1024")
    if method not in ("auto", "qr"):
        raise ValueError(f"unknown method {method!r}")
    sweeps = 0
    if method == "auto" and (not np.any(np.triu(entries, 1)) or not np.any(np.tril(entries, -1))):
        eig = np.diag(entries).copy()
        used = "triangular"
    else:
        B, lo, hi = balance(entries, permute=permute)
        eig = np.diag(B).copy()
        if hi > lo:
            H = hessenberg(B[lo:hi + 1, lo:hi + 1])
            eig[lo:hi + 1], sweeps = _hessenberg_qr(H, 30 * n)
        used = "qr"
    rng = np.random.default_rng(seed)
    idx = np.unique(np.linspace(0, n - 1, min(samples, n)).round().astype(int))
    res = np.array([_inverse_iteration_residual(entries, eig[i], rng) for i in idx])
    return EigenDecomposition(eig, res, idx, used, sweeps)


def hausdorff_distance(a: Sequence[complex], b: Sequence[complex]) -> float:
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    D = np.abs(a[:, None] - b[None, :])
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


# ---------------------------------------------------------------------------
# norms


@dataclass(frozen=True)
class NormEstimate:
    """A lower bound on an operator norm and the theoretical upper bound."""

    lower: float
    upper_bound: float | None
    method: str
    iterations: int

    @property
    def within_bound(self) -> bool | None:
        return None if self.upper_bound is None else self.lower <= self.upper_bound


def theoretical_norm_bound(op_id: str, params: Mapping[str, Any], p: LebesgueExponent | float) -> float:
    """Known norm (``T``, ``S``) or upper bound (``C_α``) on ``L^p``."""
    pe = as_exponent(p)
    if op_id == "T(t)":
        return math.exp(-float(params["t"]) * pe.inv_conj)
    if op_id == "S(t)":
        return math.exp(-float(params["t"]) * pe.inv)
    if op_id == "C_alpha":
        return cesaro_norm_bound(params["alpha"], pe)
    if op_id == "C_alpha_star":
        # duality: ‖C_α*‖_p = ‖C_α‖_{p'}
        return cesaro_norm_bound(params["alpha"], LebesgueExponent(pe.conjugate))
    raise ValueError(f"no norm bound for {op_id!r}")


def matrix_operator(M: np.ndarray, grid: Grid) -> tuple[Callable[[GridFunction], GridFunction],
                                                        Callable[[GridFunction], GridFunction]]:
    """Node-value operator ``f -> M f`` and its adjoint in the grid inner product."""
    # complex, contiguous copies: mixed real/complex matvecs recast M each call
    M = np.ascontiguousarray(M, dtype=complex)
    MH = np.ascontiguousarray(M.conj().T)
    w = grid.weights

    def apply(f: GridFunction) -> GridFunction:
        return GridFunction(grid, M @ f.values, None, "M f")

    def adjoint(f: GridFunction) -> GridFunction:
        return GridFunction(grid, (MH @ (w * f.values)) / w, None, "M* f")

    return apply, adjoint


def operator_norm_estimate(
    apply: Callable[[GridFunction], GridFunction],
    p: LebesgueExponent | float,
    trials: int,
    *,
    grid: Grid,
    adjoint: Callable[[GridFunction], GridFunction] | None = None,
    upper_bound: float | None = None,
    start: GridFunction | None = None,
    witnesses: Sequence[GridFunction] = (),
    rng: np.random.Generator | None = None,
    iterations: int = 300,
    tol: float = 1e-13,
) -> NormEstimate:
    """Lower bound on ``‖apply‖`` on ``L^p``.

    For ``p = 2`` with an adjoint: power iteration on ``adjoint ∘ apply``
    from ``start`` (then random starts).  Otherwise: the best ratio
    ``‖apply f‖_p / ‖f‖_p`` over ``witnesses`` and ``trials`` random probes.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    pe = as_exponent(p)
    rng = rng if rng is not None else np.random.default_rng(0)
    best = 0.0
    for f in witnesses:
        best = max(best, lp_norm(apply(f), pe) / lp_norm(f, pe))
    if pe.p == 2.0 and adjoint is not None:
        total = 0
        for trial in range(trials):
            x = start if (trial == 0 and start is not None) else random_smooth(grid, rng)
            x = x.with_values(x.values / lp_norm(x, 2))
            est = 0.0
            for it in range(iterations):
                y = apply(x)
                new = lp_norm(y, 2)
                z = adjoint(y)
                nz = lp_norm(z, 2)
                total += 1
                if nz == 0.0:
                    break
                x = z.with_values(z.values / nz)
                if abs(new - est) <= tol * max(new, 1e-300):
                    est = new
                    break
                est = new
            best = max(best, est)
        return NormEstimate(best, upper_bound, "power-iteration", total)
    for _ in range(trials):
        f = random_smooth(grid, rng)
        best = max(best, lp_norm(apply(f), pe) / lp_norm(f, pe))
    return NormEstimate(best, upper_bound, "random-probe", trials)


# ---------------------------------------------------------------------------
# comparison and reports


@dataclass(frozen=True)
class SetDistance:
    max_outside: float
    inside: int
    total: int
    coverage_note: str


def set_distance(eigs: EigenDecomposition | Sequence[complex], predicted: SpectralSet) -> SetDistance:
    """Largest distance from a computed eigenvalue to the predicted set."""
    vals = eigs.eigenvalues if isinstance(eigs, EigenDecomposition) else np.asarray(eigs, dtype=complex)
    vals = np.atleast_1d(vals)
    d = np.atleast_1d(predicted.distance(vals)) if vals.size else np.zeros(0)
    inside = int(np.sum(d <= 1e-9))
    note = (f"{inside} of {vals.size} eigenvalues lie in the predicted set; finite sections "
            "need not fill the set and coverage is not asserted")
    return SetDistance(float(d.max()) if d.size else 0.0, inside, int(vals.size), note)


def write_spectral_report(
    out_stem: str | Path,
    predicted: SpectralSet,
    eigs: EigenDecomposition | None = None,
    tol: float = 1e-8,
) -> tuple[Path, Path]:
    """``<stem>.json`` (set, eigenvalues, verdict) and ``<stem>.csv`` (kind, re, im)."""
    out_stem = Path(out_stem)
    rows: list[tuple[Any, ...]] = [("boundary", z.real, z.imag) for z in predicted.boundary_samples]
    payload: dict[str, Any] = {**predicted.as_dict(),
                               "predicted_boundary": list(predicted.boundary_samples)}
    if eigs is not None:
        sd = set_distance(eigs, predicted)
        rows += [("eigenvalue", z.real, z.imag) for z in eigs.eigenvalues]
        payload.update(eigenvalues=list(eigs.eigenvalues), max_outside=sd.max_outside,
                       coverage_note=sd.coverage_note,
                       verdict="pass" if sd.max_outside <= tol else "fail", tol=tol)
    else:
        payload.update(eigenvalues=[], max_outside=None, verdict="informational")
    csv_path = write_table(out_stem.with_suffix(".csv"), ["kind", "re", "im"], rows)
    json_path = out_stem.with_suffix(".json")
    write_atomic(json_path, canonical_json(payload, indent=1) + "\n")
    return csv_path, json_path
