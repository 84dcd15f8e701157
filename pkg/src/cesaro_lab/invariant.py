"""Monomial spaces, the Müntz sum, cyclic iterates and universality witnesses.

Everything here lives on ``L²[0,1]`` and the monomials
``g_λ(s) = s^{-(λ+1)}``, which lie in ``L²`` exactly when ``Re λ < -1/2``.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np
from scipy.special import comb

from .funcspace import (
    Grid,
    GridFunction,
    as_lambda,
    distance_to_span,
    log_monomial,
    lp_norm,
    monomial,
    random_smooth,
)
from .koopman import _time, apply_T
from .report import write_table

__all__ = [
    "MonomialSpaceSpec",
    "MuntzVerdict",
    "muntz_criterion",
    "write_muntz_trace",
    "monomial_invariance_residual",
    "cyclic_iterate_distance",
    "cyclic_distance_closed_form",
    "LogCyclicDistances",
    "log_cyclic_iterate_distance",
    "shift_matrix",
    "log_gram",
    "generalized_eigenspace_residual",
    "CaradusWitness",
    "caradus_preimage",
    "caradus_witness",
]

HALF = -0.5  # the L² threshold -1/p' at p = 2


def _inside(lam: complex) -> complex:
    lam = as_lambda(lam)
    if not lam.real < HALF:
        raise ValueError(f"exponent {lam!r} is outside Re λ < -1/2")
    return lam


# ---------------------------------------------------------------------------
# monomial spaces and the Müntz sum


@dataclass(frozen=True)
class MonomialSpaceSpec:
    """Finite set of exponents, all with ``Re λ < -1/2``."""

    exponents: tuple[complex, ...]
    label: str = ""

    def __post_init__(self) -> None:
        exps = tuple(_inside(e) for e in self.exponents)
        if not exps:
            raise ValueError("a monomial space needs at least one exponent")
        object.__setattr__(self, "exponents", exps)

    def basis(self, grid: Grid) -> list[GridFunction]:
        return [monomial(e, grid) for e in self.exponents]

    def combination(self, coefficients: Sequence[complex], grid: Grid) -> GridFunction:
        if len(coefficients) != len(self.exponents):
            raise ValueError("one coefficient per exponent")
        out = None
        for c, g in zip(coefficients, self.basis(grid)):
            term = c * g
            out = term if out is None else out + term
        return out


def monomial_invariance_residual(spec: MonomialSpaceSpec, t: float, coefficients: Sequence[complex],
                                 grid: Grid) -> float:
    """``dist(T(t) f, span)`` for ``f`` in the span (zero in exact arithmetic)."""
    f = spec.combination(coefficients, grid)
    return float(distance_to_span(apply_T(t, f), spec.basis(grid)))


@dataclass(frozen=True, eq=False)
class MuntzVerdict:
    """Partial sums of ``-(2 Re s_n + 1) / |s_n|²`` and the resulting verdict.

    ``verdict`` is ``convergent`` (closed span is a proper subspace) or
    ``divergent`` (the span is dense).  ``certified`` is true only when a
    caller-supplied tail bound decided it.
    """

    terms: np.ndarray
    partial_sums: np.ndarray
    verdict: str
    conclusion: str
    terms_used: int
    certified: bool
    method: str
    block_sums: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        for name in ("terms", "partial_sums", "block_sums"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def _take(seq: Iterable[Any] | Callable[[int], Any], count: int) -> list[complex]:
    if callable(seq):
        return [as_lambda(seq(n)) for n in range(count)]
    got = [as_lambda(s) for s in itertools.islice(iter(seq), count)]
    if len(got) < count:
        raise ValueError(f"sequence produced {len(got)} terms, {count} requested")
    return got


def muntz_criterion(
    seq: Iterable[Any] | Callable[[int], Any],
    terms: int = 4096,
    *,
    tail_bound: Callable[[int], float] | None = None,
    tol: float = 1e-2,
    ratio: float = 0.75,
) -> MuntzVerdict:
    """Decide convergence of ``Σ -(2 Re s_n + 1)/|s_n|²`` from ``terms`` terms.

    Without ``tail_bound`` the verdict is heuristic: convergent iff the last
    complete dyadic block sum is below ``tol`` and at most ``ratio`` times the
    previous block.  A finite ``tail_bound(terms)`` (an upper bound on the
    remaining tail) certifies convergence.
    """
    if terms < 100:
        raise ValueError("terms must be >= 100")
    s = np.array(_take(seq, terms), dtype=complex)
    bad = np.flatnonzero(~(s.real < HALF))
    if bad.size:
        raise ValueError(f"exponent s_{bad[0]} = {s[bad[0]]!r} is outside Re s < -1/2")
    vals = -(2.0 * s.real + 1.0) / np.abs(s) ** 2
    # nonnegative increments keep the rounded cumulative sum nondecreasing
    partial = np.cumsum(vals)

    nblocks = int(math.log2(terms))
    blocks = np.array([vals[(1 << j) - 1:(1 << (j + 1)) - 1].sum() for j in range(nblocks)])
    if tail_bound is not None:
        bound = float(tail_bound(terms))
        if math.isfinite(bound):
            return MuntzVerdict(vals, partial, "convergent", "nontrivial-subspace", terms, True,
                                "tail-bound", blocks)
    last, prev = blocks[-1], blocks[-2]
    convergent = last < tol and last <= ratio * prev
    return MuntzVerdict(
        vals, partial, "convergent" if convergent else "divergent",
        "nontrivial-subspace" if convergent else "dense", terms, False, "dyadic-block-heuristic", blocks,
    )


def write_muntz_trace(verdict: MuntzVerdict, path: str | Path) -> Path:
    rows = ((n, verdict.terms[n], verdict.partial_sums[n]) for n in range(verdict.terms_used))
    return write_table(path, ["n", "term", "partial_sum"], rows)


# ---------------------------------------------------------------------------
# cyclic iterates


def _product(lam: complex, f: GridFunction, m: int = 0) -> GridFunction:
    """``g_λ (log s)^m f`` with an analytic evaluator when ``f`` has one."""
    base = log_monomial(lam, m, f.grid) if m else monomial(lam, f.grid)
    return base * f


def cyclic_iterate_distance(lam: complex, f: GridFunction, L: complex, t: float, n: int) -> float:
    """``‖e^{-ntλ} T(nt)(g_λ f) - L g_λ‖₂`` through the semigroup action."""
    lam = _inside(lam)
    t = _time(t)
    if n < 0:
        raise ValueError("n must be nonnegative")
    g = _product(lam, f)
    it = apply_T(n * t, g)
    scaled = it.with_values(cmath.exp(-n * t * lam) * it.values)
    return lp_norm(scaled - complex(L) * monomial(lam, f.grid), 2)


def cyclic_distance_closed_form(lam: complex, f: Callable[[np.ndarray], np.ndarray], L: complex,
                                t: float, n: int, grid: Grid) -> float:
    """Independent form ``‖g_λ (f(e^{-nt} s) - L)‖₂`` by quadrature."""
    lam = _inside(lam)
    s = grid.nodes
    vals = np.exp(-(lam + 1.0) * np.log(s)) * (f(math.exp(-n * t) * s) - L)
    return float(np.sqrt(np.sum(grid.weights * np.abs(vals) ** 2)))


@dataclass(frozen=True)
class LogCyclicDistances:
    to_h_n: float
    h_n_to_target: float


def log_cyclic_iterate_distance(lam: complex, m: int, f: GridFunction, L: complex, t: float,
                                n: int) -> LogCyclicDistances:
    """The two distances for ``g = g_λ log^m f``.

    ``h_n = e^{-ntλ} T(nt)(g_λ log^m) / (nt)^m = g_λ (log s - nt)^m / (nt)^m``;
    returned are ``‖e^{-ntλ}T(nt)g/(nt)^m - L h_n‖`` and
    ``‖L h_n - (-1)^m L g_λ‖``.
    """
    lam = _inside(lam)
    t = _time(t)
    if m < 1:
        raise ValueError("m must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    L = complex(L)
    grid = f.grid
    nt = n * t
    scale = cmath.exp(-nt * lam) / nt**m
    it = apply_T(nt, _product(lam, f, m))
    lhs = it.with_values(scale * it.values)
    hm = apply_T(nt, log_monomial(lam, m, grid))
    h_n = hm.with_values(scale * hm.values)
    first = lp_norm(lhs - L * h_n, 2)
    second = lp_norm(L * h_n - ((-1) ** m) * L * monomial(lam, grid), 2)
    return LogCyclicDistances(first, second)


# ---------------------------------------------------------------------------
# generalized eigenspaces


def shift_matrix(m: int, t: float) -> np.ndarray:
    """Coefficients of ``P(x - t)`` from those of ``P(x)``, degree ``<= m``.

    Column ``j`` holds ``(x - t)^j = Σ_i C(j, i) (-t)^{j-i} x^i``.
    """
    U = np.zeros((m + 1, m + 1))
    for j in range(m + 1):
        for i in range(j + 1):
            U[i, j] = comb(j, i, exact=True) * (-t) ** (j - i)
    return U


def log_gram(lam: complex, m: int) -> np.ndarray:
    """Exact Gram matrix ``∫_0^1 |g_λ|² log^{i+j} s ds = (-1)^{i+j}(i+j)!/a^{i+j+1}``, ``a = -(2Re λ+1)``."""
    a = -(2.0 * as_lambda(lam).real + 1.0)
    G = np.empty((m + 1, m + 1))
    for i in range(m + 1):
        for j in range(m + 1):
            k = i + j
            G[i, j] = (-1) ** k * math.factorial(k) / a ** (k + 1)
    return G


def _coef_norm(c: np.ndarray, G: np.ndarray) -> float:
    return float(math.sqrt(max(np.real(c.conj() @ G @ c), 0.0)))


def generalized_eigenspace_residual(
    lam: complex,
    m: int,
    t: float,
    *,
    power: int | None = None,
    relative: bool = False,
    method: str = "coefficient",
    grid: Grid | None = None,
) -> float:
    """``max_j ‖(e^{λt} - T(t))^power (g_λ log^j)‖₂`` over ``j <= m``.

    ``power`` defaults to ``m + 1``.  The ``coefficient`` method uses
    ``T(t)(g_λ P(log)) = e^{λt} g_λ P(log - t)`` and exact Gram matrices; the
    ``pointwise`` method expands the power binomially and applies ``T`` on
    ``grid``.  With ``relative`` each term is divided by ``‖g_λ log^j‖₂``.
    """
    lam = _inside(lam)
    t = _time(t)
    if m < 0:
        raise ValueError("m must be nonnegative")
    k = m + 1 if power is None else int(power)
    mu = cmath.exp(lam * t)
    worst = 0.0
    if method == "coefficient":
        G = log_gram(lam, m)
        N = (np.eye(m + 1) - shift_matrix(m, t)).astype(complex)
        Nk = np.linalg.matrix_power(N, k) * mu**k
        for j in range(m + 1):
            e = np.zeros(m + 1, dtype=complex)
            e[j] = 1.0
            r = _coef_norm(Nk @ e, G)
            if relative:
                r /= _coef_norm(e, G)
            worst = max(worst, r)
        return worst
    if method == "pointwise":
        if grid is None:
            raise ValueError("the pointwise method needs a grid")
        for j in range(m + 1):
            g = log_monomial(lam, j, grid)
            acc = np.zeros(len(grid), dtype=complex)
            for i in range(k + 1):
                acc += comb(k, i, exact=True) * mu ** (k - i) * (-1) ** i * apply_T(i * t, g).values
            r = lp_norm(g.with_values(acc), 2)
            if relative:
                r /= lp_norm(g, 2)
            worst = max(worst, r)
        return worst
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# universality witnesses for mu - T(t)


def caradus_preimage(t: float, mu: complex, f: Callable[[np.ndarray], np.ndarray]) -> Callable[[np.ndarray], np.ndarray]:
    """Exact solution ``g`` of ``(μ - T(t)) g = f``, as a pointwise evaluator.

    ``μ = 0``: ``g(s) = -e^t χ_{s<e^{-t}} f(e^t s)``.  Otherwise, on bands
    ``s = e^{-kt} v`` with ``v ∈ (e^{-t}, 1]`` and ``g = 0`` on band 0,
    ``g(e^{-kt} v) = -Σ_{j<k} e^{(k-j)t} μ^{k-1-j} f(e^{-jt} v)``.
    This lies in ``L²`` iff ``|μ| e^{t/2} < 1``.
    """
    t = _time(t)
    if t <= 0:
        raise ValueError("t must be positive")
    mu = complex(mu)
    et = math.exp(t)

    if mu == 0:
        def g0(s: np.ndarray) -> np.ndarray:
            s = np.asarray(s, dtype=float)
            inside = s < 1.0 / et
            out = np.zeros(s.shape, dtype=complex)
            out[inside] = -et * f(et * s[inside])
            return out
        return g0

    def g(s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        flat = s.ravel()
        k = np.maximum(np.floor(-np.log(flat) / t), 0).astype(np.int64)
        v = flat * np.exp(k * t)
        # guard v against rounding just outside (e^{-t}, 1]
        over = v > 1.0
        k[over] += 1
        v[over] *= math.exp(-t)
        acc = np.zeros(flat.size, dtype=complex)
        for j in range(int(k.max(initial=0))):
            sel = k > j
            kk = k[sel]
            acc[sel] -= np.exp((kk - j) * t) * mu ** (kk - 1 - j) * f(np.exp(-j * t) * v[sel])
        return acc.reshape(s.shape)

    return g


@dataclass(frozen=True, eq=False)
class CaradusWitness:
    kernel_dim_witness: int
    kernel_residuals: np.ndarray
    surjectivity_residual: float
    universal: bool
    decay_ok: bool
    band_ratio: float
    notes: str = ""


def _band_ratio(t: float, mu: complex, f: Callable[[np.ndarray], np.ndarray], bands: int = 40) -> float:
    """Geometric-mean contraction of band norms ``e^{-kt/2} ‖G_k‖`` over the last bands."""
    if mu == 0:
        return 0.0
    v = np.linspace(math.exp(-t), 1.0, 65)[1:]
    et = math.exp(t)
    G = np.zeros(v.size, dtype=complex)
    norms = []
    for k in range(bands):
        norms.append(math.exp(-k * t / 2) * float(np.sqrt(np.mean(np.abs(G) ** 2))))
        G = et * (mu * G - f(math.exp(-k * t) * v))
    tail = np.array(norms[-10:])
    if tail[0] == 0.0:
        return 0.0
    return float((tail[-1] / tail[0]) ** (1.0 / (tail.size - 1)))


def caradus_witness(
    t: float,
    mu: complex,
    *,
    grid: Grid,
    kernel_count: int = 20,
    probes: int = 20,
    seed: int = 0,
    kernel_tol: float = 1e-10,
) -> CaradusWitness:
    """Exhibit kernel elements and exact preimages for ``μ - T(t)`` on ``L²``.

    Kernel: for ``μ = e^{λt}`` the monomials ``g_{λ + 2πik/t}`` (counted only
    when ``Re λ < -1/2``); for ``μ = 0`` bumps supported in ``(e^{-t}, 1)``.
    The count is the numerical rank of the accepted elements.  Surjectivity:
    the worst ``‖(μ - T(t)) g_f - f‖₂`` over random smooth ``f``.
    """
    t = _time(t)
    mu = complex(mu)
    universal = abs(mu) < math.exp(-t / 2.0)
    cut = math.exp(-t)
    w = grid.weights
    s = grid.nodes

    kernel: list[np.ndarray] = []
    residuals: list[float] = []
    if mu == 0:
        for k in range(1, kernel_count + 1):
            def bump(x: np.ndarray, k: int = k) -> np.ndarray:
                x = np.asarray(x, dtype=float)
                u = (x - cut) / (1.0 - cut)
                return np.where((x > cut) & (x < 1.0), np.sin(k * math.pi * u), 0.0) + 0j
            fk = GridFunction.from_callable(grid, bump, f"bump{k}")
            res = lp_norm(apply_T(t, fk), 2) / max(lp_norm(fk, 2), 1e-300)
            residuals.append(res)
            if res < kernel_tol:
                kernel.append(fk.values)
    else:
        lam = cmath.log(mu) / t
        if lam.real < HALF:
            half = kernel_count // 2
            for k in range(-half, kernel_count - half):
                gk = monomial(lam + 2j * math.pi * k / t, grid)
                r = mu * gk - apply_T(t, gk)
                res = lp_norm(r, 2) / lp_norm(gk, 2)
                residuals.append(res)
                if res < kernel_tol:
                    kernel.append(gk.values)
    if kernel:
        B = np.stack(kernel, axis=1) * np.sqrt(w)[:, None]
        B /= np.linalg.norm(B, axis=0)
        sv = np.linalg.svd(B, compute_uv=False)
        dim = int(np.sum(sv > 1e-8 * sv[0]))
    else:
        dim = 0

    rng = np.random.default_rng(seed)
    worst = 0.0
    first_f = None
    for _ in range(probes):
        f = random_smooth(grid, rng)
        if first_f is None:
            first_f = f.analytic
        g = caradus_preimage(t, mu, f.analytic)
        image = mu * g(s) - cut * g(cut * s)
        r = image - f.values
        worst = max(worst, float(np.sqrt(np.sum(w * np.abs(r) ** 2))))
    ratio = _band_ratio(t, mu, first_f)
    decay_ok = ratio < 1.0
    notes = "" if decay_ok else "band norms of the preimage do not contract; it is not in L²"
    return CaradusWitness(dim, np.array(residuals), worst, universal, decay_ok, ratio, notes)
