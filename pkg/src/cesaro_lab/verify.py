"""Verification suites: each returns a list of :class:`ReportRecord` rows."""

from __future__ import annotations

import cmath
import math
import platform
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

import numpy as np
import scipy

from . import __version__
from .cesaro import (
    apply_C_alpha,
    apply_C_alpha_star,
    c1_nystrom_matrix,
    cesaro_norm_bound,
    eigen_multiplier,
    resolvent_Lambda0,
    resolvent_Lambda1,
    unboundedness_sweep,
)
from .discrete import (
    SequenceVector,
    intertwine_residual,
    matrix_C_alpha_disc,
    matrix_S_disc,
    matrix_T_disc,
)
from .funcspace import (
    Grid,
    GridFunction,
    default_grid,
    lp_norm,
    monomial,
    pairing,
    random_smooth,
)
from .invariant import (
    MonomialSpaceSpec,
    caradus_witness,
    cyclic_iterate_distance,
    generalized_eigenspace_residual,
    log_cyclic_iterate_distance,
    monomial_invariance_residual,
    muntz_criterion,
)
from .koopman import T_at, S_at, apply_A, apply_B, apply_S, apply_T, ode_solution_A, ode_solution_B
from .report import ReportRecord, write_report
from .specfun import gamma, gamma_quotient
from .spectra import (
    eigenvalues,
    matrix_operator,
    operator_norm_estimate,
    predicted_spectrum,
    set_distance,
    write_spectral_report,
)

__all__ = ["ConfigError", "RunConfig", "SUITES", "run_suite", "run_and_write"]


class ConfigError(ValueError):
    """Invalid run configuration (CLI exit status 2)."""


@dataclass(frozen=True)
class RunConfig:
    grid_size: int = 4096
    truncation_N: int = 128
    tol_overrides: Mapping[str, float] = field(default_factory=dict)
    output_dir: Path = Path("cesaro_out")
    seed: int = 0
    alpha: complex = 1.0
    p: float = 2.0
    t: float = 0.5
    lam: complex = -1.0

    def __post_init__(self) -> None:
        if self.grid_size < 64:
            raise ConfigError("grid_size must be >= 64")
        if self.truncation_N < 8:
            raise ConfigError("truncation_N must be >= 8")
        if not complex(self.alpha).real > 0:
            raise ConfigError("alpha needs a positive real part")
        if not (math.isfinite(float(self.p)) and float(self.p) >= 1.0):
            raise ConfigError("p must lie in [1, inf)")
        if not float(self.t) >= 0:
            raise ConfigError("t must be nonnegative")
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        object.__setattr__(self, "tol_overrides", dict(self.tol_overrides))

    def tol(self, key: str, default: float) -> float:
        return float(self.tol_overrides.get(key, default))

    def header(self) -> dict[str, Any]:
        return {
            "grid_size": self.grid_size,
            "truncation_N": self.truncation_N,
            "tol_overrides": dict(sorted(self.tol_overrides.items())),
            "seed": self.seed,
            "alpha": complex(self.alpha),
            "p": self.p,
            "t": self.t,
            "lambda": complex(self.lam),
        }


def _smooth(grid: Grid) -> GridFunction:
    return GridFunction.from_callable(grid, lambda s: np.cos(3.0 * s) + s**2, "cos(3s)+s^2", power=0.0)


def _rel(a: GridFunction, b: GridFunction) -> float:
    return lp_norm(a - b, 2) / max(lp_norm(b, 2), 1e-300)


def _interior(r: np.ndarray, grid: Grid, lo: float = 1e-3, hi: float = 1.0 - 1e-3) -> float:
    sel = (grid.nodes >= lo) & (grid.nodes <= hi)
    return float(np.sqrt(np.sum(grid.weights[sel] * np.abs(r[sel]) ** 2)))


# ---------------------------------------------------------------------------
# suites


def suite_norms(cfg: RunConfig, rng: np.random.Generator) -> list[ReportRecord]:
    out = []
    for t in (0.25, 1.0, 3.0):
        cut = math.exp(-t)
        g = default_grid(cfg.grid_size, breakpoints=(cut,))
        worst = 0.0
        for _ in range(50):
            f = random_smooth(g, rng)
            ratio = lp_norm(apply_S(t, f), 2) / lp_norm(f, 2)
            worst = max(worst, abs(ratio / math.exp(-t / 2) - 1.0))
        out.append(ReportRecord.check("norm-S-isometry-scaling", worst, cfg.tol("norm-S-isometry-scaling", 1e-6),
                                      measured=worst, predicted=0.0, t=t, samples=50))
        chi = GridFunction.from_callable(g, lambda s: (np.asarray(s) < cut).astype(complex), "chi")
        ratio = lp_norm(apply_T(t, chi), 2) / lp_norm(chi, 2)
        out.append(ReportRecord.check("norm-T-witness", abs(ratio / math.exp(-t / 2) - 1.0),
                                      cfg.tol("norm-T-witness", 1e-6), measured=ratio,
                                      predicted=math.exp(-t / 2), t=t))
    g = default_grid(cfg.grid_size)
    apply, adjoint = matrix_operator(c1_nystrom_matrix(g), g)
    start = GridFunction.from_callable(g, lambda s: s**-0.48, "s^-0.48")
    bound = cesaro_norm_bound(1.0, 2.0)
    est = operator_norm_estimate(apply, 2.0, 1, grid=g, adjoint=adjoint, start=start, upper_bound=bound)
    gap = max(0.0, 1.9 - est.lower) + max(0.0, est.lower - (bound + 1e-3))
    out.append(ReportRecord.check("norm-C1-power-iteration", gap, cfg.tol("norm-C1-power-iteration", 0.0),
                                  measured=est.lower, predicted=bound, window=[1.9, bound + 1e-3],
                                  grid_size=cfg.grid_size))
    return out


def suite_semigroup(cfg: RunConfig, rng: np.random.Generator) -> list[ReportRecord]:
    out = []
    g = default_grid(cfg.grid_size)
    f = _smooth(g)
    s = g.nodes
    scale = float(np.abs(f.values).max())
    for a, b in ((0.3, 0.7), (1.0, 2.5)):
        rT = np.abs(T_at(a, apply_T(b, f), s) - T_at(a + b, f, s)).max() / scale
        rS = np.abs(S_at(a, apply_S(b, f), s) - S_at(a + b, f, s)).max() / scale
        out.append(ReportRecord.check("semigroup-law-T", rT, cfg.tol("semigroup-law-T", 1e-12), measured=rT, s=a, t=b))
        out.append(ReportRecord.check("semigroup-law-S", rS, cfg.tol("semigroup-law-S", 1e-12), measured=rS, s=a, t=b))
    for lam in (-1.0, -2 + 3j):
        gl = monomial(lam, g)
        r = _rel(apply_A(gl), lam * gl)
        out.append(ReportRecord.check("generator-A-eigenfunction", r, cfg.tol("generator-A-eigenfunction", 1e-6),
                                      measured=r, lam=complex(lam)))
    h = GridFunction.from_callable(g, lambda x: x**2 - x**3, "s^2-s^3")
    r = _rel(apply_B(h), GridFunction.from_callable(g, lambda x: 2 * x**2 - 3 * x**3, "sh'"))
    out.append(ReportRecord.check("generator-B-action", r, cfg.tol("generator-B-action", 1e-6), measured=r))
    for lam in (0.5, 1.0):
        gA = ode_solution_A(lam, f, 0.7)
        rA = _interior((lam * gA - apply_A(gA) - f).values, g)
        gB = ode_solution_B(lam, f, -0.3)
        rB = _interior((lam * gB - _b_quiet(gB) - f).values, g)
        out.append(ReportRecord.check("ode-solution-A", rA, cfg.tol("ode-solution-A", 1e-6), measured=rA, lam=lam, K=0.7))
        out.append(ReportRecord.check("ode-solution-B", rB, cfg.tol("ode-solution-B", 1e-6), measured=rB, lam=lam, K=-0.3))
    return out


def _b_quiet(h: GridFunction) -> GridFunction:
    import warnings

    from .koopman import DomainWarning

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DomainWarning)
        return apply_B(h)


def suite_resolvent(cfg: RunConfig, rng: np.random.Generator) -> list[ReportRecord]:
    out = []
    g = default_grid(cfg.grid_size)
    f = _smooth(g)
    for lam in (0.5, 1.0):
        a0 = resolvent_Lambda0(lam, f)
        b0 = resolvent_Lambda0(lam, f, method="laplace")
        a1 = resolvent_Lambda1(lam, f)
        b1 = resolvent_Lambda1(lam, f, method="laplace")
        r0, r1 = _rel(a0, b0), _rel(a1, b1)
        out.append(ReportRecord.check("resolvent-Lambda0-laplace", r0, cfg.tol("resolvent-Lambda0-laplace", 1e-6),
                                      measured=r0, lam=lam))
        out.append(ReportRecord.check("resolvent-Lambda1-laplace", r1, cfg.tol("resolvent-Lambda1-laplace", 1e-6),
                                      measured=r1, lam=lam))
        rA = _interior((lam * a0 - apply_A(a0) - f).values, g)
        out.append(ReportRecord.check("resolvent-Lambda0-inverts", rA, cfg.tol("resolvent-Lambda0-inverts", 1e-6),
                                      measured=rA, lam=lam))
    size = max(cfg.grid_size, 1024)
    for p in (2.0, 3.0):
        for rec in unboundedness_sweep(p, [1e2, 1e4, 1e6], grid_size=size,
                                       tol=cfg.tol("L-unbounded-ratio", 1e-4)):
            out.append(rec)
    return out


def suite_cesaro(cfg: RunConfig, rng: np.random.Generator) -> list[ReportRecord]:
    out = []
    g = default_grid(cfg.grid_size)
    alphas = [1.0, 0.5, 1 + 1j]
    if complex(cfg.alpha) not in alphas:
        alphas.append(complex(cfg.alpha))
    for a in alphas:
        for lam in (-1.0, -2 + 3j):
            gl = monomial(lam, g)
            mult = eigen_multiplier(a, lam)
            r = _rel(apply_C_alpha(a, gl), mult * gl)
            out.append(ReportRecord.check("cesaro-eigen-identity", r, cfg.tol("cesaro-eigen-identity", 1e-6),
                                          measured=r, predicted=mult, alpha=complex(a), lam=complex(lam)))
    f = _smooth(g)
    for a in (1.0, 0.5):
        r = _rel(apply_C_alpha(a, f, method="subordination"), apply_C_alpha(a, f))
        out.append(ReportRecord.check("cesaro-subordination", r, cfg.tol("cesaro-subordination", 1e-6),
                                      measured=r, alpha=a))
        r = _rel(apply_C_alpha_star(a, f, method="subordination"), apply_C_alpha_star(a, f))
        out.append(ReportRecord.check("cesaro-star-subordination", r, cfg.tol("cesaro-star-subordination", 1e-6),
                                      measured=r, alpha=a))
    one = GridFunction.from_callable(g, lambda s: np.ones_like(s, dtype=complex), "1")
    r = _rel(apply_C_alpha_star(1.0, one), GridFunction.from_callable(g, lambda s: -np.log(s) + 0j, "-log"))
    out.append(ReportRecord.check("cesaro-star-constant", r, cfg.tol("cesaro-star-constant", 1e-6), measured=r))
    h = GridFunction.from_callable(g, lambda s: np.exp(s) - 1j * s, "exp(s)-is")
    a = 0.8
    lhs = pairing(apply_C_alpha(a, f), h)
    rhs = pairing(f, apply_C_alpha_star(a, h))
    r = abs(lhs - rhs) / abs(lhs)
    out.append(ReportRecord.check("cesaro-duality", r, cfg.tol("cesaro-duality", 1e-6),
                                  measured=lhs, predicted=rhs, alpha=a))
    return out


def suite_discrete(cfg: RunConfig, rng: np.random.Generator) -> list[ReportRecord]:
    out = []
    N = cfg.truncation_N
    g = default_grid(cfg.grid_size)
    f = _smooth(g)
    n = np.arange(N)
    a = SequenceVector(1.0 / (1.0 + n) ** 2 + 0.3j * np.exp(-n))
    t, alpha = float(cfg.t), complex(cfg.alpha)
    for kind, prm, inp in (("S-V", t, f), ("V*-T", t, (a, g)), ("C*-V", alpha, f), ("V*-C", alpha, (a, g))):
        r = intertwine_residual(kind, prm, inp, N)
        out.append(ReportRecord.check(f"intertwine-{kind}", r, cfg.tol(f"intertwine-{kind}", 1e-6),
                                      measured=r, N=N, param=prm))
    T = matrix_T_disc(t, N).entries
    r = float(np.abs(T.sum(axis=1) - 1.0).max())
    out.append(ReportRecord.check("discrete-T-stochastic", r, cfg.tol("discrete-T-stochastic", 1e-12), measured=r, t=t))
    r = float(np.abs(matrix_S_disc(t, N).entries - T.T).max())
    out.append(ReportRecord.check("discrete-S-transpose", r, cfg.tol("discrete-S-transpose", 1e-14), measured=r, t=t))
    r = float(np.abs(matrix_T_disc(t, N).entries @ matrix_T_disc(0.3, N).entries
                     - matrix_T_disc(t + 0.3, N).entries).max())
    out.append(ReportRecord.check("discrete-T-semigroup", r, cfg.tol("discrete-T-semigroup", 1e-12), measured=r, t=t))
    return out


def suite_spectra(cfg: RunConfig, rng: np.random.Generator) -> list[ReportRecord]:
    out = []
    alphas = [1.0, 0.5, 2.0]
    if complex(cfg.alpha) not in alphas:
        alphas.append(complex(cfg.alpha))
    for a in alphas:
        M = matrix_C_alpha_disc(a, 64)
        eig = eigenvalues(M, "qr")
        ref = np.array([gamma(a + 1.0) * gamma_quotient(k + 1.0, k + a + 1.0) for k in range(64)])
        err = float(np.abs(np.sort_complex(eig.eigenvalues) - np.sort_complex(ref)).max())
        out.append(ReportRecord.check("discrete-spectrum-diagonal", err, cfg.tol("discrete-spectrum-diagonal", 1e-8),
                                      measured=err, alpha=complex(a), N=64))
        sd = set_distance(eig, predicted_spectrum("C_alpha_disc", {"alpha": a}, 2.0))
        out.append(ReportRecord.check("discrete-spectrum-in-set", sd.max_outside,
                                      cfg.tol("discrete-spectrum-in-set", 1e-8), measured=sd.max_outside,
                                      alpha=complex(a), note=sd.coverage_note))
        res = float(eig.residuals.max()) / float(np.linalg.norm(M.entries))
        out.append(ReportRecord.check("eigen-residual", res, cfg.tol("eigen-residual", 1e-8), measured=res,
                                      alpha=complex(a)))
    # interior certification of the C_alpha spectrum by exact eigenfunctions
    g = default_grid(cfg.grid_size)
    pe = float(cfg.p)
    if pe > 1.0 and pe == 2.0:
        for lam in (-1.0, -0.75 + 2j, -3 - 1j):
            gl = monomial(lam, g)
            val = eigen_multiplier(cfg.alpha, lam)
            r = _rel(apply_C_alpha(cfg.alpha, gl), val * gl)
            out.append(ReportRecord.check("cesaro-interior-eigenvalue", r, cfg.tol("cesaro-interior-eigenvalue", 1e-6),
                                          measured=r, predicted=val, alpha=complex(cfg.alpha), lam=complex(lam)))
    if pe > 1.0:
        S = predicted_spectrum("C_alpha", {"alpha": cfg.alpha}, pe)
        write_spectral_report(cfg.output_dir / "spectrum_C_alpha", S)
        d = float(np.max(S.distance(S.boundary_samples)))
        out.append(ReportRecord.check("spectral-set-boundary", d, cfg.tol("spectral-set-boundary", 1e-9),
                                      measured=d, alpha=complex(cfg.alpha), p=pe, Y=S.params["Y"]))
        if complex(cfg.alpha).imag == 0:
            peak = float(np.abs(S.boundary_samples).max())
            f0 = abs(S.boundary_samples[(len(S.boundary_samples) - 1) // 2])
            out.append(ReportRecord.check("spectral-radius-at-zero", abs(peak - f0), cfg.tol("spectral-radius-at-zero", 1e-12),
                                          measured=peak, predicted=f0, alpha=complex(cfg.alpha)))
    D = predicted_spectrum("T(t)", {"t": cfg.t}, pe)
    r = abs(D.params["radius"] - math.exp(-cfg.t * (1 - 1 / pe)))
    out.append(ReportRecord.check("semigroup-T-disk", r, cfg.tol("semigroup-T-disk", 1e-15),
                                  measured=D.params["radius"], t=cfg.t, p=pe))
    return out


def suite_invariant(cfg: RunConfig, rng: np.random.Generator) -> list[ReportRecord]:
    out = []
    v = muntz_criterion(lambda n: -1.0 + 1j * n, 1024)
    out.append(ReportRecord.check("muntz-convergent", 0.0 if v.verdict == "convergent" else 1.0, 0.0,
                                  measured=v.verdict, predicted="convergent", sequence="-1+in",
                                  method=v.method))
    v2 = muntz_criterion(lambda n: -0.5 - 1.0 / (n + 1), 1024)
    out.append(ReportRecord.check("muntz-divergent", 0.0 if v2.verdict == "divergent" else 1.0, 0.0,
                                  measured=v2.verdict, predicted="divergent", sequence="-1/2-1/n",
                                  method=v2.method))
    mono = float(np.all(np.diff(v.partial_sums) >= 0) and np.all(np.diff(v2.partial_sums) >= 0))
    out.append(ReportRecord.check("muntz-monotone", 1.0 - mono, 0.0, measured=bool(mono)))

    g = default_grid(cfg.grid_size)
    f = GridFunction.from_callable(g, lambda s: 1.0 + s, "1+s")
    worst = max(abs(cyclic_iterate_distance(-1.0, f, 1.0, 1.0, n) / (math.exp(-n) / math.sqrt(3)) - 1.0)
                for n in range(1, 11))
    out.append(ReportRecord.check("cyclic-closed-form", worst, cfg.tol("cyclic-closed-form", 1e-8), measured=worst))
    ns = [8, 16, 32, 64]
    ds = [log_cyclic_iterate_distance(-1.0, 1, f, 1.0, 1.0, n) for n in ns]
    slope = float(np.polyfit(np.log(ns), np.log([d.h_n_to_target for d in ds]), 1)[0])
    out.append(ReportRecord.check("log-cyclic-rate", abs(slope + 1.0), cfg.tol("log-cyclic-rate", 0.1),
                                  measured=slope, predicted=-1.0, m=1))
    dec = all(b.to_h_n <= a.to_h_n for a, b in zip(ds, ds[1:]))
    out.append(ReportRecord.check("log-cyclic-decrease", 0.0 if dec else 1.0, 0.0, measured=dec, m=1))

    for lam in (-1.0, -2 + 1j):
        for m in (1, 2):
            r = generalized_eigenspace_residual(lam, m, 0.7)
            out.append(ReportRecord.check("generalized-eigenspace-nilpotent", r,
                                          cfg.tol("generalized-eigenspace-nilpotent", 1e-8),
                                          measured=r, lam=complex(lam), m=m, t=0.7))
            grow = generalized_eigenspace_residual(lam, m, 0.7, power=m, relative=True)
            a = -(2 * complex(lam).real + 1)
            closed = (math.exp(m * complex(lam).real * 0.7) * math.factorial(m) * 0.7**m * a**m
                      / math.sqrt(math.factorial(2 * m)))
            out.append(ReportRecord.check("generalized-eigenspace-growth", abs(grow - closed) / closed,
                                          cfg.tol("generalized-eigenspace-growth", 1e-10),
                                          measured=grow, predicted=closed, lam=complex(lam), m=m, t=0.7))
    gc = default_grid(cfg.grid_size, breakpoints=(math.exp(-1.0),))
    for mu in (0.0, 0.3 * cmath.exp(1j * math.pi / 3), 0.7):
        w = caradus_witness(1.0, mu, grid=gc, seed=cfg.seed)
        expect = abs(mu) < math.exp(-0.5)
        out.append(ReportRecord.check("caradus-universal-flag", 0.0 if w.universal == expect else 1.0, 0.0,
                                      measured=w.universal, predicted=expect, mu=complex(mu)))
        if expect:
            out.append(ReportRecord.check("caradus-kernel", max(0, 10 - w.kernel_dim_witness), 0.0,
                                          measured=w.kernel_dim_witness, predicted=">=10", mu=complex(mu)))
            out.append(ReportRecord.check("caradus-surjective", w.surjectivity_residual,
                                          cfg.tol("caradus-surjective", 1e-8),
                                          measured=w.surjectivity_residual, mu=complex(mu)))
    spec = MonomialSpaceSpec((-1.0, -2 + 1j, -0.8 - 3j))
    r = monomial_invariance_residual(spec, 0.7, [1.0, 2j, -1.0], g)
    out.append(ReportRecord.check("monomial-span-invariant", r, cfg.tol("monomial-span-invariant", 1e-8), measured=r))
    return out


SUITES: dict[str, Callable[[RunConfig, np.random.Generator], list[ReportRecord]]] = {
    "norms": suite_norms,
    "semigroup": suite_semigroup,
    "resolvent": suite_resolvent,
    "cesaro": suite_cesaro,
    "discrete": suite_discrete,
    "spectra": suite_spectra,
    "invariant": suite_invariant,
}


def run_suite(suite: str, cfg: RunConfig) -> list[ReportRecord]:
    """Run one suite (or ``all``) with a single seeded generator."""
    rng = np.random.default_rng(cfg.seed)
    if suite == "all":
        records: list[ReportRecord] = []
        for name, fn in SUITES.items():
            records.extend(fn(cfg, rng))
        return records
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; expected one of {sorted(SUITES) + ['all']}")
    return SUITES[suite](cfg, rng)


def environment() -> dict[str, str]:
    return {
        "package": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def run_and_write(suite: str, cfg: RunConfig) -> tuple[list[ReportRecord], Path, Path]:
    records = run_suite(suite, cfg)
    header = {"command": "verify", "suite": suite, "config": cfg.header(), "environment": environment()}
    csv_path, json_path = write_report(records, cfg.output_dir, header)
    return records, csv_path, json_path
