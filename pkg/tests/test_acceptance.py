"""The fourteen acceptance criteria, each at its stated tolerance.

Every test prints one ``PASS``/``FAIL`` line (also repeated in the terminal
summary) and then asserts the criterion.
"""

from __future__ import annotations

import cmath
import math
import warnings

import numpy as np
import pytest

from cesaro_lab.cesaro import (
    apply_C_alpha,
    c1_nystrom_matrix,
    cesaro_norm_bound,
    eigen_multiplier,
    resolvent_Lambda0,
    resolvent_Lambda1,
    unboundedness_sweep,
)
from cesaro_lab.discrete import SequenceVector, intertwine_residual, matrix_C_alpha_disc
from cesaro_lab.funcspace import GridFunction, default_grid, lp_norm, monomial, random_smooth
from cesaro_lab.invariant import (
    caradus_witness,
    cyclic_iterate_distance,
    generalized_eigenspace_residual,
    log_cyclic_iterate_distance,
    muntz_criterion,
)
from cesaro_lab.koopman import DomainWarning, S_at, T_at, apply_A, apply_B, apply_S, apply_T
from cesaro_lab.koopman import ode_solution_A, ode_solution_B
from cesaro_lab.specfun import gamma, gamma_quotient, log_gamma
from cesaro_lab.spectra import eigenvalues, matrix_operator, operator_norm_estimate, predicted_spectrum, set_distance


@pytest.fixture
def verdict(record_property):
    def emit(number: int, name: str, ok: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {name} ({detail})"
        print(line)
        record_property("acceptance", line)
        assert ok, line

    return emit


def _rel(a: GridFunction, b: GridFunction) -> float:
    return lp_norm(a - b, 2) / lp_norm(b, 2)


def _interior(r: GridFunction, lo: float = 1e-3, hi: float = 1.0 - 1e-3) -> float:
    g = r.grid
    sel = (g.nodes >= lo) & (g.nodes <= hi)
    return float(np.sqrt(np.sum(g.weights[sel] * np.abs(r.values[sel]) ** 2)))


def _smooth(g):
    return GridFunction.from_callable(g, lambda s: np.cos(3.0 * s) + s**2, "cos(3s)+s^2", power=0.0)


def test_criterion_01_semigroup_norms(verdict):
    rng = np.random.default_rng(1)
    worst_S = worst_T = 0.0
    for t in (0.25, 1.0, 3.0):
        cut = math.exp(-t)
        g = default_grid(2048, breakpoints=(cut,))
        for _ in range(50):
            f = random_smooth(g, rng)
            worst_S = max(worst_S, abs(lp_norm(apply_S(t, f), 2) / lp_norm(f, 2) / math.exp(-t / 2) - 1))
        chi = GridFunction.from_callable(g, lambda s: (s < cut).astype(complex), "chi")
        worst_T = max(worst_T, abs(lp_norm(apply_T(t, chi), 2) / lp_norm(chi, 2) - math.exp(-t / 2)))
    verdict(1, "norm scaling of S(t) and T(t) witness", worst_S < 1e-6 and worst_T < 1e-6,
            f"S rel err {worst_S:.2e}, T witness err {worst_T:.2e}")


def test_criterion_02_semigroup_laws(verdict):
    g = default_grid(1024)
    s = g.nodes
    rng = np.random.default_rng(2)
    inputs = [_smooth(g)] + [random_smooth(g, rng) for _ in range(5)]
    worst = 0.0
    for f in inputs:
        for a, b in ((0.3, 0.7), (1.0, 2.5), (0.05, 4.0)):
            worst = max(worst, float(np.abs(T_at(a, apply_T(b, f), s) - T_at(a + b, f, s)).max()))
            worst = max(worst, float(np.abs(S_at(a, apply_S(b, f), s) - S_at(a + b, f, s)).max()))
    verdict(2, "T(s)T(t)=T(s+t), S(s)S(t)=S(s+t)", worst < 1e-12, f"max pointwise residual {worst:.2e}")


def test_criterion_03_eigen_identity(verdict):
    g = default_grid(4096)
    worst = 0.0
    for alpha in (1.0, 0.5, 1 + 1j):
        for lam in (-1.0, -2 + 3j):
            gl = monomial(lam, g)
            worst = max(worst, _rel(apply_C_alpha(alpha, gl), eigen_multiplier(alpha, lam) * gl))
    verdict(3, "C_alpha g_lambda = multiplier g_lambda", worst < 1e-6, f"max rel residual {worst:.2e}")


def test_criterion_04_c1_norm(verdict):
    g = default_grid(2048)
    apply, adjoint = matrix_operator(c1_nystrom_matrix(g), g)
    start = GridFunction.from_callable(g, lambda s: s**-0.48, "s^-0.48")
    bound = cesaro_norm_bound(1.0, 2.0)
    est = operator_norm_estimate(apply, 2.0, 1, grid=g, adjoint=adjoint, start=start, upper_bound=bound)
    probes = operator_norm_estimate(apply, 2.0, 200, grid=g, rng=np.random.default_rng(4))
    exact = (gamma(1.0) * gamma(0.5) / gamma(1.5)).real
    ok = 1.9 <= est.lower <= 2.001 and max(est.lower, probes.lower) <= exact + 1e-3 and abs(bound - 2) < 1e-12
    verdict(4, "norm of C_1 on L^2", ok,
            f"power iteration {est.lower:.6f}, best probe {probes.lower:.6f}, bound {exact:.15f}")


def test_criterion_05_resolvent_integrals(verdict):
    g = default_grid(4096)
    rng = np.random.default_rng(5)
    worst = 0.0
    for f in (_smooth(g), random_smooth(g, rng)):
        for lam in (0.5, 1.0):
            worst = max(worst, _rel(resolvent_Lambda0(lam, f), resolvent_Lambda0(lam, f, method="laplace")))
            worst = max(worst, _rel(resolvent_Lambda1(lam, f), resolvent_Lambda1(lam, f, method="laplace")))
    verdict(5, "resolvents against Laplace integrals", worst < 1e-6, f"max rel residual {worst:.2e}")


def test_criterion_06_ode_solutions(verdict):
    g = default_grid(4096)
    f = _smooth(g)
    worst = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DomainWarning)
        for lam, K in ((0.5, 0.7), (1.0, -0.3), (0.8 + 2j, 1j)):
            gA = ode_solution_A(lam, f, K)
            worst = max(worst, _interior(lam * gA - apply_A(gA) - f))
            hB = ode_solution_B(lam, f, K)
            worst = max(worst, _interior(lam * hB - apply_B(hB) - f))
    verdict(6, "(lambda-A)g = f and (lambda-B)h = f", worst < 1e-6, f"max interior L2 residual {worst:.2e}")


def test_criterion_07_unbounded_functional(verdict):
    recs = unboundedness_sweep(2.0, [1e2, 1e4, 1e6], tol=1e-4)
    ratio_recs = [r for r in recs if r.identity == "L-unbounded-ratio"]
    worst = max(r.residual for r in ratio_recs)
    increasing = recs[-1].identity == "L-unbounded-increasing" and recs[-1].passed
    verdict(7, "L^lambda ratio matches closed form and grows", worst < 1e-4 and increasing,
            f"max rel err {worst:.2e}, ratios {[round(float(r.measured), 6) for r in ratio_recs]}")


def test_criterion_08_discrete_spectra(verdict):
    worst = worst_set = 0.0
    for alpha in (1.0, 0.5, 2.0):
        eig = eigenvalues(matrix_C_alpha_disc(alpha, 64), "qr")
        ref = np.array([gamma(alpha + 1.0) * gamma_quotient(n + 1.0, n + alpha + 1.0) for n in range(64)])
        worst = max(worst, float(np.abs(np.sort_complex(eig.eigenvalues) - np.sort_complex(ref)).max()))
        region = predicted_spectrum("C_alpha", {"alpha": alpha}, 2.0)
        worst_set = max(worst_set, set_distance(eig, region).max_outside)
    verdict(8, "QR eigenvalues of discrete C_alpha", worst < 1e-8 and worst_set < 1e-8,
            f"max eigenvalue err {worst:.2e}, set distance {worst_set:.2e}")


def test_criterion_09_intertwining(verdict):
    N, t, alpha = 128, 0.5, 1.0
    g = default_grid(4096)
    f = _smooth(g)
    n = np.arange(N)
    a = SequenceVector(1.0 / (1.0 + n) ** 2 + 0.3j * np.exp(-n))
    res = {
        "S-V": intertwine_residual("S-V", t, f, N),
        "V*-T": intertwine_residual("V*-T", t, (a, g), N),
        "C*-V": intertwine_residual("C*-V", alpha, f, N),
        "V*-C": intertwine_residual("V*-C", alpha, (a, g), N),
    }
    verdict(9, "four intertwining relations", max(res.values()) < 1e-6,
            ", ".join(f"{k} {v:.2e}" for k, v in res.items()))


def test_criterion_10_muntz(verdict):
    conv = muntz_criterion(lambda n: -1.0 + 1j * n, 4096)
    div = muntz_criterion(lambda n: -0.5 - 1.0 / (n + 1), 4096)
    mono = bool(np.all(np.diff(conv.partial_sums) >= 0) and np.all(np.diff(div.partial_sums) >= 0))
    ok = (conv.verdict, conv.conclusion, div.verdict, div.conclusion) == (
        "convergent", "nontrivial-subspace", "divergent", "dense") and mono
    verdict(10, "Muntz verdicts", ok,
            f"-1+in {conv.verdict}/{conv.conclusion}, -1/2-1/n {div.verdict}/{div.conclusion}, monotone {mono}")


def test_criterion_11_cyclic_iterates(verdict):
    g = default_grid(4096)
    f = GridFunction.from_callable(g, lambda s: 1.0 + s, "1+s")
    worst = max(abs(cyclic_iterate_distance(-1.0, f, 1.0, 1.0, n) / (math.exp(-n) / math.sqrt(3)) - 1)
                for n in range(1, 13))
    ns = np.arange(8, 65)
    ds = [log_cyclic_iterate_distance(-1.0, 1, f, 1.0, 1.0, int(n)) for n in ns]
    first = np.array([d.to_h_n for d in ds])
    second = np.array([d.h_n_to_target for d in ds])
    slope = float(np.polyfit(np.log(ns), np.log(second), 1)[0])
    dec = bool(np.all(np.diff(first) <= 0) and np.all(np.diff(second) < 0))
    ok = worst < 1e-8 and dec and abs(slope + 1) <= 0.1
    verdict(11, "cyclic-iterate distances", ok,
            f"closed-form rel err {worst:.2e}, both decreasing {dec}, log-log slope {slope:.4f}")


def test_criterion_12_generalized_eigenspaces(verdict):
    nil = {}
    grow = {}
    for lam in (-1.0, -2 + 1j):
        for m in (1, 2):
            nil[(lam, m)] = generalized_eigenspace_residual(lam, m, 0.7)
            grow[(lam, m)] = generalized_eigenspace_residual(lam, m, 0.7, power=m, relative=True)
    ok = max(nil.values()) < 1e-8 and min(grow.values()) > 0.1
    detail = f"max nilpotency residual {max(nil.values()):.2e}; relative at power m: " + ", ".join(
        f"lambda={complex(k[0])} m={k[1]}: {v:.4f}" for k, v in grow.items())
    verdict(12, "generalized eigenspaces", ok, detail)


def test_criterion_13_caradus(verdict, grid_cut):
    kernel_ok = surj_ok = True
    details = []
    for mu in (0.0, 0.3 * cmath.exp(1j * math.pi / 3)):
        w = caradus_witness(1.0, mu, grid=grid_cut)
        good = int(np.sum(w.kernel_residuals < 1e-10))
        kernel_ok &= w.kernel_dim_witness >= 10 and good >= 10
        surj_ok &= w.surjectivity_residual < 1e-8 and w.universal
        details.append(f"mu={mu:.3g}: kernel {w.kernel_dim_witness}, surj {w.surjectivity_residual:.2e}")
    flags = {mu: caradus_witness(1.0, mu, grid=grid_cut, probes=1).universal
             for mu in (0.0, 0.3, 0.6, 0.61, 0.7, 0.9j)}
    flag_ok = all(v == (abs(mu) < math.exp(-0.5)) for mu, v in flags.items())
    verdict(13, "Caradus witnesses for mu - T(1)", kernel_ok and surj_ok and flag_ok,
            "; ".join(details) + f"; universal flags correct {flag_ok}")


def test_criterion_14_special_functions(verdict):
    rng = np.random.default_rng(14)
    z = rng.uniform(-20, 20, 1000) + 1j * rng.uniform(-20, 20, 1000)
    rec = refl = 0.0
    for zi in z:
        zi = complex(zi)
        rec = max(rec, abs(cmath.exp(log_gamma(zi + 1) - log_gamma(zi) - cmath.log(zi)) - 1))
        refl = max(refl, abs(cmath.exp(log_gamma(zi) + log_gamma(1 - zi) + cmath.log(cmath.sin(math.pi * zi))
                                       - math.log(math.pi)) - 1))
    asym = 0.0
    for alpha in (0.7, 2.0, 1 + 1j, 0.3):
        for theta in (0.0, math.pi / 4, math.pi / 2, -math.pi / 3):
            zz = 50 * cmath.exp(1j * theta)
            exact = cmath.exp(log_gamma(zz + alpha) - log_gamma(zz))
            approx = zz**alpha * (1 + alpha * (alpha - 1) / (2 * zz))
            asym = max(asym, abs(approx / exact - 1))
    verdict(14, "Gamma recurrence, reflection, asymptotics", rec < 1e-12 and refl < 1e-12 and asym < 1e-3,
            f"recurrence {rec:.2e}, reflection {refl:.2e}, asymptotic {asym:.2e}")
