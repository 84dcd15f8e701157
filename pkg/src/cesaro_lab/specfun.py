"""Complex log-Gamma, Gamma quotients and Cesàro numbers.

``log_gamma`` uses a Lanczos approximation (g = 7, nine coefficients) for
``Re z >= 1/2`` and the reflection formula below that line.  The returned
value is the analytic continuation of ``log Γ`` with its branch cut on the
negative real axis, i.e. the same branch as ``mpmath.loggamma``.
"""

from __future__ import annotations

import cmath
import functools
import math

import numpy as np
from scipy.special import bernoulli, comb

__all__ = [
    "PoleError",
    "log_gamma",
    "gamma",
    "gamma_quotient",
    "log_gamma_ratio",
    "cesaro_number",
    "cesaro_numbers",
    "POLE_TOL",
]

POLE_TOL = 1e-12

_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_PI = math.log(math.pi)


class PoleError(ValueError):
    """Raised when an argument sits on a pole of Γ (a nonpositive integer)."""


def _check_pole(z: complex) -> None:
    if z.real <= 0.5 and abs(z.imag) <= POLE_TOL:
        n = round(z.real)
        if n <= 0 and abs(z.real - n) <= POLE_TOL:
            raise PoleError(f"Gamma has a pole at z = {z!r}")


def _lanczos(z: complex) -> complex:
    z = z - 1.0
    acc = _LANCZOS_COEF[0]
    for k in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(acc)


def _sin_pi(z: complex) -> complex:
    # reduce Re z mod 2 exactly before multiplying by pi
    x = z.real - 2.0 * round(z.real / 2.0)
    return cmath.sin(math.pi * complex(x, z.imag))


def log_gamma(z: complex) -> complex:
    """Principal-branch ``log Γ(z)`` for complex ``z``.

    Raises :class:`PoleError` within ``POLE_TOL`` of ``0, -1, -2, ...``.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite argument {z!r}")
    _check_pole(z)
    if z.real >= 0.5:
        return _lanczos(z)

    value = _LOG_PI - cmath.log(_sin_pi(z)) - _lanczos(1.0 - z)
    # The reflection formula is only correct modulo 2*pi*i.  Pick the branch
    # from the upward recurrence, which is continuous off the negative axis.
    n = math.ceil(0.5 - z.real)
    approx = _lanczos(z + n)
    for k in range(n):
        approx -= cmath.log(z + k)
    turns = round((approx.imag - value.imag) / (2.0 * math.pi))
    return complex(value.real, value.imag + 2.0 * math.pi * turns)


def gamma(z: complex) -> complex:
    """Γ(z) as ``exp(log_gamma(z))``."""
    return cmath.exp(log_gamma(z))


def gamma_quotient(a: complex, b: complex) -> complex:
    """Γ(a)/Γ(b) evaluated through log-Gamma differences (no overflow)."""
    return cmath.exp(log_gamma(a) - log_gamma(b))


_RATIO_SWITCH = 30.0
_RATIO_TERMS = 24


@functools.lru_cache(maxsize=None)
def _bernoulli_table(n: int) -> tuple[tuple[float, ...], ...]:
    """Rows ``C(n,k) B_k`` for ``n <= n_max``."""
    b = bernoulli(n)
    return tuple(tuple(comb(m, k, exact=True) * b[k] for k in range(m + 1)) for m in range(n + 1))


def _bernoulli_poly(n: int, x: complex) -> complex:
    row = _bernoulli_table(_RATIO_TERMS + 2)[n]
    return sum(c * x ** (n - k) for k, c in enumerate(row))


def log_gamma_ratio(z: complex, a: complex, b: complex) -> complex:
    """``log Γ(z+a) - log Γ(z+b)`` without cancellation for large ``|z|``.

    For ``|z| >= 30`` off the negative axis and ``|a|, |b| <= |z|/4`` the
    asymptotic series
    ``(a-b) log z + Σ_n (-1)^n (B_n(a) - B_n(b)) / (n (n-1) z^(n-1))``
    (Bernoulli polynomials ``B_n``) is summed until terms stop shrinking;
    otherwise the log-Gamma values are subtracted directly.
    """
    z, a, b = complex(z), complex(a), complex(b)
    if (
        abs(z) < _RATIO_SWITCH
        or (z.real < 0 and abs(z.imag) < _RATIO_SWITCH)
        or max(abs(a), abs(b)) > 0.25 * abs(z)
    ):
        return log_gamma(z + a) - log_gamma(z + b)
    acc = (a - b) * cmath.log(z)
    mags: list[float] = []
    zi = 1.0 / z
    zp = zi
    for n in range(2, _RATIO_TERMS + 2):
        term = (-1) ** n * (_bernoulli_poly(n, a) - _bernoulli_poly(n, b)) / (n * (n - 1)) * zp
        zp *= zi
        m = abs(term)
        # odd terms can vanish (e.g. a, b = 1/2, 1), so judge size by pairs
        if len(mags) >= 2 and m > max(mags[-1], mags[-2]):
            break
        acc += term
        mags.append(m)
        if len(mags) >= 2 and max(mags[-1], mags[-2]) < 1e-18 * max(abs(acc), 1e-300):
            break
    return acc


def cesaro_number(alpha: complex, n: int) -> complex:
    """Cesàro number ``k^α(n) = Γ(n+α) / (Γ(α) Γ(n+1))``.

    Computed by the product recurrence ``k(n) = k(n-1) (n-1+α)/n``.
    """
    alpha = complex(alpha)
    if alpha.real <= 0:
        raise ValueError(f"Cesàro numbers need Re alpha > 0, got {alpha!r}")
    if n < 0:
        raise ValueError("n must be nonnegative")
    k = 1.0 + 0j
    for m in range(1, n + 1):
        k *= (m - 1 + alpha) / m
    return k


def cesaro_numbers(alpha: complex, count: int) -> np.ndarray:
    """Vector ``[k^α(0), ..., k^α(count-1)]`` by the same recurrence."""
    alpha = complex(alpha)
    if alpha.real <= 0:
        raise ValueError(f"Cesàro numbers need Re alpha > 0, got {alpha!r}")
    if count <= 0:
        return np.zeros(0, dtype=complex)
    m = np.arange(1, count, dtype=float)
    ratios = np.concatenate(([1.0 + 0j], (m - 1 + alpha) / m))
    return np.cumprod(ratios)
