r"""Real special functions behind the closed-form moments.

The Macdonald functions are exposed only in exponentially scaled form,
:math:`e^{x} K_\nu(x)`, because the Bessel arguments met in practice
(:math:`2(\sigma/\lambda_c)^2` and multiples) easily exceed the range where
:math:`K_\nu` itself is representable.  All ratios of Bessel functions used by
the state modules are ratios of scaled values, so the exponentials cancel.

Three regimes are used for :math:`K_0, K_1`:

* ``x < 2``: the ascending series (logarithmic terms plus digamma sums),
* ``2 <= x <= 20``: Steed's continued fraction for :math:`K_1/K_0`
  together with Temme's normalisation sum,
* ``x > 20``: the Hankel asymptotic expansion.

Higher integer orders follow from the upward recurrence, which is stable for
:math:`K_\nu`.
"""

from __future__ import annotations

import math
import operator

import numpy as np

from .errors import ConvergenceError, DomainError
from .quad import QuadratureConfig, QuadratureError, integrate_half_line

__all__ = [
    "bessel_k_scaled",
    "confluent_u",
    "erf",
    "pochhammer",
    "log_pochhammer",
]

EULER_GAMMA = 0.57721566490153286061

_SERIES_TERMS = 30
_CF_MAXIT = 10000
_EPS = 1e-16


def _k01_series(x):
    """K0, K1 from the ascending series, valid (and accurate) for x < 2."""
    t = 0.25 * x * x
    log_half = np.log(0.5 * x)
    term = np.ones_like(x)          # t^k / (k!)^2
    term1 = np.ones_like(x)         # t^k / (k! (k+1)!)
    harmonic = 0.0                  # H_k
    i0 = np.zeros_like(x)
    s0 = np.zeros_like(x)
    i1 = np.zeros_like(x)
    s1 = np.zeros_like(x)
    for k in range(_SERIES_TERMS):
        if k > 0:
            term = term * t / (k * k)
            term1 = term1 * t / (k * (k + 1))
            harmonic += 1.0 / k
        i0 += term
        s0 += term * harmonic
        i1 += term1
        # psi(k+1) + psi(k+2) = 2 H_k + 1/(k+1) - 2 gamma
        s1 += term1 * (2.0 * harmonic + 1.0 / (k + 1) - 2.0 * EULER_GAMMA)
    k0 = -(log_half + EULER_GAMMA) * i0 + s0
    k1 = 1.0 / x + log_half * (0.5 * x * i1) - 0.25 * x * s1
    return k0, k1


def _k01_steed(x):
    """Scaled K0, K1 for moderate x via Steed's CF2 (order mu = 0)."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25
    q = np.full_like(x, a1)
    c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _CF_MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        if np.all(np.abs(dels / s) < _EPS):
            break
    else:
        raise ConvergenceError("continued fraction for K0/K1 did not converge")
    h = a1 * h
    k0 = np.sqrt(np.pi / (2.0 * x)) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def _k_asymptotic(nu, x):
    """Scaled K_nu from the Hankel expansion; accurate for x > 20."""
    mu = 4.0 * nu * nu
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 60):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        total = total + term
        if np.all(np.abs(term) < _EPS * np.abs(total)):
            break
    return np.sqrt(np.pi / (2.0 * x)) * total


def _k01_scaled(x):
    k0 = np.empty_like(x)
    k1 = np.empty_like(x)
    small = x < 2.0
    large = x > 20.0
    mid = ~(small | large)
    if small.any():
        xs = x[small]
        a, b = _k01_series(xs)
        scale = np.exp(xs)
        k0[small], k1[small] = a * scale, b * scale
    if mid.any():
        k0[mid], k1[mid] = _k01_steed(x[mid])
    if large.any():
        k0[large] = _k_asymptotic(0, x[large])
        k1[large] = _k_asymptotic(1, x[large])
    return k0, k1


def bessel_k_scaled(nu, x):
    r"""Exponentially scaled Macdonald function :math:`e^{x} K_\nu(x)`.

    Parameters
    ----------
    nu : int
        Non-negative integer order.
    x : float or array_like
        Positive, finite argument(s).

    Returns
    -------
    float or ndarray
        Same shape as ``x``.
    """
    try:
        nu = operator.index(nu)
    except TypeError:
        raise DomainError(f"order must be an integer, got {nu!r}") from None
    if nu < 0:
        raise DomainError(f"order must be non-negative, got {nu}")
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)) or np.any(xa <= 0):
        raise DomainError("bessel_k_scaled requires finite x > 0")
    flat = np.atleast_1d(xa).ravel()
    k_prev, k_cur = _k01_scaled(flat)
    if nu == 0:
        out = k_prev
    else:
        for n in range(1, nu):
            k_prev, k_cur = k_cur, k_prev + (2.0 * n / flat) * k_cur
        out = k_cur
    out = out.reshape(xa.shape)
    return float(out) if out.ndim == 0 else out


def erf(x):
    """Error function; exactly odd, accurate to a few ulp (C library ``erf``)."""
    xa = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xa)):
        raise DomainError("erf requires finite arguments")
    out = np.vectorize(lambda v: math.copysign(math.erf(abs(v)), v), otypes=[float])(xa)
    return float(out) if out.ndim == 0 else out


def log_pochhammer(alpha: float, n: int) -> tuple[float, float]:
    """Sign and log-magnitude of the rising factorial ``(alpha)_n``.

    Returns ``(0.0, -inf)`` when a factor vanishes.
    """
    n = operator.index(n)
    if n < 0:
        raise DomainError("Pochhammer index must be non-negative")
    sign = 1.0
    logs = []
    for k in range(n):
        f = alpha + k
        if f == 0:
            return 0.0, -math.inf
        if f < 0:
            sign = -sign
        logs.append(math.log(abs(f)))
    return sign, math.fsum(logs)


def pochhammer(alpha: float, n: int) -> float:
    """Rising factorial ``alpha (alpha+1) ... (alpha+n-1)``, with ``(alpha)_0 = 1``.

    Small products are formed directly; once the running magnitude leaves
    [1e-250, 1e250] the computation moves to the log domain.  Raises
    ``OverflowError`` only if the final value is not representable.
    """
    n = operator.index(n)
    if n < 0:
        raise DomainError("Pochhammer index must be non-negative")
    value = 1.0
    for k in range(n):
        value *= alpha + k
        if value == 0.0 or not 1e-250 < abs(value) < 1e250:
            break
    else:
        return value
    if value == 0.0:
        return 0.0
    sign, logabs = log_pochhammer(alpha, n)
    if logabs > math.log(np.finfo(float).max):
        raise OverflowError(f"({alpha})_{n} overflows; use log_pochhammer")
    return sign * math.exp(logabs)


_U_CFG = QuadratureConfig(rel_tol=1e-13, abs_tol=1e-300)


def _gamma_expectation(alpha, g):
    r"""E[g(S)] for S ~ Gamma(alpha, 1), by quadrature.

    For ``alpha >= 1`` the density is integrated directly around its mode;
    for ``alpha < 1`` the substitution :math:`s = t^{1/\alpha}` removes the
    endpoint singularity.
    """
    if alpha >= 1.0:
        lg = math.lgamma(alpha)

        def integrand(s):
            with np.errstate(divide="ignore", invalid="ignore"):
                logd = (alpha - 1.0) * np.log(s) - s - lg
            return np.where(s > 0, np.exp(logd), 1.0 if alpha == 1.0 else 0.0) * g(s)

        width = math.sqrt(alpha)
        res = integrate_half_line(integrand, 0.0, _U_CFG, center=alpha - 1.0, width=width)
    else:
        inv = 1.0 / alpha
        norm = math.gamma(alpha + 1.0)

        def integrand(t):
            s = t ** inv
            return np.exp(-s) * g(s) / norm

        res = integrate_half_line(integrand, 0.0, _U_CFG, width=1.0)
    return res.value, res.error_estimate


def _u_positive(a, b, z):
    """U(a, b, z) for a > 0 from the Laplace-type integral."""
    expo = b - a - 1.0
    val, err = _gamma_expectation(a, lambda s: (1.0 + s / z) ** expo)
    return z ** (-a) * val, z ** (-a) * err


def _u_core(a, b, z):
    if a == 0:
        return 1.0, 0.0
    if a < 0 and a == int(a):
        m = int(-a)
        # terminating case: (-1)^m sum_s C(m,s) (b+s)_{m-s} (-z)^s
        terms = [math.comb(m, s) * pochhammer(b + s, m - s) * (-z) ** s for s in range(m + 1)]
        return (-1) ** m * math.fsum(terms), 0.0
    if a > 0:
        return _u_positive(a, b, z)
    if a - b + 1.0 > 0:
        # Kummer transformation U(a,b,z) = z^(1-b) U(a-b+1, 2-b, z), with the
        # power folded into the integral to stay in range for large |b|.
        alpha = a - b + 1.0
        val, err = _gamma_expectation(alpha, lambda s: (1.0 + s / z) ** (-a))
        return z ** (-a) * val, z ** (-a) * err
    # a < 0 non-integer and a - b + 1 <= 0: step down in a from a positive
    # pair; the recurrence is run in the direction where U is dominant.
    m = math.ceil(-a) + 1
    a_top = a + m
    u_next, e1 = _u_core(a_top + 1.0, b, z)
    u_cur, e2 = _u_core(a_top, b, z)
    err = max(e1 / abs(u_next) if u_next else 0.0, e2 / abs(u_cur) if u_cur else 0.0)
    ak = a_top
    while ak > a + 0.5:
        # U(a-1) = -(b - 2a - z) U(a) - a (a - b + 1) U(a+1)
        u_prev = -(b - 2.0 * ak - z) * u_cur - ak * (ak - b + 1.0) * u_next
        u_next, u_cur = u_cur, u_prev
        ak -= 1.0
    return u_cur, err * abs(u_cur)


def confluent_u(a: float, b: float, z: float) -> float:
    """Tricomi confluent hypergeometric function U(a, b, z) for real a, b and z > 0.

    Raises
    ------
    DomainError
        If ``z`` is not a positive finite number.
    ConvergenceError
        If the underlying quadrature misses its tolerance; ``residual``
        carries the achieved error estimate.
    """
    if not (math.isfinite(z) and z > 0):
        raise DomainError(f"confluent_u requires z > 0, got {z!r}")
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("confluent_u requires finite parameters")
    try:
        value, err = _u_core(float(a), float(b), float(z))
    except QuadratureError as exc:
        raise ConvergenceError(
            f"U({a}, {b}, {z}) did not converge", value=exc.value, residual=exc.residual
        ) from exc
    if value != 0 and err > 1e-9 * abs(value):
        raise ConvergenceError(
            f"U({a}, {b}, {z}) error estimate {err:.3g} exceeds tolerance",
            value=value,
            residual=err,
        )
    return value
