"""Continuous-relaxed combinatorics.

Binomial coefficients with real arguments are evaluated through the
log-Gamma function, so that rate expressions stay defined for fractional
user counts and caching parameters.
"""
import math

import numpy as np
from scipy.special import gammaln

__all__ = [
    'log_gamma',
    'digamma',
    'binom',
    'binom_exact',
    'dbinom_dk',
]

BINOM_EXACT_MAX_N = 64

# Bernoulli-number coefficients B_2k / (2k) of the digamma asymptotic series.
_PSI_SERIES = (
    1.0 / 12,
    -1.0 / 120,
    1.0 / 252,
    -1.0 / 240,
    1.0 / 132,
    -691.0 / 32760,
    1.0 / 12,
)
_PSI_SHIFT = 6.0


def _as_output(value):
    value = np.asarray(value, dtype=float)
    return float(value) if value.ndim == 0 else value


def log_gamma(z):
    """Natural log of the Gamma function for positive real arguments.

    Parameters
    ----------
    z : float or array-like
        Argument(s), all strictly positive.

    Returns
    -------
    float or ndarray
        ln Gamma(z).

    Raises
    ------
    ValueError
        If any argument is not strictly positive.
    """
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0)):
        raise ValueError("log_gamma is only defined here for z > 0")
    return _as_output(gammaln(z))


def digamma(z):
    """Digamma function psi(z) = d/dz ln Gamma(z) for z > 0.

    The argument is shifted upward with psi(z) = psi(z + 1) - 1/z until it
    reaches 6, then the asymptotic series is summed.
    """
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0)):
        raise ValueError("digamma is only defined here for z > 0")
    w = np.array(z, dtype=float, copy=True, ndmin=1)
    acc = np.zeros_like(w)
    low = w < _PSI_SHIFT
    while np.any(low):
        acc[low] -= 1.0 / w[low]
        w[low] += 1.0
        low = w < _PSI_SHIFT
    inv2 = 1.0 / (w * w)
    series = np.zeros_like(w)
    for coef in reversed(_PSI_SERIES):
        series = (series + coef) * inv2
    out = acc + np.log(w) - 0.5 / w - series
    return _as_output(out.reshape(z.shape))


def _is_integral(value):
    return float(value).is_integer()


def binom(n, k):
    """Generalized binomial coefficient Gamma(n+1) / (Gamma(k+1) Gamma(n-k+1)).

    Returns 0 whenever ``k < 0`` or ``n - k <= -1``, where the Gamma
    function in the denominator has its poles; the poles are never
    evaluated. In between (``n < k < n + 1``) the Gamma expression is used,
    which falls continuously to 0 at ``k = n + 1``. At integer arguments
    this is 0 exactly when ``k > n``. Scalar integer arguments are computed
    exactly.

    Parameters
    ----------
    n, k : float or array-like
        Real arguments, broadcast against each other.

    Returns
    -------
    float or ndarray
        The relaxed coefficient, always non-negative.
    """
    if np.ndim(n) == 0 and np.ndim(k) == 0:
        n = float(n)
        k = float(k)
        if k < 0 or n - k <= -1:
            return 0.0
        if _is_integral(n) and _is_integral(k):
            return float(math.comb(int(n), int(k)))
        return math.exp(math.lgamma(n + 1) - math.lgamma(k + 1)
                        - math.lgamma(n - k + 1))
    n, k = np.broadcast_arrays(np.asarray(n, dtype=float),
                               np.asarray(k, dtype=float))
    valid = (k >= 0) & (n - k > -1)
    ns = np.where(valid, n, 1.0)
    ks = np.where(valid, k, 0.0)
    logc = gammaln(ns + 1) - gammaln(ks + 1) - gammaln(ns - ks + 1)
    return np.where(valid, np.exp(logc), 0.0)


def binom_exact(n, k):
    """Exact integer binomial coefficient C(n, k), 0 outside 0 <= k <= n.

    Raises
    ------
    OverflowError
        If ``n`` exceeds 64; larger values fall outside the range this
        exact oracle is meant for.
    """
    if int(n) != n or int(k) != k:
        raise ValueError("binom_exact needs integer arguments")
    n, k = int(n), int(k)
    if n < 0:
        raise ValueError("binom_exact needs n >= 0")
    if n > BINOM_EXACT_MAX_N:
        raise OverflowError(
            f"binom_exact limited to n <= {BINOM_EXACT_MAX_N}, got n={n}")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def dbinom_dk(n, k):
    """Partial derivative of the relaxed binomial with respect to ``k``.

    Uses d/dk C(n, k) = C(n, k) [psi(n - k + 1) - psi(k + 1)], valid for
    0 <= k <= n.
    """
    if not (0 <= k <= n):
        raise ValueError("derivative only defined for 0 <= k <= n")
    return binom(n, k) * (digamma(n - k + 1) - digamma(k + 1))
