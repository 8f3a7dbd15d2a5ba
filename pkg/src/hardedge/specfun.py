"""Special functions: Bessel J/I/K, log-Gamma, log Barnes G and exact helpers.

Bessel functions are evaluated through scipy.special (AMOS), with the order
range and argument domains checked here.  Complex powers and roots follow the
principal branch, arg in (-pi, pi].
"""
from __future__ import annotations

import math
import sys
from fractions import Fraction

import numpy as np
from scipy import special as sc

MAX_ORDER = 50.0
EULER_GAMMA = 0.57721566490153286060651209008240243
LOG_2PI = math.log(2.0 * math.pi)


class PoleError(ArithmeticError):
    """Raised when a function is evaluated at one of its poles."""


def _check_order(alpha):
    a = float(alpha)
    if not math.isfinite(a):
        raise ValueError(f"order must be finite, got {alpha!r}")
    if abs(a) > MAX_ORDER:
        raise ValueError(f"|order| > {MAX_ORDER:g} is not supported (got {a:g})")
    # scipy's kv returns nan for subnormal orders at real z; the functions are
    # smooth in the order, so flushing to 0 changes nothing at double precision
    if abs(a) < sys.float_info.min:
        return 0.0
    return a


def _finite_or_raise(val, name):
    arr = np.asarray(val)
    if not np.all(np.isfinite(arr)):
        raise OverflowError(f"{name}: result not representable in double precision")
    return val


def _scalarize(val):
    arr = np.asarray(val)
    return arr.item() if arr.ndim == 0 else arr


def bessel_j(alpha, x):
    """J_alpha(x) for real x >= 0 (array input accepted)."""
    a = _check_order(alpha)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("bessel_j: x must be >= 0")
    return _scalarize(sc.jv(a, x))


def bessel_j_prime(alpha, x):
    """d/dx J_alpha(x), via (J_{a-1} - J_{a+1})/2."""
    a = _check_order(alpha)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("bessel_j_prime: x must be >= 0")
    return _scalarize(0.5 * (sc.jv(a - 1.0, x) - sc.jv(a + 1.0, x)))


def bessel_i(alpha, z):
    """I_alpha(z), principal branch of z^alpha; z on the negative axis takes arg = +pi
    unless the imaginary part is a negative zero."""
    a = _check_order(alpha)
    z = np.asarray(z, dtype=complex)
    return _scalarize(_finite_or_raise(sc.iv(a, z), "bessel_i"))


def bessel_i_prime(alpha, z):
    a = _check_order(alpha)
    z = np.asarray(z, dtype=complex)
    val = 0.5 * (sc.iv(a - 1.0, z) + sc.iv(a + 1.0, z))
    return _scalarize(_finite_or_raise(val, "bessel_i_prime"))


def bessel_k(alpha, z):
    """K_alpha(z), principal branch; raises PoleError at z = 0."""
    a = _check_order(alpha)
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise PoleError("bessel_k: pole at z = 0")
    return _scalarize(_finite_or_raise(sc.kv(a, z), "bessel_k"))


def bessel_k_prime(alpha, z):
    a = _check_order(alpha)
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise PoleError("bessel_k_prime: pole at z = 0")
    val = -0.5 * (sc.kv(a - 1.0, z) + sc.kv(a + 1.0, z))
    return _scalarize(_finite_or_raise(val, "bessel_k_prime"))


def log_gamma(x):
    """ln Gamma(x) for x > 0."""
    x = float(x)
    if x <= 0:
        raise PoleError(f"log_gamma: x must be > 0, got {x}")
    return float(sc.gammaln(x))


def log_barnes_g(x):
    """ln G(x) for real x > 0.

    Uses the Weierstrass-type product for G(1+z), z = x - 1.  The first N
    terms of the series are summed directly and the remainder is expanded in
    powers of z/n, which turns it into a rapidly converging series of Hurwitz
    zeta values.
    """
    x = float(x)
    if not x > 0:
        raise PoleError(f"log_barnes_g: x must be > 0, got {x}")
    z = x - 1.0
    if z == 0.0:
        return 0.0
    head = 0.5 * z * LOG_2PI - 0.5 * z * (z + 1.0) - 0.5 * EULER_GAMMA * z * z
    n_direct = max(50, int(math.ceil(4.0 * abs(z))))
    n = np.arange(1, n_direct + 1, dtype=float)
    body = np.sum(z * z / (2.0 * n) - z + n * np.log1p(z / n))
    # sum_{n>N} [z^2/(2n) - z + n ln(1+z/n)] = sum_{j>=3} (-1)^{j+1} z^j/j * zeta(j-1, N+1)
    tail = 0.0
    zj = z * z
    for j in range(3, 603):
        zj *= z
        term = (-1) ** (j + 1) * zj / j * sc.zeta(j - 1, n_direct + 1)
        tail += term
        if abs(term) < 1e-17 * max(abs(tail), 1e-300) or term == 0.0:
            break
    return float(head + body + tail)


def binom_half(m):
    """Exact binomial coefficient binom(1/2, m) as a Fraction."""
    m = int(m)
    if m < 0:
        raise ValueError("binom_half: m must be >= 0")
    out = Fraction(1)
    half = Fraction(1, 2)
    for j in range(1, m + 1):
        out = out * (half - j + 1) / j
    return out


def double_factorial(n):
    """n!! for odd n >= -1, with (-1)!! = 1."""
    n = int(n)
    if n < -1 or n % 2 == 0:
        raise ValueError(f"double_factorial: need odd n >= -1, got {n}")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out
