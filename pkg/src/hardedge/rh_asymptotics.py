"""Steepest-descent building blocks for the hard-edge gap problem.

g-functions and their coefficients, the outer and Bessel parametrices, the
local f and h functions near the origin, and the closed-form large-s
evaluators.  Branches are principal (arg in (-pi, pi]) unless stated.
Boundary values on contours are taken by approaching at a small normal
distance and removing the linear term by Richardson extrapolation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import special as sc

from .painleve import tau_alpha
from .specfun import PoleError, binom_half, bessel_i, bessel_i_prime, bessel_k, bessel_k_prime

I2 = np.eye(2, dtype=complex)
SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
DISC_RADIUS = 0.25
BV_EPS = 1e-8


class CutError(ValueError):
    """Evaluation point lies on a branch cut (or the sector tag disagrees with arg z)."""


def _diag_pow(x, p):
    """x^{p sigma_3} for complex x (principal branch)."""
    v = complex(x) ** p
    return np.array([[v, 0], [0, 1.0 / v]], dtype=complex)


def _on_real_ray(z, lo=-math.inf, hi=math.inf):
    z = complex(z)
    return z.imag == 0.0 and lo <= z.real <= hi


# --- g-function coefficients ------------------------------------------------------------


def solve_cj(k):
    """Exact c_1..c_k: c_k = 1 and sum_{j=0}^m binom(1/2, m-j) c_{k-j} = 0, m = 1..k-1."""
    k = int(k)
    if k < 1:
        raise ValueError("solve_cj: k >= 1")
    c = {k: Fraction(1)}
    for m in range(1, k):
        # binom(1/2, 0) = 1 multiplies the unknown c_{k-m}
        c[k - m] = -sum(binom_half(m - j) * c[k - j] for j in range(m))
    return [c[j] for j in range(1, k + 1)]


def cj_plugback(k, c=None):
    """Exact residuals of the m = 1..k-1 equations (all Fraction(0) for the solution)."""
    c = list(c) if c is not None else solve_cj(k)
    cc = {j + 1: v for j, v in enumerate(c)}
    return [sum(binom_half(m - j) * cc[k - j] for j in range(m + 1)) for m in range(1, k)]


@dataclass(frozen=True)
class EtaConstants:
    k: int
    eta0: Fraction
    eta1: Fraction
    g1: float
    g1hat: float


def eta_constants(k, lam=None, s=None):
    """eta_0, eta_1 exactly; g_1 and hat g_1 when lambda and s are given."""
    c = solve_cj(k)
    eta0 = sum((-1) ** (k + j) * c[j - 1] for j in range(1, k + 1))
    eta1 = sum((-1) ** (k + j) * j * c[j - 1] for j in range(1, k + 1))
    g1 = g1hat = math.nan
    if lam is not None and s is not None:
        sign = (-1) ** (k + 1)
        g1 = 0.5 + sign * lam ** k / s ** (k + 0.5) * float(c[0])
        g1hat = 0.5 * lam + sign / s ** (k + 0.5) * float(c[0])
    return EtaConstants(int(k), Fraction(eta0), Fraction(eta1), g1, g1hat)


@dataclass(frozen=True)
class GFunSpec:
    k: int
    lam: float
    s: float
    variant: str = "g"
    c: tuple = field(default=None)

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("GFunSpec: k must be a positive integer")
        if not self.lam > 0 or not self.s > 0:
            raise ValueError("GFunSpec: need lambda > 0 and s > 0")
        if self.variant not in ("g", "ghat"):
            raise ValueError("GFunSpec: variant is 'g' or 'ghat'")
        c = tuple(solve_cj(self.k))
        if self.c is not None and tuple(Fraction(x) for x in self.c) != c:
            raise ValueError("GFunSpec: c does not solve the coefficient system")
        object.__setattr__(self, "c", c)

    @property
    def kappa(self):
        """lambda^k eta_0 / s^{k+1/2}."""
        return self.lam ** self.k * float(eta_constants(self.k).eta0) / self.s ** (self.k + 0.5)

    def g1(self):
        e = eta_constants(self.k, self.lam, self.s)
        return e.g1 if self.variant == "g" else e.g1hat


def g_eval(spec, z):
    """g(z) or hat g(z), analytic off (-inf, -1]; pole at z = 0."""
    z = complex(z)
    if _on_real_ray(z, hi=-1.0):
        raise CutError(f"g: z = {z} lies on the cut (-inf, -1]")
    if z == 0:
        raise PoleError("g: pole at z = 0")
    k = spec.k
    tail = sum(float(cj) / z ** j for j, cj in enumerate(spec.c, start=1))
    sign = (-1) ** (k + 1)
    if spec.variant == "g":
        inner = 1.0 + sign * spec.lam ** k / spec.s ** (k + 0.5) * tail
    else:
        inner = spec.lam + sign / spec.s ** (k + 0.5) * tail
    return np.sqrt(z + 1.0) * inner


def rho(z, alpha):
    """((1 - sqrt(z+1)) / (1 + sqrt(z+1)))^{alpha/2}, off (-inf, -1] and [0, inf)."""
    z = complex(z)
    if _on_real_ray(z, hi=-1.0) or _on_real_ray(z, lo=0.0):
        raise CutError(f"rho: z = {z} lies on a cut")
    w = np.sqrt(z + 1.0)
    return ((1.0 - w) / (1.0 + w)) ** (alpha / 2.0)


def rho_series(z, alpha):
    """Three-term expansion 1 - alpha w + alpha^2 w^2 / 2 at z = -1, w = sqrt(z+1)."""
    w = np.sqrt(complex(z) + 1.0)
    return 1.0 - alpha * w + 0.5 * alpha * alpha * w * w


# --- parametrices ---------------------------------------------------------------------------


def outer_N(z, alpha):
    """[[1,0],[i alpha,1]] (z+1)^{-sigma_3/4} (I + i sigma_1)/sqrt 2 ((w+1)/(w-1))^{-alpha sigma_3/2}."""
    z = complex(z)
    if _on_real_ray(z, hi=0.0):
        raise CutError(f"N: z = {z} lies on (-inf, 0]")
    w = np.sqrt(z + 1.0)
    left = np.array([[1, 0], [1j * alpha, 1]], dtype=complex)
    q = ((w + 1.0) / (w - 1.0)) ** (-alpha / 2.0)
    last = np.array([[q, 0], [0, 1.0 / q]], dtype=complex)
    return left @ _diag_pow(z + 1.0, -0.25) @ ((I2 + 1j * SIGMA_1) / math.sqrt(2.0)) @ last


SECTORS = ("Omega1", "Omega2", "Omega3", "upper", "lower")


def sector_of(z):
    a = np.angle(complex(z))
    if abs(a) < 2 * math.pi / 3:
        return "Omega1"
    return "Omega2" if a > 0 else "Omega3"


@dataclass(frozen=True)
class SectorPoint:
    z: complex
    sector: str = None

    def __post_init__(self):
        z = complex(self.z)
        object.__setattr__(self, "z", z)
        if self.sector is None:
            if z == 0:
                raise PoleError("SectorPoint: z = 0")
            object.__setattr__(self, "sector", sector_of(z))
            return
        if self.sector not in SECTORS:
            raise ValueError(f"unknown sector {self.sector!r}")
        if self.sector in ("upper", "lower"):
            if (z.imag > 0) != (self.sector == "upper") or z.imag == 0:
                raise CutError(f"{z} is not in the {self.sector} half-plane")
        elif sector_of(z) != self.sector:
            raise CutError(f"{z} (arg {np.angle(z):.6g}) is not in {self.sector}")


def _bessel_core(zeta, alpha):
    r = np.sqrt(complex(zeta))
    x = 2.0 * r
    return np.array([
        [bessel_i(alpha, x), 1j / math.pi * bessel_k(alpha, x)],
        [2j * math.pi * r * bessel_i_prime(alpha, x), -2.0 * r * bessel_k_prime(alpha, x)],
    ], dtype=complex)


def bessel_parametrix(p, alpha):
    """Phi_Bes(zeta) in the sector of p (Omega1: |arg| < 2pi/3; Omega2/Omega3 beyond)."""
    if not isinstance(p, SectorPoint):
        p = SectorPoint(p)
    if p.sector not in ("Omega1", "Omega2", "Omega3"):
        raise CutError("bessel_parametrix needs an Omega sector tag")
    if p.z == 0:
        raise PoleError("bessel_parametrix: zeta = 0")
    core = _bessel_core(p.z, alpha)
    e = np.exp(1j * math.pi * alpha)
    if p.sector == "Omega2":
        return core @ np.array([[1, 0], [-e, 1]], dtype=complex)
    if p.sector == "Omega3":
        return core @ np.array([[1, 0], [1.0 / e, 1]], dtype=complex)
    return core


def bessel_parametrix_asymptotic(zeta, alpha):
    """(4 pi^2 zeta)^{-sigma_3/4} (I + i sigma_1)/sqrt 2 (I + C/(16 sqrt zeta)), C the first correction."""
    zeta = complex(zeta)
    cmat = np.array([[-1 - 4 * alpha ** 2, -2j], [-2j, 1 + 4 * alpha ** 2]], dtype=complex)
    return (_diag_pow(4 * math.pi ** 2 * zeta, -0.25) @ ((I2 + 1j * SIGMA_1) / math.sqrt(2.0))
            @ (I2 + cmat / (16.0 * np.sqrt(zeta))))


def j1(z, spec, alpha):
    """J_1(z) of the matching expansion on the boundary of the disc around -1."""
    if spec.variant != "g":
        raise ValueError("j1 uses the g variant")
    z = complex(z)
    r = rho(z, alpha)
    g = g_eval(spec, z)
    w = np.sqrt(z + 1.0)
    u = (r + 1.0 / r) ** 2
    return np.array([
        [(r ** -2 - r ** 2) / (8 * g), -1j * (u - 3.0) / (8 * w * g)],
        [-1j * (u - 1.0) * w / (8 * g), (r ** 2 - r ** -2) / (8 * g)],
    ], dtype=complex)


def r1(z, spec, alpha, radius=DISC_RADIUS):
    """R_1(z): the pole part at -1 outside the disc, minus J_1 inside."""
    z = complex(z)
    if abs(abs(z + 1.0) - radius) < 1e-14:
        raise CutError("r1: z on the disc boundary")
    if z == -1:
        raise PoleError("r1: z = -1")
    out = np.zeros((2, 2), dtype=complex)
    out[0, 1] = 1.0 / (8j * (z + 1.0) * (1.0 - spec.kappa))
    if abs(z + 1.0) < radius:
        out = out - j1(z, spec, alpha)
    return out


def r1_cauchy(z, spec, alpha, radius=DISC_RADIUS, n=256):
    """(1/2 pi i) integral of J_1(w)/(w - z) over the clockwise circle |w+1| = radius (trapezoid)."""
    th = 2 * math.pi * (np.arange(n) + 0.5) / n
    w = -1.0 + radius * np.exp(-1j * th)
    dw = -1j * radius * np.exp(-1j * th) * (2 * math.pi / n)
    acc = np.zeros((2, 2), dtype=complex)
    for wi, di in zip(w, dw):
        acc += j1(wi, spec, alpha) / (wi - z) * di
    return acc / (2j * math.pi)


def r1_21_expansion(spec, alpha):
    """(c0, c1) with (R_1)_21 = c0 + c1 (z+1) + O((z+1)^2) at z = -1 (inside the disc)."""
    k, lam, s = spec.k, spec.lam, spec.s
    e = eta_constants(k)
    big = s ** (k + 0.5)
    d = big - lam ** k * float(e.eta0)
    c0 = 3j * big / (8 * d)
    c1 = 1j * (0.5 * alpha ** 2 * big / d + 3 * float(e.eta1) / 8 * lam ** k * big / d ** 2)
    return c0, c1


def e_tilde(z, spec, alpha):
    """tilde E_{-1}(z) = (z+1)^{-sigma_3/4} (cosh-part I + sinh-part sigma_2) (pi^2 s g^2)^{sigma_3/4}."""
    z = complex(z)
    r = rho(z, alpha)
    g = g_eval(spec, z)
    mid = 0.5 * (r + 1.0 / r) * I2 + 0.5 * (r - 1.0 / r) * SIGMA_2
    return _diag_pow(z + 1.0, -0.25) @ mid @ _diag_pow(math.pi ** 2 * spec.s * g * g, 0.25)


def e_tilde_at_minus1(spec, alpha):
    """Closed form of tilde E_{-1}(-1)."""
    k, lam, s = spec.k, spec.lam, spec.s
    d = s ** (k + 0.5) - lam ** k * float(eta_constants(k).eta0)
    a = math.sqrt(d / s ** k)
    return np.array([[math.sqrt(math.pi) * a, 1j * alpha / (math.sqrt(math.pi) * a)],
                     [0, 1.0 / (math.sqrt(math.pi) * a)]], dtype=complex)


def e_tilde_limit(spec, alpha, t=1e-3, direction=np.exp(1j * math.pi / 3)):
    """Numerical limit of tilde E_{-1}(z) as z -> -1 along z = -1 + t^2 direction.

    The expansion runs in powers of t = |z+1|^{1/2}; two Richardson steps
    remove the t and t^2 terms.
    """
    f = lambda tt: e_tilde(-1.0 + tt * tt * direction, spec, alpha)
    return (8 * f(t / 4) - 6 * f(t / 2) + f(t)) / 3


# --- closed-form large-s evaluators ------------------------------------------------------------


@dataclass(frozen=True)
class FsAsy:
    first: float
    second: float

    @property
    def difference(self):
        return self.first - self.second


def fs_asy(alpha, s, lam=0.0, k=1):
    """d F / ds for large s: the eta-explicit form and its simplified leading terms."""
    if not s > 0:
        raise ValueError("fs_asy: need s > 0")
    e = eta_constants(k)
    big = s ** (k + 0.5)
    d = big - lam ** k * float(e.eta0)
    first = (-d * d / (4 * s ** (2 * k + 1)) + alpha * d / (2 * s ** (k + 1))
             - (0.5 * alpha ** 2 + 3 * float(e.eta1) / 8 * lam ** k / d) / (2 * s))
    second = -0.25 + alpha / (2 * math.sqrt(s)) - alpha ** 2 / (4 * s)
    return FsAsy(first, second)


def flambda_asy(alpha, lam, r_value):
    """(r + alpha^2/2 - 1/8) / (2 lambda)."""
    if not lam > 0:
        raise ValueError("flambda_asy: need lambda > 0")
    return (r_value + 0.5 * alpha * alpha - 0.125) / (2.0 * lam)


def f_asy_total(alpha, s, lam, r_integral=0.0):
    """-s/4 + alpha sqrt s - (alpha^2/4) ln s + r_integral + tau_alpha."""
    if not s > 0:
        raise ValueError("f_asy_total: need s > 0")
    if lam == 0 and r_integral != 0:
        raise ValueError("f_asy_total: the lambda integral vanishes at lambda = 0")
    return -0.25 * s + alpha * math.sqrt(s) - 0.25 * alpha * alpha * math.log(s) + r_integral + tau_alpha(alpha)


# --- local functions f and h ---------------------------------------------------------------------

_GL = np.polynomial.legendre.leggauss(24)


def _weight(x, alpha, lam, k):
    """|x|^alpha exp(2 (-1)^{k+1} lambda^{2k} / x^k) continued as (-z)^alpha exp(...) off x < 0."""
    x = np.asarray(x, dtype=complex)
    out = (-x) ** alpha
    if lam != 0:
        out = out * np.exp(2.0 * (-1) ** (k + 1) * lam ** (2 * k) / x ** k)
    return out


def _weight_d12(z, alpha, lam, k):
    """W'(z) / W(z) and W''(z) / W(z)."""
    sgn = (-1) ** (k + 1)
    c = 2.0 * sgn * lam ** (2 * k)
    l1 = alpha / z - c * k / z ** (k + 1)
    l2 = -alpha / z ** 2 + c * k * (k + 1) / z ** (k + 2)
    return l1, l1 * l1 + l2


def _t_breakpoints(c, alpha, lam, k, extra=()):
    """Panels in t = c - x on (0, T): geometric towards t = 0, unit width beyond."""
    scale = max(abs(c), 1.0)
    # integrand ~ |x|^alpha e^{-t}: go until it is 1e-18 below its peak
    T = 45.0 + max(alpha, 0.0) * math.log(scale + 45.0)
    while (abs(c) + T) ** alpha * math.exp(-T) > 1e-18 * max(1.0, (abs(c) + 1) ** alpha):
        T *= 1.2
    pts = {0.0, T}
    lo = min(1.0, scale)
    v = lo
    while v > 1e-15 * scale:
        pts.add(v)
        v /= 4.0
    x = 1.0
    while x < T:
        pts.add(x)
        x += 1.0
    for e in extra:
        if 0 < e < T:
            pts.update({e, e * 0.75, e * 1.25})
            d = 0.25 * e
            while d > 1e-6:
                pts.update({e - d, e + d})
                d /= 4.0
    return np.array(sorted(pts))


def f_local(z, lam, s, alpha, k=1, subtract=None):
    """f(z; lambda) = e^{-z}/(2 pi i) int_{-inf}^{-lambda^2 s} W(x) e^x / (x - z) dx.

    W(x) = |x|^alpha e^{2 (-1)^{k+1} lambda^{2k} / x^k}.  Near the cut the pole is
    subtracted: the remainder is (W(x) - W(z))/(x - z) and the subtracted part
    integrates to -W(z) e^{z} E_1(z - c).  Quadrature in t = c - x with
    geometric panels at t = 0 and truncation where the integrand is below 1e-18
    of its peak.
    """
    z = complex(z)
    c = -lam * lam * s
    if _on_real_ray(z, hi=c):
        raise CutError(f"f: z = {z} lies on the cut (-inf, {c}]")
    if not alpha > -1:
        raise ValueError("f: need alpha > -1")
    near = z.real < c + 1.0 and abs(z.imag) < 1.0 if subtract is None else subtract
    if near and z == 0:
        raise PoleError("f: z = 0 is the essential singularity of W")
    extra = (c - z.real,) if z.real < c else ()
    bp = _t_breakpoints(c, alpha, lam, k, extra)
    xg, wg = _GL
    acc = 0.0 + 0.0j
    if near:
        wz = complex(_weight(z, alpha, lam, k))
        d1, d2 = _weight_d12(z, alpha, lam, k)
    for a, b in zip(bp[:-1], bp[1:]):
        t = a + (b - a) * (xg + 1) / 2
        w = wg * (b - a) / 2
        x = c - t
        wx = _weight(x, alpha, lam, k)
        ex = np.exp(x)
        if near:
            dx = x - z
            q = (wx - wz) / dx
            small = np.abs(dx) < 1e-5
            if np.any(small):
                q[small] = wz * (d1 + 0.5 * d2 * dx[small])
            acc += np.dot(w, q * ex)
        else:
            acc += np.dot(w, wx * ex / (x - z))
    out = np.exp(-z) * acc / (2j * math.pi)
    if near:
        out -= wz * complex(sc.exp1(z - c)) / (2j * math.pi)
    return complex(out)


def _is_int(alpha):
    return float(alpha).is_integer()


def h_local(z, alpha):
    """h(z) = f(z; 0) - z^alpha/(2i sin pi alpha), or the log form for integer alpha (entire)."""
    z = complex(z)
    if z == 0:
        raise PoleError("h_local: evaluate h at z != 0 (removable point of the formula)")
    f0 = f_local(z, 0.0, 0.0, alpha)
    if _is_int(alpha):
        n = int(alpha)
        return f0 - (-1) ** n * z ** n / (1j * math.pi) * np.log(np.sqrt(z) / 2.0)
    return f0 - z ** alpha / (2j * math.sin(math.pi * alpha))


# --- boundary values and jump residuals -----------------------------------------------------------------


def boundary_values(fun, x, normal, eps=BV_EPS):
    """(F_+, F_-) at x: F(x +- 2 eps n) and F(x +- eps n) combined to cancel the O(eps) term.

    The + side is x + eps * normal.
    """
    x, n = complex(x), complex(normal) / abs(complex(normal))
    plus = 2 * np.asarray(fun(x + eps * n)) - np.asarray(fun(x + 2 * eps * n))
    minus = 2 * np.asarray(fun(x - eps * n)) - np.asarray(fun(x - 2 * eps * n))
    return plus, minus


def jump_residual(m_plus, m_minus, jump):
    """||M_+ - M_- J||_F / ||M_-||_F."""
    m_plus, m_minus = np.atleast_2d(m_plus), np.atleast_2d(m_minus)
    return float(np.linalg.norm(m_plus - m_minus @ np.atleast_2d(jump)) / np.linalg.norm(m_minus))


def n_jump(alpha, x):
    if -1 < x < 0:
        e = np.exp(1j * math.pi * alpha)
        return np.array([[e, 0], [0, 1 / e]], dtype=complex)
    if x < -1:
        return np.array([[0, 1], [-1, 0]], dtype=complex)
    raise ValueError("n_jump: x must be in (-inf, -1) or (-1, 0)")


def bessel_jump(alpha, contour):
    e = np.exp(1j * math.pi * alpha)
    if contour == "Sigma1":
        return np.array([[1, 0], [e, 1]], dtype=complex)
    if contour == "Sigma2":
        return np.array([[0, 1], [-1, 0]], dtype=complex)
    if contour == "Sigma3":
        return np.array([[1, 0], [1 / e, 1]], dtype=complex)
    raise ValueError(f"unknown contour {contour!r}")


def bessel_contour_point(contour, r):
    """(point, unit normal to its + side) on Sigma_1, Sigma_2 or Sigma_3 at distance r from 0.

    All three rays are oriented towards the origin; the + side is on the left.
    """
    ang = {"Sigma1": 2 * math.pi / 3, "Sigma2": math.pi, "Sigma3": -2 * math.pi / 3}[contour]
    p = r * np.exp(1j * ang)
    direction = -np.exp(1j * ang)
    return p, 1j * direction
