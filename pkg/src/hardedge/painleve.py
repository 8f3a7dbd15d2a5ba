"""Tracy-Widom ODE for the Bessel gap, the Painleve III hierarchy and r(lambda) evaluators."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from . import quadrature as quad
from .specfun import double_factorial, log_barnes_g, log_gamma

LOG_2PI = math.log(2.0 * math.pi)


class IntegrationError(ArithmeticError):
    """The ODE integration failed (step failure or q^2 = 1 crossing)."""


@dataclass(frozen=True)
class PainleveVState:
    tau: float
    q: float
    qprime: float


def tau_alpha(alpha):
    """Constant term ln G(1 + alpha) - (alpha/2) ln 2 pi of the large-s expansion."""
    if not alpha > -1:
        raise ValueError("tau_alpha: need alpha > -1")
    return log_barnes_g(1.0 + alpha) - 0.5 * alpha * LOG_2PI


def asy_log_det_bessel(alpha, s):
    """-s/4 + alpha sqrt(s) - (alpha^2/4) ln s + tau_alpha."""
    if not s > 0:
        raise ValueError("asy_log_det_bessel: need s > 0")
    return -0.25 * s + alpha * math.sqrt(s) - 0.25 * alpha * alpha * math.log(s) + tau_alpha(alpha)


def seed_coefficients(alpha):
    """Boundary series q = c tau^{a/2} (1 + A tau + B tau^{a+1} + ...).

    Returns (c, A, B).  Obtained by substituting the ansatz into the ODE;
    the tau^{2a+1} coefficient vanishes.
    """
    c = math.exp(-alpha * math.log(2.0) - log_gamma(1.0 + alpha))
    return c, -0.25 / (alpha + 1.0), c * c / (4.0 * (alpha + 1.0) ** 2)


def seed_tau(alpha):
    # next omitted terms are tau^2, tau^{a+2}, tau^{2a+2}; keep them below ~1e-16
    return 1e-8 if alpha >= 0 else math.exp(math.log(1e-8) / (alpha + 1.0))


def _rhs(alpha):
    """First-order system in t = ln tau for y = (v, Dv), v = q tau^{-a/2}, D = d/dt."""
    a = alpha
    if a >= 0:
        def f(t, y):
            v, u = y
            tau = math.exp(t)
            e2 = math.exp(a * t)
            den = e2 * v * v - 1.0
            num = e2 * v * (u + 0.5 * a * v) ** 2 + 0.25 * (tau - a * a) * v \
                + 0.25 * tau * e2 * v ** 3 * (e2 * v * v - 2.0)
            return [u, num / den - a * u - 0.25 * a * a * v]
    else:
        def f(t, y):
            v, u = y
            tau = math.exp(t)
            g = math.exp(-a * t)
            den = v * v - g
            num = v * (u + 0.5 * a * v) ** 2 + 0.25 * (tau - a * a) * v * g \
                + 0.25 * math.exp((1.0 + a) * t) * v ** 3 * (v * v - 2.0 * g)
            return [u, num / den - a * u - 0.25 * a * a * v]
    return f


# below this |alpha| q = 1 + alpha u and the v form loses digits in q^2 - 1
SMALL_ALPHA = 0.01
_ZETA = (None, None, 1.6449340668482264, 1.2020569031595943, 1.0823232337111382,
         1.0369277551433699, 1.0173430619844491, 1.0083492773819228, 1.0040773561979443)
_EULER_GAMMA = 0.5772156649015329


def _lgamma1p_over(alpha):
    """ln Gamma(1 + a) / a, stable as a -> 0."""
    if abs(alpha) < 1e-3:
        return -_EULER_GAMMA + sum((-1) ** k * _ZETA[k] * alpha ** (k - 1) / k for k in range(2, 9))
    return log_gamma(1.0 + alpha) / alpha


def _exprel(x):
    return 1.0 if x == 0 else math.expm1(x) / x


def _seed_u(alpha, tau0):
    """(u, Du) at tau0 for q = 1 + alpha u, from the boundary series without cancellation."""
    a = alpha
    E = 0.5 * math.log(tau0) - math.log(2.0) - _lgamma1p_over(a)
    X = a * E  # c tau^{a/2} = e^X
    w = tau0 / (4.0 * (a + 1.0))
    Y_over = 2.0 * E - (math.log1p(a) / a)
    P_over = w * _exprel(a * Y_over) * Y_over  # (A tau + B tau^{a+1}) / a
    P = a * P_over
    u0 = _exprel(X) * E * (1.0 + P) + P_over
    du0 = 0.5 * math.exp(X) * (1.0 + P) + math.exp(X) * w * _exprel(2.0 * X) * 2.0 * E
    return u0, du0


def _rhs_small(alpha):
    """System in t = ln tau for y = (u, Du) with q = 1 + alpha u; regular as alpha -> 0."""
    a = alpha

    def f(t, y):
        u, du = y
        tau = math.exp(t)
        x = a * u
        num = (1.0 + x) * du * du + 0.25 * tau * u * u * (4.0 + x * (8.0 + x * (5.0 + x))) \
            - 0.25 * (1.0 + x)
        return [du, num / (u * (2.0 + x))]
    return f


@dataclass
class QTrajectory:
    """Dense solution of the Tracy-Widom ODE on (tau0, tau_max)."""

    alpha: float
    tau0: float
    tau_max: float
    sol: object = None
    rtol: float = 1e-12
    nfev: int = 0
    small: bool = False  # sol carries (u, Du) with q = 1 + alpha u

    @property
    def exact(self):
        # alpha = 0: q = 1 solves the ODE and the boundary condition exactly
        return self.alpha == 0 and self.sol is None

    def _check(self, tau):
        tau = np.asarray(tau, dtype=float)
        if np.any(tau < self.tau0 * (1 - 1e-12)) or np.any(tau > self.tau_max * (1 + 1e-12)):
            raise ValueError(f"tau outside the integrated range [{self.tau0:g}, {self.tau_max:g}]")
        return tau

    def q_dq(self, tau):
        """q and D q = tau q' at tau (arrays)."""
        tau = self._check(tau)
        if self.exact:
            return np.ones_like(tau), np.zeros_like(tau)
        t = np.log(tau)
        if self.small:
            u, du = self.sol(t.ravel())
            return (1.0 + self.alpha * u).reshape(tau.shape), (self.alpha * du).reshape(tau.shape)
        v, u = self.sol(t.ravel())
        e = np.exp(0.5 * self.alpha * t.ravel())
        q = e * v
        dq = e * (u + 0.5 * self.alpha * v)
        return q.reshape(tau.shape), dq.reshape(tau.shape)

    def q(self, tau):
        return self.q_dq(tau)[0]

    def qprime(self, tau):
        q, dq = self.q_dq(tau)
        return dq / np.asarray(tau, dtype=float)

    def state(self, tau):
        q, dq = self.q_dq(float(tau))
        return PainleveVState(float(tau), float(q), float(dq) / float(tau))

    def residual(self, tau, h=1e-3):
        """Scaled ODE residual |...| / (1 + (tau q')^2); D^2 q from the dense output by
        4th-order differences in t = ln tau."""
        tau = self._check(tau)
        if self.exact:
            return np.zeros_like(tau)
        t = np.log(tau)
        lo, hi = math.log(self.tau0) + 2 * h, math.log(self.tau_max) - 2 * h
        t = np.clip(t, lo, hi)
        tau = np.exp(t)
        q, dq = self.q_dq(tau)
        taus = [np.exp(t + k * h) for k in (-2, -1, 1, 2)]
        d = [self.q_dq(x)[1] for x in taus]
        d2q = (d[0] - 8 * d[1] + 8 * d[2] - d[3]) / (12 * h)
        a = self.alpha
        res = (q * q - 1) * d2q - q * dq ** 2 - 0.25 * (tau - a * a) * q - 0.25 * tau * q ** 3 * (q * q - 2)
        return np.abs(res) / (1 + dq ** 2)

    def write_csv(self, path_or_fh, taus, with_residual=True):
        taus = np.asarray(taus, dtype=float)
        q, dq = self.q_dq(taus)
        cols = ["tau", "q", "qprime"] + (["residual"] if with_residual else [])
        res = self.residual(taus) if with_residual else None
        own = isinstance(path_or_fh, str)
        fh = open(path_or_fh, "w", newline="") if own else path_or_fh
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for i, t in enumerate(taus):
                row = [t, q[i], dq[i] / t] + ([res[i]] if with_residual else [])
                w.writerow([f"{v:.17g}" for v in row])
        finally:
            if own:
                fh.close()


def integrate_q(alpha, tau_max, tol=1e-12):
    """Integrate the Tracy-Widom ODE from the boundary series to tau_max.

    Works in t = ln tau with v = q tau^{-alpha/2}, which stays O(1) at the
    seed for every alpha > -1.  DOP853 with dense output.  For alpha = 0 the
    solution is q = 1 identically (the ODE degenerates to 0 = 0) and is returned
    as such.  For 0 < |alpha| < SMALL_ALPHA the unknown is u = (q - 1)/alpha,
    whose equation has a regular alpha -> 0 limit.
    """
    if not alpha > -1:
        raise ValueError("integrate_q: need alpha > -1")
    if not tau_max > 0:
        raise ValueError("integrate_q: need tau_max > 0")
    tau0 = seed_tau(alpha)
    if tau_max <= tau0:
        raise ValueError(f"integrate_q: tau_max must exceed the seed point {tau0:g}")
    if alpha == 0:
        return QTrajectory(0.0, tau0, float(tau_max))
    t0, t1 = math.log(tau0), math.log(tau_max)
    if abs(alpha) < SMALL_ALPHA:
        # u < 0 on the whole solution; u -> 0 is the q^2 = 1 singularity
        def hit(t, y):
            return y[0] + 1e-12

        hit.terminal = True
        sol = solve_ivp(_rhs_small(alpha), (t0, t1), list(_seed_u(alpha, tau0)), method="DOP853",
                        rtol=tol, atol=tol * 1e-3, dense_output=True, events=hit)
        if sol.status == 1:
            tau_hit = math.exp(sol.t_events[0][0])
            raise IntegrationError(f"integrate_q: q^2 reached 1 at tau = {tau_hit:.6g}")
        if sol.status != 0:
            raise IntegrationError(f"integrate_q: {sol.message} near tau = {math.exp(sol.t[-1]):.6g}")
        return QTrajectory(float(alpha), tau0, float(tau_max), sol.sol, tol, sol.nfev, True)
    c, A, B = seed_coefficients(alpha)
    v0 = c * (1 + A * tau0 + B * tau0 ** (alpha + 1))
    u0 = c * (A * tau0 + B * (alpha + 1) * tau0 ** (alpha + 1))

    def crossing(t, y):
        e2 = math.exp(alpha * t)
        return e2 * y[0] * y[0] - 1.0 + 1e-9 * np.sign(alpha)

    crossing.terminal = True
    sol = solve_ivp(_rhs(alpha), (t0, t1), [v0, u0], method="DOP853", rtol=tol,
                    atol=tol * 1e-3, dense_output=True, events=crossing)
    if sol.status == 1:
        tau_hit = math.exp(sol.t_events[0][0])
        raise IntegrationError(f"integrate_q: q^2 reached 1 at tau = {tau_hit:.6g}")
    if sol.status != 0:
        raise IntegrationError(f"integrate_q: {sol.message} near tau = {math.exp(sol.t[-1]):.6g}")
    return QTrajectory(float(alpha), tau0, float(tau_max), sol.sol, tol, sol.nfev)


def tw_log_det(alpha, s, tol=1e-12, trajectory=None):
    """-(1/4) int_0^s ln(s/tau) q(tau)^2 dtau from the Tracy-Widom ODE.

    The integral is taken in t = ln tau, where the log weight becomes the
    smooth factor (ln s - t), with composite Gauss-Legendre panels; the piece
    on (0, tau0) comes from the boundary series.

    Accuracy degrades as alpha -> -1: q is the recessive solution and forward
    integration amplifies local errors by roughly exp(2 sqrt(tau)), so at
    alpha = -0.9 and s = 25 only about 1e-8 is reached.
    """
    if not s > 0:
        raise ValueError("tw_log_det: need s > 0")
    if alpha == 0:
        return -0.25 * s
    tr = trajectory
    if tr is None or tr.tau_max < s or tr.alpha != alpha:
        tr = integrate_q(alpha, s, tol)
    tau0 = tr.tau0
    c = seed_coefficients(alpha)[0]
    head = 0.0
    if s > tau0:
        head = c * c * tau0 ** (alpha + 1) / (alpha + 1) * (math.log(s / tau0) + 1.0 / (alpha + 1))
        t0, t1 = math.log(tau0), math.log(s)
        npan = max(4, int(math.ceil((t1 - t0) / 0.5)))
        rule = quad.composite_rule(20, np.linspace(t0, t1, npan + 1))

        def integrand(t):
            q = tr.q(np.exp(t))
            return np.exp(t) * (t1 - t) * q * q

        body = float(quad.integrate(integrand, rule))
    else:
        head = c * c * s ** (alpha + 1) / (alpha + 1) ** 2
        body = 0.0
    return -0.25 * (head + body)


def p_from_q(tau, q, qprime):
    """p = 2 tau q' / (q^2 - 1); the q = 1, q' = 0 solution has p = 0."""
    den = q * q - 1.0
    if den == 0.0:
        if qprime == 0.0:
            return 0.0
        raise ZeroDivisionError("p_from_q: q^2 = 1 with q' != 0")
    return 2.0 * tau * qprime / den


def hamiltonian_h(q, p, s, alpha):
    """(q^2-1) p^2/(4s) - alpha^2 q^2/(4s(q^2-1)) - q^2/4."""
    if not s > 0:
        raise ValueError("hamiltonian_h: need s > 0")
    den = q * q - 1.0
    out = den * p * p / (4.0 * s) - 0.25 * q * q
    if alpha != 0:
        if den == 0.0:
            raise ZeroDivisionError("hamiltonian_h: pole at q^2 = 1")
        out -= alpha * alpha * q * q / (4.0 * s * den)
    return out


def hamiltonian_along(tr, tau):
    """H_H(tau) along a trajectory."""
    st = tr.state(tau)
    return hamiltonian_h(st.q, p_from_q(st.tau, st.q, st.qprime), st.tau, tr.alpha)


# --- Painleve III hierarchy ------------------------------------------------------


def hierarchy_params(k, alpha):
    """[tau_0, ..., tau_k]: tau_0 = 4^{2k+1} k^2, tau_k = -(-4)^{k+1} alpha k, zero between.

    Exact when alpha is an int or Fraction."""
    k = int(k)
    if k < 1:
        raise ValueError("hierarchy_params: k >= 1")
    taus = [0] * (k + 1)
    taus[0] = 4 ** (2 * k + 1) * k * k
    taus[k] = -((-4) ** (k + 1)) * alpha * k
    return taus


def _triple(fun, lam):
    val = fun(lam)
    if np.ndim(val) == 0:
        raise ValueError("ell functions must return (value, first, second derivative)")
    v, d1, d2 = (float(x) for x in val)
    return v, d1, d2


@dataclass
class HierarchyCandidate:
    """rho(lambda) and ell_1..ell_k; each ell_j(lambda) returns (value, d/dl, d2/dl2)."""

    k: int
    rho: Callable
    ell: Sequence[Callable]
    tau_params: Sequence[float]

    def __post_init__(self):
        if len(self.ell) != self.k:
            raise ValueError(f"need {self.k} ell functions, got {len(self.ell)}")
        if len(self.tau_params) != self.k + 1:
            raise ValueError(f"need {self.k + 1} tau parameters")

    def ells(self, lam):
        """[(l, l', l'')] for indices 0..k+1 with ell_0 = lambda/2, ell_{k+1} = 0."""
        out = [(0.5 * lam, 0.5, 0.0)]
        out += [_triple(f, lam) for f in self.ell]
        out.append((0.0, 0.0, 0.0))
        return out

    def rho_value(self, lam):
        r = self.rho(lam)
        return float(r[0]) if np.ndim(r) else float(r)


def hierarchy_residual(cand, lam):
    """Residuals of the p = 0..k equations of the hierarchy at lambda."""
    k = cand.k
    L = cand.ells(lam)
    rho = cand.rho_value(lam)
    lk, dk, ddk = L[k]
    if lk == 0.0:
        raise ZeroDivisionError("hierarchy_residual: ell_k vanishes")
    out = np.empty(k + 1)
    # (l_k^2)'' - 3 l_k'^2 = 2 l_k l_k'' - l_k'^2
    out[0] = rho + (2 * lk * ddk - dk * dk + cand.tau_params[0]) / (4 * lk * lk)
    for p in range(1, k + 1):
        acc = 0.0
        for qq in range(p + 1):
            a, da, dda = L[k - p + qq]
            b, db, ddb = L[k - qq]
            c1 = L[k - p + qq + 1][0]
            prod2 = dda * b + 2 * da * db + a * ddb
            acc += c1 * b - prod2 + 3 * da * db - 4 * rho * a * b
        out[p] = acc - cand.tau_params[p]
    return out


def scalar_piii_k1_residual(l, dl, ddl, lam, tau0, tau1):
    """Residual of l'' = l'^2/l - l'/lam - l^2/lam - tau0/l + tau1/lam."""
    return ddl - (dl * dl / l - dl / lam - l * l / lam - tau0 / l + tau1 / lam)


@dataclass
class HierarchyK1Solution:
    """Numerical ell_1 of the k = 1 hierarchy with a(lambda) = -int rho/2 (a(lam0) = a0)."""

    alpha: float
    lam_span: tuple
    tau0: float
    tau1: float
    sol: object = field(repr=False, default=None)

    def _ddl(self, lam, l, dl):
        return dl * dl / l - dl / lam - l * l / lam - self.tau0 / l + self.tau1 / lam

    def ell1(self, lam):
        l, dl, _ = self.sol(lam)
        return l, dl, self._ddl(lam, l, dl)

    def rho(self, lam):
        l, dl, ddl = self.ell1(lam)
        return -(2 * l * ddl - dl * dl + self.tau0) / (4 * l * l)

    def a(self, lam):
        return self.sol(lam)[2]

    def candidate(self):
        return HierarchyCandidate(1, self.rho, [self.ell1], [self.tau0, self.tau1])


def solve_hierarchy_k1(alpha, lam_span=(1.0, 2.0), ell_init=(-4.0, -1.0), a0=0.0, tol=1e-12):
    """Integrate the scalar k = 1 equation for ell_1 from arbitrary data at lam_span[0].

    Any local solution satisfies the hierarchy; the physical one would need
    the Riemann-Hilbert problem and is not attempted here.
    """
    tau0, tau1 = (float(t) for t in hierarchy_params(1, alpha))
    out = HierarchyK1Solution(float(alpha), tuple(lam_span), tau0, tau1)

    def f(lam, y):
        l, dl, _ = y
        ddl = out._ddl(lam, l, dl)
        rho = -(2 * l * ddl - dl * dl + tau0) / (4 * l * l)
        return [dl, ddl, -0.5 * rho]

    def zero(lam, y):
        return y[0]

    zero.terminal = True
    sol = solve_ivp(f, lam_span, [ell_init[0], ell_init[1], a0], method="DOP853", rtol=tol,
                    atol=tol * 1e-2, dense_output=True, events=zero)
    if sol.status != 0:
        raise IntegrationError(f"solve_hierarchy_k1: {sol.message or 'ell_1 reached 0'}")
    out.sol = sol.sol
    return out


# --- r(lambda) asymptotics ---------------------------------------------------------


def r_small(alpha, lam, k=1):
    """Leading term (1 - 4 alpha^2)/8 of r as lambda -> 0 (O(lambda^k) not modeled)."""
    if lam < 0:
        raise ValueError("r_small: lambda >= 0")
    return (1.0 - 4.0 * alpha * alpha) / 8.0


@dataclass(frozen=True)
class RAsymConstants:
    k: int
    z0: float
    notes: tuple = ()

    def beta(self, j):
        """beta_j = -(-z0)^{-3/2-j} (2j+1)!!/(2^j j!); j = -1 uses 1/(-1)! = 0."""
        if j < -1:
            raise ValueError("beta: j >= -1")
        if j == -1:
            return 0.0
        return -((-self.z0) ** (-1.5 - j)) * double_factorial(2 * j + 1) / (2 ** j * math.factorial(j))


def r_large_constants(k):
    k = int(k)
    if k < 1:
        raise ValueError("r_large_constants: k >= 1")
    base = 2 ** (k - 1) * math.factorial(k - 1) / double_factorial(2 * k - 1)
    z0 = -base ** (-2.0 / (2 * k + 1))
    notes = ("leading terms only; O(1) remainder not modeled",)
    if k == 1:
        notes += ("beta_{-1}: convention 0 (reciprocal-Gamma), not asserted",)
    return RAsymConstants(k, z0, notes)


def r_large(k, alpha, lam):
    """lambda^{2k/(2k+1)} (beta_{k-2} - 3 z0/2) - (-z0)^{1/2} lambda^{k/(2k+1)} alpha."""
    c = r_large_constants(k)
    p = 2 * k + 1
    return lam ** (2 * k / p) * (c.beta(k - 2) - 1.5 * c.z0) - math.sqrt(-c.z0) * lam ** (k / p) * alpha
