"""Coupled Painleve III system: residuals, Lax matrices and zero-curvature checks.

The functions a(lambda; s), b_1 .. b_{k+1} are not constructed here for s > 0;
states are supplied (from CSV, from small-lambda expansions or, at s = 0, from
the Painleve III hierarchy) and verified.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as si

from . import quadrature as quad
from .painleve import hierarchy_params, solve_hierarchy_k1
from .specfun import log_gamma

SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]])
SIGMA_3 = np.array([[1.0, 0.0], [0.0, -1.0]])


class GridTooCoarseError(ArithmeticError):
    """The Richardson estimate of the finite-difference error exceeds the tolerance."""


class DivergentIntegralError(ArithmeticError):
    """a(tau; s) - a(tau; 0) is not integrable at tau = 0 to the requested accuracy."""


def lambda_constants(k, alpha):
    """{j: Lambda_j} for j = k+2 .. 2k+2.  Exact for int, Fraction or symbolic alpha."""
    k = int(k)
    if k < 1:
        raise ValueError("lambda_constants: k >= 1")
    out = {j: 0 for j in range(k + 2, 2 * k + 3)}
    out[k + 2] = (-1) ** k * 2 * alpha * k
    out[2 * k + 2] = 2 * k * k
    return out


def sum_index_range(k, j):
    """Indices m of the j-th sum equation, with j - m and m both in 1..k+1.

    Raises if the printed range m = j-k-1 .. k+1 would ever need b_0 or an
    index above k+1 for j in k+2 .. 2k+2 (it does not).
    """
    ms = list(range(j - k - 1, k + 2))
    bad = [m for m in ms if not (1 <= m <= k + 1 and 1 <= j - m <= k + 1)]
    if bad:
        raise IndexError(f"sum equation j={j}, k={k} needs b indices outside 1..k+1: m={bad}")
    return ms


@dataclass(frozen=True)
class CoupledState:
    """a, a', da/ds and the triples (b_j, b_j', b_j'') for j = 1..k+1 at one lambda."""

    lam: float
    s: float
    a: float
    aprime: float
    a_s: float
    b: tuple
    k: int
    alpha: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lambda must be > 0, got {self.lam}")
        if not self.s >= 0:
            raise ValueError(f"s must be >= 0, got {self.s}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        b = tuple(tuple(float(v) for v in t) for t in self.b)
        if len(b) != self.k + 1 or any(len(t) != 3 for t in b):
            raise ValueError(f"b must hold exactly k+1 = {self.k + 1} triples (b, b', b'')")
        object.__setattr__(self, "b", b)

    def bj(self, j):
        """(b_j, b_j', b_j'') with b_{k+2} = 0."""
        if j == self.k + 2:
            return (0.0, 0.0, 0.0)
        if not 1 <= j <= self.k + 1:
            raise IndexError(f"b_{j} is not defined (k = {self.k})")
        return self.b[j - 1]


def coupled_residual(state):
    """Residuals of the k+2 equations: the b_1 equation, then j = k+2 .. 2k+2."""
    k, lam, s = state.k, state.lam, state.s
    b1, d1, dd1 = state.bj(1)
    ell = lam - 2.0 * b1
    out = np.empty(k + 2)
    out[0] = ell * dd1 + (d1 - 0.5) ** 2 + (2.0 * state.aprime - s) * ell * ell
    lams = lambda_constants(k, state.alpha)
    for i, j in enumerate(range(k + 2, 2 * k + 3), start=1):
        acc = 0.0
        for m in sum_index_range(k, j):
            u, du, _ = state.bj(j - m)
            v, dv, ddv = state.bj(m)
            w = state.bj(m + 1)[0]
            acc += -u * ddv + 0.5 * du * dv + 4.0 * state.aprime * u * v + 2.0 * u * w
        out[i] = acc - lams[j]
    return out


def a_s_residual(state):
    """da/ds - (lambda/2 - b_1)."""
    return state.a_s - (0.5 * state.lam - state.bj(1)[0])


@dataclass(frozen=True)
class LaxMatrices:
    A: tuple
    A0: np.ndarray
    B0: np.ndarray
    lam: float
    s: float

    def __post_init__(self):
        for j, m in enumerate(self.A, start=1):
            if abs(np.trace(m)) > 0:
                raise ValueError(f"A_{j} is not traceless")
        if abs(np.trace(self.A0)) > 0:
            raise ValueError("A_0 is not traceless")

    def A_of_z(self, z):
        """A(z) = sum_j A_j z^{-j} + A_0/(z+s) + (lambda/2) sigma_-."""
        z = complex(z)
        out = self.A0 / (z + self.s) + 0.5 * self.lam * SIGMA_MINUS
        zi = 1.0 / z
        p = zi
        for m in self.A:
            out = out + m * p
            p = p * zi
        return out

    def B_of_z(self, z):
        return self.B0 + complex(z) * SIGMA_MINUS


def build_lax(state):
    """A_1..A_{k+1}, A_0 and B_0 = [[0, 1], [2a', 0]] from a coupled state."""
    ap = state.aprime
    mats = []
    for j in range(1, state.k + 2):
        b, db, ddb = state.bj(j)
        nxt = state.bj(j + 1)[0]
        mats.append(np.array([[-0.5 * db, b], [-0.5 * ddb + 2.0 * ap * b + nxt, 0.5 * db]]))
    b1, d1, dd1 = state.bj(1)
    c = 0.5 * state.lam - b1
    a0 = np.array([[-0.25 + 0.5 * d1, c], [0.5 * dd1 + (2.0 * ap - state.s) * c, 0.25 - 0.5 * d1]])
    b0 = np.array([[0.0, 1.0], [2.0 * ap, 0.0]])
    return LaxMatrices(tuple(mats), a0, b0, state.lam, state.s)


def det_a0(state):
    return float(np.linalg.det(build_lax(state).A0))


# --- finite differences over a lambda grid ------------------------------------------


def _uniform_step(states):
    lam = np.array([st.lam for st in states])
    if lam.size < 9:
        raise GridTooCoarseError("need at least 9 lambda points for 4th-order differences with Richardson")
    h = np.diff(lam)
    if np.any(h <= 0) or np.ptp(h) > 1e-9 * h.mean():
        raise ValueError("states must sit on a uniform increasing lambda grid")
    ref = states[0]
    if any(st.k != ref.k or st.s != ref.s or st.alpha != ref.alpha for st in states):
        raise ValueError("states must share k, s and alpha")
    return float(h.mean())


def _d4(f, i, h, step=1):
    """4th-order central difference of the sequence f at index i with stride step."""
    hs = h * step
    return (f[i - 2 * step] - 8 * f[i - step] + 8 * f[i + step] - f[i + 2 * step]) / (12 * hs)


def _derivative(f, i, h):
    """(D_h f, Richardson error estimate |D_h - D_2h| / 15)."""
    d1 = _d4(f, i, h)
    d2 = _d4(f, i, h, 2)
    return d1, np.max(np.abs(d1 - d2)) / 15.0


@dataclass
class CurvatureReport:
    residual: float
    fd_error: float
    lam: np.ndarray = field(repr=False)


def zero_curvature_residual(states, z_grid, tol=1e-6):
    """max over interior lambda and z of |dA/dlambda - dB/dz + [A, B]| (max-entry norm).

    dA/dlambda is a 4th-order central difference over the lambda grid; the
    Richardson estimate (comparison with stride 2h) must stay below tol, else
    GridTooCoarseError.
    """
    h = _uniform_step(states)
    z_grid = np.atleast_1d(np.asarray(z_grid, dtype=complex))
    s = states[0].s
    if np.any(np.abs(z_grid) == 0) or np.any(np.abs(z_grid + s) == 0):
        raise ValueError("z grid must avoid 0 and -s")
    lax = [build_lax(st) for st in states]
    worst, err = 0.0, 0.0
    idx = range(4, len(states) - 4)
    for z in z_grid:
        amat = [lx.A_of_z(z) for lx in lax]
        for i in idx:
            da, e = _derivative(amat, i, h)
            bmat = lax[i].B_of_z(z)
            r = da - SIGMA_MINUS + amat[i] @ bmat - bmat @ amat[i]
            worst = max(worst, float(np.max(np.abs(r))))
            err = max(err, float(e))
    if err > tol:
        raise GridTooCoarseError(f"finite-difference error estimate {err:.2e} exceeds {tol:.1e}")
    return CurvatureReport(worst, err, np.array([states[i].lam for i in idx]))


def lax_entry_relations(states, j):
    """Entries of A_j' + [A_j, B_0] + [A_{j+1}, sigma_-] at interior grid points.

    Columns: (1,1) (A_j)11' - (A_j)21 + 2a'b_j + b_{j+1};
    (1,2) b_j' + 2 (A_j)11; (2,1) (A_j)21' - 4a'(A_j)11 + b_{j+1}'.
    The first two vanish by the form of A_j; the third is a genuine equation.
    Returns (array of shape (n, 3), fd_error).
    """
    h = _uniform_step(states)
    k = states[0].k
    if not 1 <= j <= k + 1:
        raise IndexError(f"j must be in 1..{k + 1}")
    lax = [build_lax(st) for st in states]
    aj = [lx.A[j - 1] for lx in lax]
    zero = np.zeros((2, 2))
    aj1 = [lx.A[j] if j <= k else zero for lx in lax]
    rows, err = [], 0.0
    for i in range(4, len(states) - 4):
        d, e = _derivative(aj, i, h)
        b0 = lax[i].B0
        r = d + aj[i] @ b0 - b0 @ aj[i] + aj1[i] @ SIGMA_MINUS - SIGMA_MINUS @ aj1[i]
        rows.append((r[0, 0], r[0, 1], r[1, 0]))
        err = max(err, float(e))
    return np.array(rows), err


# --- Painleve-type formula and small-lambda data --------------------------------------


def tw_type_gap(lam, s, a_diff, tol=1e-13, max_levels=400):
    """-int_0^lambda a_diff(tau) dtau.

    a_diff(tau) = a(tau; s) - a(tau; 0) must be integrable at 0.  Geometric
    panels (ratio 1/4) with 20-point Gauss-Legendre are added towards 0 until
    the tail estimate tau |a_diff(tau)| drops below tol * max(|integral|, tiny);
    if it stops shrinking the data are flagged as divergent.
    """
    if not lam > 0:
        raise ValueError("tw_type_gap: need lambda > 0")
    if not s >= 0:
        raise ValueError("tw_type_gap: need s >= 0")
    base = quad.gauss_legendre(20)

    def panel(lo, hi):
        x = lo + (hi - lo) * (base.nodes + 1.0) / 2.0
        vals = np.array([float(a_diff(t)) for t in x])
        if not np.all(np.isfinite(vals)):
            raise DivergentIntegralError("a_diff is not finite on (0, lambda]")
        return float(np.dot(base.weights, vals)) * (hi - lo) / 2.0

    hi = float(lam)
    total = 0.0
    tails = []
    for _ in range(max_levels):
        lo = hi / 4.0
        total += panel(lo, hi)
        tail = abs(lo * float(a_diff(lo)))
        tails.append(tail)
        if tail <= tol * abs(total) or tail < 1e-300:
            return -total if total else 0.0
        # a 1/tau singularity keeps tau |a_diff| from decaying
        if len(tails) > 20 and tail > 0.5 * tails[-21]:
            raise DivergentIntegralError("a_diff ~ 1/tau near 0: the integral does not converge")
        hi = lo
    raise DivergentIntegralError(f"tail {tails[-1]:.2e} still above tolerance after {max_levels} panels")


def a_small_lambda(alpha, lam):
    """(1 - 4 alpha^2)/(8 lambda); O(lambda^{1+2alpha}) not modeled."""
    if not lam > 0:
        raise ValueError("a_small_lambda: need lambda > 0")
    return (1.0 - 4.0 * alpha * alpha) / (8.0 * lam)


def _b1_coeff(alpha, s, k):
    return math.exp(alpha * math.log(s) - (2 * alpha + 1) * math.log(2.0)
                    - 2.0 * log_gamma(alpha + 1.0) - 2.0 / s ** k)


def b1_small_lambda(alpha, lam, s, k=1):
    """lambda/2 - s^alpha lambda^{2alpha+1} e^{-2/s^k} / (2^{2alpha+1} Gamma(alpha+1)^2)."""
    if not s > 0:
        raise ValueError("b1_small_lambda: need s > 0")
    return 0.5 * lam - _b1_coeff(alpha, s, k) * lam ** (2 * alpha + 1)


def a_s_small_lambda(alpha, lam, s, k=1):
    """da/ds = lambda/2 - b_1 with the small-lambda b_1."""
    return 0.5 * lam - b1_small_lambda(alpha, lam, s, k)


def a_diff_coefficient(alpha, s, k=1):
    """C(s) with a(tau; s) - a(tau; 0) ~ C(s) tau^{2alpha+1}: the s-integral of da/ds."""
    if not s > 0:
        raise ValueError("a_diff_coefficient: need s > 0")
    val, _ = si.quad(lambda x: _b1_coeff(alpha, x, k), 0.0, s, epsabs=0.0, epsrel=1e-13, limit=200)
    return val


def a_diff_small_lambda(alpha, s, k=1):
    """Evaluator tau -> C(s) tau^{2alpha+1} of the leading small-lambda a(tau; s) - a(tau; 0)."""
    c = a_diff_coefficient(alpha, s, k)
    p = 2 * alpha + 1

    def f(tau):
        return c * tau ** p

    return f


# --- hierarchy map (s = 0) --------------------------------------------------------------


def hierarchy_to_coupled(cand, lam, a=0.0, alpha=0.0):
    """s = 0 state from a hierarchy candidate: a' = -rho/2, b_{j+1} = ell_j / 4^j."""
    ells = cand.ells(lam)[: cand.k + 1]
    b = [tuple(v / 4 ** j for v in t) for j, t in enumerate(ells)]
    return CoupledState(float(lam), 0.0, float(a), -0.5 * cand.rho_value(lam), 0.0,
                        tuple(b), cand.k, float(alpha))


def k1_pipeline_states(alpha, lam_grid, ell_init=(-4.0, -1.0), tol=1e-13):
    """k = 1, s = 0 coupled states along lam_grid from a hierarchy solution."""
    lam_grid = np.asarray(lam_grid, dtype=float)
    sol = solve_hierarchy_k1(alpha, (lam_grid[0], lam_grid[-1]), ell_init, 0.0, tol)
    cand = sol.candidate()
    return [hierarchy_to_coupled(cand, l, float(sol.a(l)), alpha) for l in lam_grid]


def hierarchy_constant_check(k, alpha):
    """(2 * 4^{2k} Lambda_{2k+2}, tau_0): equal when the maps are consistent.

    Only m = k+1 enters the top sum equation; with b_{k+1} = ell_k/4^k and
    a' = -rho/2 it becomes 4^{-2k} tau_0 / 2 = Lambda_{2k+2} after the p = 0
    hierarchy equation eliminates rho.
    """
    lams = lambda_constants(k, alpha)
    return lams[2 * k + 2] * 4 ** (2 * k) * 2, hierarchy_params(k, alpha)[0]


# --- CSV -------------------------------------------------------------------------------


def _columns(k):
    cols = ["lambda", "a", "aprime", "a_s"]
    for j in range(1, k + 2):
        cols += [f"b{j}", f"b{j}p", f"b{j}pp"]
    return cols


def write_states_csv(states, path_or_fh):
    """CSV with '# s:' and '# alpha:' comment lines and a header row."""
    if not states:
        raise ValueError("no states to write")
    k, s, alpha = states[0].k, states[0].s, states[0].alpha
    own = isinstance(path_or_fh, str)
    fh = open(path_or_fh, "w", newline="") if own else path_or_fh
    try:
        fh.write(f"# s: {s!r}\n# alpha: {alpha!r}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_columns(k))
        for st in states:
            if (st.k, st.s, st.alpha) != (k, s, alpha):
                raise ValueError("states must share k, s and alpha")
            row = [st.lam, st.a, st.aprime, st.a_s] + [v for t in st.b for v in t]
            w.writerow([f"{v:.17g}" for v in row])
    finally:
        if own:
            fh.close()


def read_states_csv(path_or_fh):
    """Inverse of write_states_csv; k is inferred from the number of b columns."""
    own = isinstance(path_or_fh, str)
    fh = open(path_or_fh, newline="") if own else path_or_fh
    try:
        text = fh.read()
    finally:
        if own:
            fh.close()
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            meta[key.strip()] = val.strip()
        elif line.strip():
            body.append(line)
    for key in ("s", "alpha"):
        if key not in meta:
            raise ValueError(f"coupled CSV: missing '# {key}:' line")
    if not body:
        raise ValueError("coupled CSV: missing header")
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    header = [c.strip() for c in rows[0]]
    nb = len(header) - 4
    if nb < 6 or nb % 3:
        raise ValueError("coupled CSV: need lambda, a, aprime, a_s and k+1 >= 2 b triples")
    k = nb // 3 - 1
    if header != _columns(k):
        raise ValueError(f"coupled CSV: header must be {','.join(_columns(k))}")
    s, alpha = float(meta["s"]), float(meta["alpha"])
    out = []
    for n, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"coupled CSV line {n}: expected {len(header)} fields")
        v = [float(x) for x in row]
        b = tuple(tuple(v[4 + 3 * i: 7 + 3 * i]) for i in range(k + 1))
        out.append(CoupledState(v[0], s, v[1], v[2], v[3], b, k, alpha))
    return out
