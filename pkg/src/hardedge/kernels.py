"""Bessel kernel, Psi-sampled kernels and Fredholm gap log-determinants."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sc

from . import quadrature as quad
from .specfun import bessel_j

NEAR_DIAG = 1e-6
# below this both closed forms cancel badly; use the power series instead
SMALL_X = 1.0
SERIES_TERMS = 24
# above this s the double-precision determinant loses more than ~1e-11
DOUBLE_S_MAX = 36.0


@dataclass(frozen=True)
class HardEdgeParams:
    alpha: float
    s: float
    lam: float = 0.0
    k: int = 1

    def __post_init__(self):
        if not self.alpha > -1:
            raise ValueError(f"alpha must be > -1, got {self.alpha}")
        if not self.s > 0:
            raise ValueError(f"s must be > 0, got {self.s}")
        if not self.lam >= 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")


def default_nodes(s):
    return max(40, int(math.ceil(6.0 * math.sqrt(s))) + 20)


def _series_coeffs(alpha, n=SERIES_TERMS):
    m = np.arange(n)
    return m, (-0.25) ** m * sc.rgamma(m + 1.0) * sc.rgamma(m + alpha + 1.0)


def _k_series(alpha, x, y):
    """K(x, y) for small x, y from the double power series.

    With J_a(sqrt x) = (sqrt(x)/2)^a P(x) and sqrt(x) J_a'(sqrt x) = (sqrt(x)/2)^a Q(x),
    P = sum p_m x^m and Q = sum (2m + a) p_m x^m, the numerator pairs collapse to
    K = -(xy/16)^{a/2} sum_{m<n} (n - m) p_m p_n (xy)^m h_{n-m-1}(x, y),
    h_d the complete homogeneous polynomial of degree d.  No cancellation.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    idx, p = _series_coeffs(alpha)
    n = idx.size
    xp = x[..., None] ** idx
    yp = y[..., None] ** idx
    # h[d] = sum_{i=0}^d x^i y^{d-i}
    h = np.zeros(x.shape + (n,))
    for d in range(n):
        h[..., d] = np.sum(xp[..., : d + 1] * yp[..., d::-1], axis=-1)
    xy = x * y
    acc = np.zeros(x.shape)
    xym = np.ones(x.shape)
    for m in range(n - 1):
        d = np.arange(1, n - m)
        acc += xym * np.sum(d * p[m] * p[m + d] * h[..., d - 1], axis=-1)
        xym = xym * xy
    with np.errstate(divide="ignore", invalid="ignore"):
        pref = np.where(xy > 0, (xy / 16.0) ** (0.5 * alpha), 1.0 if alpha == 0 else 0.0)
    return -pref * acc


def k_bessel_diag(alpha, x):
    """K_Bes(x, x) = (J_a(r)^2 - J_{a+1}(r) J_{a-1}(r)) / 4 with r = sqrt(x)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("k_bessel_diag: x must be >= 0")
    if np.any(x == 0) and alpha < 0:
        raise ValueError("k_bessel_diag: the diagonal diverges at x = 0 for alpha < 0")
    r = np.sqrt(x)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = 0.25 * (bessel_j(alpha, r) ** 2 - bessel_j(alpha + 1, r) * bessel_j(alpha - 1, r))
    out = np.where(x == 0, 0.25 if alpha == 0 else 0.0, out)
    small = (x < SMALL_X) & (x > 0)
    if np.any(small):
        out = np.where(small, _k_series(alpha, np.where(small, x, 0.5), np.where(small, x, 0.5)), out)
    return out.item() if out.ndim == 0 else out


def k_bessel(alpha, x, y):
    """Bessel kernel K_Bes(x, y) for x, y > 0 (broadcasts).

    Pairs with |x - y| < 1e-6 max(x, y) are served by the diagonal at the
    midpoint, which is second-order accurate because the kernel is symmetric.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("k_bessel: arguments must be > 0")
    rx, ry = np.sqrt(x), np.sqrt(y)
    jx, jy = bessel_j(alpha, rx), bessel_j(alpha, ry)
    dx = 0.5 * (bessel_j(alpha - 1, rx) - bessel_j(alpha + 1, rx))
    dy = 0.5 * (bessel_j(alpha - 1, ry) - bessel_j(alpha + 1, ry))
    near = np.abs(x - y) < NEAR_DIAG * np.maximum(x, y)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = (jx * ry * dy - rx * dx * jy) / (2.0 * (x - y))
    if np.any(near):
        out = np.where(near, k_bessel_diag(alpha, 0.5 * (x + y)), out)
    small = (x < SMALL_X) & (y < SMALL_X)
    if np.any(small):
        out = np.where(small, _k_series(alpha, np.where(small, x, 0.5), np.where(small, y, 0.5)), out)
    return out.item() if np.ndim(out) == 0 else out


def bessel_kernel_matrix(alpha, nodes):
    """Kernel matrix on distinct nodes, diagonal from the closed form."""
    x = np.asarray(nodes, dtype=float)
    r = np.sqrt(x)
    j = bessel_j(alpha, r)
    jm, jp = bessel_j(alpha - 1, r), bessel_j(alpha + 1, r)
    d = 0.5 * (jm - jp)
    num = np.outer(j, r * d) - np.outer(r * d, j)
    den = 2.0 * (x[:, None] - x[None, :])
    np.fill_diagonal(den, 1.0)
    kmat = num / den
    np.fill_diagonal(kmat, 0.25 * (j * j - jp * jm))
    small = np.flatnonzero(x < SMALL_X)
    if small.size:
        xs = x[small]
        kmat[np.ix_(small, small)] = _k_series(alpha, xs[:, None], xs[None, :])
    return kmat


GRADE_POINTS = 10


def edge_layout(alpha, m):
    """Quadrature layout in u for the hard-edge map x = s u^beta.

    K(x, y) = (xy)^{alpha/2} A(x, y) with A entire.  When 2 alpha is an integer
    the sqrt map (beta = 2) makes the symmetrized kernel smooth in u and a
    single m-point panel is spectrally accurate.  Otherwise the leftover
    u^gamma behaviour is resolved by geometric panels towards u = 0:
    alpha > 0 keeps beta = 2 (gamma = 2 alpha + 1); alpha < 0 takes
    beta = 1/(alpha + 1), which removes the x^alpha factor and leaves
    gamma = beta.

    Returns (beta_num, beta_den, panels) with beta = beta_num / beta_den and
    panels a list of (lo, hi, npts) where lo, hi are (numerator, denominator)
    pairs in powers of 5, so both precision paths build identical rules.
    """
    if float(2 * alpha).is_integer():
        return 2.0, 1.0, [((0, 1), (1, 1), int(m))]
    if alpha > 0:
        beta_num, beta_den = 2.0, 1.0
        decay = 2 * alpha + 2
    else:
        beta_num, beta_den = 1.0, alpha + 1.0
        # the weight u^{beta-1} must also integrate to full accuracy
        decay = beta_num / beta_den
    levels = int(math.ceil(34.0 / (decay * math.log(5.0))))
    beta = beta_num / beta_den
    panels = [((0, 1), (1, 5 ** levels), GRADE_POINTS)]
    for j in range(levels, 1, -1):
        # GL on a ratio-5 panel converges like rho^(-2n), rho = 1.5 + sqrt(1.25);
        # size n so the error stays below 1e-17 of the panel's mass
        mass = 5.0 ** (-(j - 1) * decay)
        n = math.ceil(math.log(max(mass * 1e17, 1.0)) / (2.0 * math.log(1.5 + math.sqrt(1.25))))
        panels.append(((1, 5 ** j), (1, 5 ** (j - 1)), min(24, max(GRADE_POINTS, n))))
    # oscillations sit near u = 1 and are squeezed by the map when beta > 2
    panels.append(((1, 5), (1, 1), int(math.ceil(m * max(1.0, beta / 2.0)))))
    return beta_num, beta_den, panels


def hard_edge_rule(alpha, s, m):
    """Gauss-Legendre rule on (0, s) clustered at the hard edge (see edge_layout)."""
    bn, bd, panels = edge_layout(alpha, m)
    if bd == 1.0 and bn == 2.0 and len(panels) == 1:
        return quad.map_rule(quad.gauss_legendre(m), 0.0, s, "sqrt")
    beta = bn / bd
    us, ws = [], []
    for (ln, ld), (hn, hd), n in panels:
        lo, hi = ln / ld, hn / hd
        base = quad.gauss_legendre(n)
        us.append(lo + (hi - lo) * (base.nodes + 1.0) / 2.0)
        ws.append(base.weights * (hi - lo) / 2.0)
    u, wu = np.concatenate(us), np.concatenate(ws)
    # no renormalization: a uniform weight error is amplified by 1/(1 - mu_0)
    return quad.QuadRule(s * u ** beta, beta * s * u ** (beta - 1.0) * wu, (0.0, s))


def bessel_trace(alpha, s, m=None):
    """Tr K_Bes on (0, s) = int_0^s K(x, x) dx."""
    rule = hard_edge_rule(alpha, s, m or default_nodes(s))
    return float(quad.integrate(lambda x: k_bessel_diag(alpha, x), rule))


def _extended_bits(s):
    # 1 - mu_0 ~ exp(-2 sqrt(s)): carry that many extra bits plus a margin
    return 53 + int(math.ceil(2.0 * math.sqrt(s) / math.log(2.0))) + 40


def _bessel_logdet_arb(alpha, s, m, prec):
    """Nystrom log-determinant with nodes, kernel and LU all in Arb ball arithmetic."""
    from flint import arb, arb_mat, ctx

    old = ctx.prec
    ctx.prec = prec
    try:
        a = arb(alpha)
        sa = arb(s)
        bn, bd, panels = edge_layout(alpha, m)
        b = arb(2) if bd == 1.0 else arb(1) / (a + 1)
        u, w = [], []
        for (ln, ld), (hn, hd), n in panels:
            lo, hi = arb(ln) / ld, arb(hn) / hd
            for i in range(n):
                xi, wi = arb.legendre_p_root(n, i, weight=True)
                u.append(lo + (hi - lo) * (xi + 1) / 2)
                w.append(wi * (hi - lo) / 2)
        x = [sa * ui ** b for ui in u]
        wx = [b * sa * ui ** (b - 1) * wi for ui, wi in zip(u, w)]
        m = len(u)
        r = [xi.sqrt() for xi in x]
        sw = [wi.sqrt() for wi in wx]
        j = [ri.bessel_j(a) for ri in r]
        jm = [ri.bessel_j(a - 1) for ri in r]
        jp = [ri.bessel_j(a + 1) for ri in r]
        rd = [ri * (p - q) / 2 for ri, p, q in zip(r, jm, jp)]
        rows = []
        for i in range(m):
            row = []
            for k in range(m):
                if i == k:
                    kv = (j[i] * j[i] - jp[i] * jm[i]) / 4
                    row.append(1 - sw[i] * kv * sw[i])
                else:
                    kv = (j[i] * rd[k] - rd[i] * j[k]) / (2 * (x[i] - x[k]))
                    row.append(-sw[i] * kv * sw[k])
            rows.append(row)
        det = arb_mat(rows).det()
        if det < 0:
            raise quad.NegativeDeterminantError("det(I - K) < 0: rule too coarse")
        if not det > 0:
            # ball straddles 0: the closed form cancels at tiny x, so ask for more bits
            return float(det.mid()), math.inf
        val = det.log()
        return float(val.mid()), float(val.rad())
    finally:
        ctx.prec = old


def gap_log_det(params, m=None, precision="auto"):
    """F(s) = ln det(I - K_Bes) on (0, s) by Gauss-Legendre Nystrom clustered at 0
    (the sqrt map when 2 alpha is an integer, see edge_layout).

    precision: "double", "extended" or "auto".  The double-precision matrix
    loses about exp(2 sqrt(s)) * 1e-16 absolute accuracy, so "auto" switches to
    Arb ball arithmetic (python-flint) for s > 36.
    """
    if not isinstance(params, HardEdgeParams):
        raise TypeError("gap_log_det expects HardEdgeParams")
    if params.lam != 0:
        raise ValueError("gap_log_det covers lambda = 0 only; use gap_log_det_psi")
    m = int(m or default_nodes(params.s))
    if precision == "auto":
        precision = "double" if params.s <= DOUBLE_S_MAX else "extended"
    if precision == "double":
        rule = hard_edge_rule(params.alpha, params.s, m)
        return quad.logdet_i_minus(bessel_kernel_matrix(params.alpha, rule.nodes), rule.weights)
    if precision != "extended":
        raise ValueError(f"unknown precision {precision!r}")
    prec = _extended_bits(params.s)
    rad = math.inf
    for _ in range(5):
        val, rad = _bessel_logdet_arb(params.alpha, params.s, m, prec)
        if rad < 1e-15 * max(1.0, abs(val)):
            return val
        prec *= 2
    raise ArithmeticError(f"extended determinant did not certify (radius {rad:.3g})")


# --- Psi-sampled kernel -------------------------------------------------------


@dataclass
class PsiSamples:
    """Boundary values psi_1, psi_2 on a grid of [-s, 0] (complex arrays).

    side records from which side of the negative axis the values were taken;
    only "minus" is accepted by the kernel assembly.
    """

    grid: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray
    alpha: float
    lam: float
    side: str = "minus"

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.psi1 = np.asarray(self.psi1, dtype=complex)
        self.psi2 = np.asarray(self.psi2, dtype=complex)
        n = self.grid.size
        if self.grid.ndim != 1 or n < 2:
            raise ValueError("PsiSamples: need at least two grid points")
        if self.psi1.shape != (n,) or self.psi2.shape != (n,):
            raise ValueError("PsiSamples: psi arrays must match the grid length")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("PsiSamples: grid must be strictly increasing")
        if self.grid[-1] > 0:
            raise ValueError("PsiSamples: grid must lie in (-inf, 0]")
        if self.side not in ("minus", "plus"):
            raise ValueError(f"PsiSamples: side must be 'minus' or 'plus', got {self.side!r}")
        self._w = _bary_weights(self.grid)

    def evaluate(self, x):
        """psi_1, psi_2 and their x-derivatives at points x inside the grid hull."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lo, hi = self.grid[0], self.grid[-1]
        tol = 1e-14 * max(1.0, abs(lo))
        if np.any(x < lo - tol) or np.any(x > hi + tol):
            raise ValueError("PsiSamples: evaluation point outside the sample grid")
        f = np.stack([self.psi1, self.psi2], axis=1)
        val, der = _bary_eval(self.grid, self._w, f, x)
        return val[:, 0], val[:, 1], der[:, 0], der[:, 1]


def _bary_weights(x):
    # w_j = 1 / prod_{k != j} (x_j - x_k), scaled in log space
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    logw = -np.sum(np.log(np.abs(diff)), axis=1)
    sign = np.prod(np.sign(diff), axis=1)
    return sign * np.exp(logw - logw.max())


def _bary_eval(x, w, f, t):
    """Barycentric interpolant and derivative of columns f at points t."""
    val = np.empty((t.size, f.shape[1]), dtype=f.dtype)
    der = np.empty_like(val)
    for i, ti in enumerate(t):
        d = ti - x
        hit = np.flatnonzero(d == 0)
        if hit.size:
            j = hit[0]
            dd = x[j] - x
            dd[j] = 1.0
            row = (w / w[j]) / dd
            row[j] = 0.0
            row[j] = -row.sum()
            val[i] = f[j]
            der[i] = row @ f
            continue
        c = w / d
        p = (c @ f) / c.sum()
        val[i] = p
        der[i] = ((c / d) @ (p[None, :] - f)) / c.sum()
    return val, der


def psi_samples_lambda0(alpha, s, n=64):
    """Boundary values of the lambda = 0 model problem on Chebyshev-Lobatto points of [-s, 0].

    With r = sqrt|x|: psi_1 = sqrt(pi) e^{-i alpha pi/2} J_a(r) and
    psi_2 = sqrt(pi) e^{-i alpha pi/2} i r J_a'(r), taken from the minus side.
    psi_2 is fixed only up to adding a multiple of psi_1, which leaves the
    kernel unchanged.  Both carry a |x|^{alpha/2} factor, so the samples are
    analytic at x = 0 (and the interpolated kernel spectrally accurate) only
    for even integer alpha.
    """
    if not alpha > -1 or not s > 0:
        raise ValueError("need alpha > -1 and s > 0")
    j = np.arange(n)
    grid = -0.5 * s * (1.0 + np.cos(np.pi * j / (n - 1)))
    grid[0], grid[-1] = -s, 0.0
    r = np.sqrt(-grid)
    ph = math.sqrt(math.pi) * np.exp(-0.5j * alpha * math.pi)
    jr = np.asarray(bessel_j(alpha, r), dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        djr = 0.5 * (np.asarray(bessel_j(alpha - 1, r)) - np.asarray(bessel_j(alpha + 1, r)))
        rdj = r * djr
    if alpha >= 0:
        rdj = np.where(r == 0, 0.0, rdj)
    return PsiSamples(grid, ph * jr, ph * 1j * rdj, alpha, 0.0, "minus")


def _psi_kernel_matrix(samples, u, v):
    p1u, p2u, d1u, d2u = samples.evaluate(u)
    p1v, p2v, _, _ = samples.evaluate(v)
    ph = np.exp(1j * math.pi * samples.alpha) / (2j * math.pi)
    num = np.outer(p2u, p1v) - np.outer(p1u, p2v)  # [i, j] = psi1(v_j) psi2(u_i) - psi1(u_i) psi2(v_j)
    den = u[:, None] - v[None, :]
    same = den == 0
    den = np.where(same, 1.0, den)
    kmat = ph * num / den
    if np.any(same):
        diag = ph * (p1u * d2u - d1u * p2u)
        ii, jj = np.nonzero(same)
        kmat[ii, jj] = diag[ii]
    return kmat


def _check_real(kmat, tol=1e-8):
    scale = np.maximum(1.0, np.abs(kmat.real))
    bad = np.abs(kmat.imag) > tol * scale
    if np.any(bad):
        raise ValueError(f"k_piii_from_psi: kernel not real (|Im| up to {np.abs(kmat.imag).max():.3g})")
    return kmat.real


def k_piii_from_psi(samples, u, v):
    """e^{a pi i}[psi1(v) psi2(u) - psi1(u) psi2(v)] / (2 pi i (u - v)) from sampled psi.

    On u = v the removable singularity is resolved with the interpolant's
    derivative: e^{a pi i}[psi1 psi2' - psi1' psi2](u) / (2 pi i).
    """
    if samples.side != "minus":
        raise ValueError("k_piii_from_psi: samples must be minus-side boundary values")
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    u, v = np.broadcast_arrays(u, v)
    out = np.empty(u.shape)
    flat_u, flat_v = u.ravel(), v.ravel()
    vals = np.empty(flat_u.size)
    for i, (a, b) in enumerate(zip(flat_u, flat_v)):
        vals[i] = _check_real(_psi_kernel_matrix(samples, np.array([a]), np.array([b])))[0, 0]
    out[...] = vals.reshape(u.shape)
    return out.item() if out.size == 1 and np.ndim(out) <= 1 else out


def gap_log_det_psi(params, samples, m=None):
    """ln det(I - K_PIII) on (-s, 0) from sampled psi (Nystrom, nodes clustered at 0)."""
    if samples.side != "minus":
        raise ValueError("gap_log_det_psi: samples must be minus-side boundary values")
    if abs(samples.alpha - params.alpha) > 1e-14 or abs(samples.lam - params.lam) > 1e-14:
        raise ValueError("gap_log_det_psi: samples were produced for different (alpha, lambda)")
    if samples.grid[0] > -params.s * (1 - 1e-14) or samples.grid[-1] < 0:
        raise ValueError("gap_log_det_psi: samples must cover [-s, 0]")
    m = int(m or default_nodes(params.s))
    rule = quad.map_rule(quad.gauss_legendre(m), 0.0, params.s, "sqrt")
    x = -rule.nodes[::-1]
    w = rule.weights[::-1]
    kmat = _check_real(_psi_kernel_matrix(samples, x, x))
    return quad.logdet_i_minus(0.5 * (kmat + kmat.T), w)


# --- CSV ------------------------------------------------------------------------

PSI_COLUMNS = ["x", "psi1_re", "psi1_im", "psi2_re", "psi2_im"]


def read_psi_csv(path):
    """Read PsiSamples from CSV.

    Leading '# key: value' lines carry metadata; 'side', 'alpha' and 'lambda'
    are required and side must be 'minus'.
    """
    meta = {}
    rows = []
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            key, sep, val = line[1:].partition(":")
            if sep:
                meta[key.strip().lower()] = val.strip()
        elif line.strip():
            body.append(line)
    for key in ("side", "alpha", "lambda"):
        if key not in meta:
            raise ValueError(f"psi CSV: missing '# {key}: ...' metadata line")
    if meta["side"] != "minus":
        raise ValueError(f"psi CSV: side '{meta['side']}' not supported (need 'minus')")
    reader = csv.reader(body)
    header = [h.strip() for h in next(reader)]
    if header != PSI_COLUMNS:
        raise ValueError(f"psi CSV: header must be {','.join(PSI_COLUMNS)}")
    for row in reader:
        rows.append([float(v) for v in row])
    a = np.array(rows, dtype=float)
    if a.ndim != 2 or a.shape[1] != 5:
        raise ValueError("psi CSV: malformed rows")
    return PsiSamples(a[:, 0], a[:, 1] + 1j * a[:, 2], a[:, 3] + 1j * a[:, 4],
                      float(meta["alpha"]), float(meta["lambda"]), meta["side"])


def write_psi_csv(samples, path):
    with open(path, "w", newline="") as fh:
        fh.write(f"# side: {samples.side}\n# alpha: {samples.alpha!r}\n# lambda: {samples.lam!r}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PSI_COLUMNS)
        for x, p, q in zip(samples.grid, samples.psi1, samples.psi2):
            w.writerow([f"{v:.17g}" for v in (x, p.real, p.imag, q.real, q.imag)])
