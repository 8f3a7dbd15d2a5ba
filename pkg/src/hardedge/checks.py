"""Registry of jump, identity and residual checks behind ``hardedge verify``.

Each check draws its sample points from the generator it is handed, so a
fixed seed gives a byte-identical report.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import coupled_p3 as cp
from . import kernels, painleve
from . import rh_asymptotics as rh

ALPHAS = (-0.5, 0.0, 0.5, 1.3)
N_POINTS = 20


@dataclass(frozen=True)
class CheckResult:
    check_name: str
    points: int
    max_residual: float
    tolerance: float

    @property
    def passed(self):
        return bool(np.isfinite(self.max_residual) and self.max_residual < self.tolerance)

    def to_dict(self):
        d = asdict(self)
        if not math.isfinite(d["max_residual"]):
            d["max_residual"] = None  # JSON has no NaN
        d["pass"] = self.passed
        return d


@dataclass(frozen=True)
class Check:
    name: str
    tolerance: float
    run: Callable  # rng -> (points, max_residual)

    def __call__(self, rng):
        pts, res = self.run(rng)
        return CheckResult(self.name, int(pts), float(res), self.tolerance)


def _n_jump_on(lo, hi):
    def run(rng):
        worst, n = 0.0, 0
        for alpha in ALPHAS:
            for x in rng.uniform(lo, hi, N_POINTS):
                p, m = rh.boundary_values(lambda z: rh.outer_N(z, alpha), x, 1j)
                worst = max(worst, rh.jump_residual(p, m, rh.n_jump(alpha, x)))
                n += 1
        return n, worst
    return run


def _n_det(rng):
    z = rng.uniform(-4, 4, N_POINTS) + 1j * rng.uniform(-4, 4, N_POINTS)
    worst = 0.0
    for alpha in ALPHAS:
        for zi in z:
            if zi.real <= 0 and abs(zi.imag) < 1e-3:
                zi += 0.5j
            worst = max(worst, abs(np.linalg.det(rh.outer_N(zi, alpha)) - 1.0))
    return len(ALPHAS) * z.size, worst


def _bessel_jumps(rng):
    worst, n = 0.0, 0
    for alpha in ALPHAS:
        for contour in ("Sigma1", "Sigma2", "Sigma3"):
            for r in rng.uniform(0.1, 6.0, N_POINTS):
                x, normal = rh.bessel_contour_point(contour, r)
                p, m = rh.boundary_values(lambda z: rh.bessel_parametrix(z, alpha), x, normal)
                worst = max(worst, rh.jump_residual(p, m, rh.bessel_jump(alpha, contour)))
                n += 1
    return n, worst


def _bessel_det(rng):
    r = rng.uniform(0.05, 8.0, N_POINTS)
    th = rng.uniform(-math.pi, math.pi, N_POINTS)
    worst = 0.0
    for alpha in ALPHAS:
        for zi in r * np.exp(1j * th):
            if abs(abs(np.angle(zi)) - 2 * math.pi / 3) < 1e-6 or abs(zi.imag) < 1e-9:
                zi *= np.exp(0.01j)
            worst = max(worst, abs(np.linalg.det(rh.bessel_parametrix(zi, alpha)) - 1.0))
    return len(ALPHAS) * r.size, worst


def _f_jump(rng):
    worst, n = 0.0, 0
    for alpha in ALPHAS:
        lam = 1.0
        s = float(rng.uniform(0.5, 2.0))
        c = -lam * lam * s
        for x in c * rng.uniform(1.05, 4.0, N_POINTS):
            p, m = rh.boundary_values(lambda z: rh.f_local(z, lam, s, alpha), x, 1j)
            w = abs(x) ** alpha * math.exp(2 * lam ** 2 / x)
            worst = max(worst, abs(p - m - w) / w)
            n += 1
    return n, worst


def _h_entire(rng):
    worst, n = 0.0, 0
    for alpha in (0.5, 1.3, 0.0, 1.0):
        for x in -rng.uniform(0.05, 6.0, N_POINTS):
            p, m = rh.boundary_values(lambda z: rh.h_local(z, alpha), x, 1j)
            worst = max(worst, abs(p - m) / max(1.0, abs(p)))
            n += 1
    return n, worst


def _spec_samples(rng, count=5):
    out = []
    for _ in range(count):
        k = int(rng.integers(1, 4))
        lam = float(rng.uniform(0.2, 1.5))
        s = float(rng.uniform(4.0, 20.0))
        out.append(rh.GFunSpec(k, lam, s))
    return out


def _e_tilde(rng):
    worst, n = 0.0, 0
    for spec in _spec_samples(rng):
        for alpha in ALPHAS:
            lim = rh.e_tilde_limit(spec, alpha)
            ref = rh.e_tilde_at_minus1(spec, alpha)
            worst = max(worst, float(np.max(np.abs(lim - ref))))
            n += 1
    return n, worst


def _r1_21(rng):
    worst, n = 0.0, 0
    d = 1e-5
    for spec in _spec_samples(rng):
        for alpha in ALPHAS:
            c0, c1 = rh.r1_21_expansion(spec, alpha)
            v = lambda t: rh.r1(-1.0 + t * np.exp(0.7j), spec, alpha)[1, 0]
            # Richardson removes the (z+1) term
            lim = 2 * v(d) - v(2 * d)
            worst = max(worst, abs(lim - c0) / abs(c0))
            n += 1
    return n, worst


def _r1_cauchy(rng):
    worst, n = 0.0, 0
    for spec in _spec_samples(rng, 2):
        for alpha in ALPHAS:
            for _ in range(5):
                rad = rng.choice([rng.uniform(0.05, 0.2), rng.uniform(0.3, 1.0)])
                z = -1.0 + rad * np.exp(1j * rng.uniform(0.1, 3.0))
                diff = rh.r1(z, spec, alpha) - rh.r1_cauchy(z, spec, alpha)
                worst = max(worst, float(np.max(np.abs(diff))))
                n += 1
    return n, worst


def _g1(rng):
    worst, n = 0.0, 0
    for spec in _spec_samples(rng):
        for variant in ("g", "ghat"):
            sp = rh.GFunSpec(spec.k, spec.lam, spec.s, variant)
            lead = 1.0 if variant == "g" else sp.lam
            v = lambda z: math.sqrt(z) * (rh.g_eval(sp, z).real - lead * math.sqrt(z))
            z = 1e4
            # remainder is a series in 1/z: two Richardson steps
            est = (8 * v(4 * z) - 6 * v(2 * z) + v(z)) / 3
            worst = max(worst, abs(est - sp.g1()))
            n += 1
    return n, worst


def _g_antisym(rng):
    worst, n = 0.0, 0
    for spec in _spec_samples(rng):
        for x in -rng.uniform(1.05, 6.0, 4):
            p, m = rh.boundary_values(lambda z: rh.g_eval(spec, z), x, 1j)
            worst = max(worst, abs(p + m))
            n += 1
    return n, worst


def _cj_plugback(rng):
    bad = 0
    for k in range(1, 9):
        bad += sum(1 for r in rh.cj_plugback(k) if r != 0)
    return 8, float(bad)


def _tw_vs_fredholm(rng):
    worst, n = 0.0, 0
    for alpha in (0.0, 0.5, 1.0, 2.0):
        tr = painleve.integrate_q(alpha, 12.0)
        for s in rng.uniform(0.5, 12.0, 3):
            fh = kernels.gap_log_det(kernels.HardEdgeParams(alpha, float(s)))
            tw = painleve.tw_log_det(alpha, float(s), trajectory=tr)
            worst = max(worst, abs(fh - tw))
            n += 1
    return n, worst


def _hamiltonian(rng):
    worst, n = 0.0, 0
    h = 1e-4
    for alpha in (0.0, 0.5, 1.0):
        tr = painleve.integrate_q(alpha, 21.0)
        f = lambda t: -t * painleve.hamiltonian_along(tr, t)
        for t in rng.uniform(0.1, 20.0, N_POINTS):
            d = (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h)
            worst = max(worst, abs(d - tr.q(t) ** 2 / 4))
            n += 1
    return n, worst


def _coupled_pipeline(rng):
    lam = np.linspace(1.0, 1.5, 201)
    worst, n = 0.0, 0
    for alpha in (0.0, 0.7):
        states = cp.k1_pipeline_states(alpha, lam)
        res = max(float(np.max(np.abs(cp.coupled_residual(st)))) for st in states)
        dets = max(abs(cp.det_a0(st)) for st in states)
        ang = rng.uniform(-math.pi, math.pi, 8)
        z = np.concatenate([r * np.exp(1j * ang) for r in (0.5, 1.0, 2.0, 5.0)])
        curv = cp.zero_curvature_residual(states, z).residual
        worst = max(worst, res, dets, curv)
        n += len(states)
    return n, worst


REGISTRY = {c.name: c for c in (
    Check("outer-n-jump-short-cut", 1e-9, _n_jump_on(-0.95, -0.05)),
    Check("outer-n-jump-long-cut", 1e-9, _n_jump_on(-8.0, -1.05)),
    Check("outer-n-det", 1e-10, _n_det),
    Check("bessel-parametrix-jumps", 1e-9, _bessel_jumps),
    Check("bessel-parametrix-det", 1e-10, _bessel_det),
    Check("f-local-jump", 1e-9, _f_jump),
    Check("h-entire", 1e-9, _h_entire),
    Check("e-tilde-at-minus1", 1e-8, _e_tilde),
    Check("r1-21-constant", 1e-8, _r1_21),
    Check("r1-cauchy", 1e-10, _r1_cauchy),
    Check("g1-coefficient", 1e-8, _g1),
    Check("g-antisymmetry", 1e-12, _g_antisym),
    Check("cj-plugback", 0.5, _cj_plugback),
    Check("tracy-widom-vs-fredholm", 1e-7, _tw_vs_fredholm),
    Check("hamiltonian-identity", 1e-5, _hamiltonian),
    Check("coupled-k1-pipeline", 1e-5, _coupled_pipeline),
)}


def run_checks(seed=0, only=None):
    """Run the registered checks (or the named subset) with a seeded generator per check."""
    names = list(REGISTRY) if not only else list(only)
    unknown = [n for n in names if n not in REGISTRY]
    if unknown:
        raise KeyError(f"unknown check(s): {', '.join(unknown)}")
    out = []
    for i, name in enumerate(REGISTRY):
        if name in names:
            # one stream per check: a subset run reproduces the full run's entries
            rng = np.random.default_rng([int(seed), i])
            out.append(REGISTRY[name](rng))
    return out
