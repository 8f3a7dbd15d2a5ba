from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardedge import kernels as kn
from hardedge import painleve as pv
from hardedge import rh_asymptotics as rh
from hardedge.specfun import PoleError

ALPHAS = (-0.5, 0.0, 0.5, 1.3)


def test_solve_cj_exact():
    assert rh.solve_cj(1) == [1]
    assert rh.solve_cj(2) == [Fraction(-1, 2), 1]
    assert rh.solve_cj(3) == [Fraction(3, 8), Fraction(-1, 2), 1]
    for k in range(1, 9):
        c = rh.solve_cj(k)
        assert all(isinstance(v, Fraction) for v in c) and c[-1] == 1
        assert all(r == 0 for r in rh.cj_plugback(k))
    # a wrong vector is detected
    assert any(r != 0 for r in rh.cj_plugback(3, [Fraction(1, 2), Fraction(-1, 2), 1]))
    with pytest.raises(ValueError):
        rh.solve_cj(0)


def test_eta_constants():
    e1 = rh.eta_constants(1, 1.0, 1.0)
    assert (e1.eta0, e1.eta1) == (1, 1)
    assert e1.g1 == 1.5
    e2 = rh.eta_constants(2)
    assert (e2.eta0, e2.eta1) == (Fraction(3, 2), Fraction(5, 2))
    assert math.isnan(e2.g1)
    e = rh.eta_constants(2, 2.0, 4.0)
    assert abs(e.g1 - (0.5 + 4.0 / 32.0 * 0.5)) < 1e-15
    assert abs(e.g1hat - (1.0 + 0.5 / 32.0)) < 1e-15


def test_gfunspec_validation():
    with pytest.raises(ValueError):
        rh.GFunSpec(0, 1.0, 1.0)
    with pytest.raises(ValueError):
        rh.GFunSpec(1, 0.0, 1.0)
    with pytest.raises(ValueError):
        rh.GFunSpec(1, 1.0, 1.0, "h")
    with pytest.raises(ValueError):
        rh.GFunSpec(2, 1.0, 1.0, c=(1, 1))
    assert rh.GFunSpec(2, 1.0, 1.0, c=(Fraction(-1, 2), 1)).c[0] == Fraction(-1, 2)


def test_g_antisymmetry_and_cut():
    spec = rh.GFunSpec(1, 1.0, 1.0)
    p, m = rh.boundary_values(lambda z: rh.g_eval(spec, z), -2.0, 1j)
    assert abs(p + m) < 1e-12
    with pytest.raises(rh.CutError):
        rh.g_eval(spec, -2.0)
    with pytest.raises(PoleError):
        rh.g_eval(spec, 0.0)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_g_pole_term(k):
    # only the leading pole survives: subtracting it leaves a bounded function
    lam, s = 0.8, 1.3
    spec = rh.GFunSpec(k, lam, s)
    vals = []
    for z in (1e-2, 1e-3, 1e-4, 1e-3j, -1e-3 + 1e-3j):
        lead = (-1) ** (k + 1) * lam ** k / (s ** (k + 0.5) * z ** k)
        vals.append(abs(rh.g_eval(spec, z) - lead))
    assert max(vals) < 3.0


@pytest.mark.parametrize("variant", ["g", "ghat"])
def test_g_large_z_tail(variant):
    spec = rh.GFunSpec(2, 0.8, 1.3, variant)
    lead = 1.0 if variant == "g" else spec.lam
    tails = [abs(rh.g_eval(spec, z) - lead * math.sqrt(z) - spec.g1() / math.sqrt(z)) * z ** 1.5
             for z in 10.0 ** np.arange(2, 6)]
    assert max(tails) < 2 * min(tails) + 1e-3


def test_rho():
    assert rh.rho(-1.0 + 1e-14j, 0.7) == pytest.approx(1.0, abs=1e-6)
    for z in (0.5j, -3 + 1j, -0.4 - 2j):
        assert rh.rho(z, 0.0) == 1.0
    ratios = []
    for d in (1e-2, 1e-3, 1e-4):
        z = -1 + d * np.exp(0.5j)
        ratios.append(abs(rh.rho(z, 1.0) - rh.rho_series(z, 1.0)) / d ** 1.5)
    assert max(ratios) < 1.0
    for bad in (-2.0, 0.0, 3.0):
        with pytest.raises(rh.CutError):
            rh.rho(bad, 0.5)


def test_outer_n():
    p, m = rh.boundary_values(lambda z: rh.outer_N(z, 0.5), -0.5, 1j)
    assert rh.jump_residual(p, m, rh.n_jump(0.5, -0.5)) < 1e-11
    p, m = rh.boundary_values(lambda z: rh.outer_N(z, 0.5), -2.0, 1j)
    assert rh.jump_residual(p, m, rh.n_jump(0.5, -2.0)) < 1e-11
    rng = np.random.default_rng(0)
    for z in rng.uniform(-4, 4, 30) + 1j * rng.uniform(0.1, 4, 30) * rng.choice([-1, 1], 30):
        for a in ALPHAS:
            assert abs(np.linalg.det(rh.outer_N(z, a)) - 1) < 1e-10
    with pytest.raises(rh.CutError):
        rh.outer_N(-0.5, 0.5)
    with pytest.raises(ValueError):
        rh.n_jump(0.5, 0.5)


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(-0.9, 3.0), r=st.floats(0.05, 8.0),
       contour=st.sampled_from(["Sigma1", "Sigma2", "Sigma3"]))
def test_bessel_parametrix_jump_property(alpha, r, contour):
    x, normal = rh.bessel_contour_point(contour, r)
    p, m = rh.boundary_values(lambda z: rh.bessel_parametrix(z, alpha), x, normal)
    assert rh.jump_residual(p, m, rh.bessel_jump(alpha, contour)) < 1e-9


def test_bessel_parametrix_examples():
    p, m = rh.boundary_values(lambda z: rh.bessel_parametrix(z, 0.0), -3.0, 1j)
    assert rh.jump_residual(p, m, rh.bessel_jump(0.0, "Sigma2")) < 1e-9
    for a in ALPHAS:
        for z in (0.3, 2 + 5j, -4 + 1j, -4 - 1j, 6j):
            assert abs(np.linalg.det(rh.bessel_parametrix(z, a)) - 1) < 1e-10
    with pytest.raises(rh.CutError):
        rh.bessel_parametrix(rh.SectorPoint(1.0, "Omega2"), 0.0)
    with pytest.raises(rh.CutError):
        rh.SectorPoint(-1 + 1j, "Omega1")
    with pytest.raises(rh.CutError):
        rh.bessel_parametrix(rh.SectorPoint(1j, "upper"), 0.0)
    with pytest.raises(PoleError):
        rh.SectorPoint(0.0)


@pytest.mark.parametrize("alpha", [0.0, 1.0, 2.3])
def test_bessel_parametrix_large_zeta(alpha):
    errs = []
    for zeta in (400.0, 1600.0):
        for ph in (1.0, np.exp(2j)):
            z = zeta * ph
            e = np.exp(2 * np.sqrt(z))
            got = rh.bessel_parametrix(z, alpha) @ np.diag([1 / e, e])
            ref = rh.bessel_parametrix_asymptotic(z, alpha)
            errs.append(np.max(np.abs(got - ref)) / np.max(np.abs(ref)))
    # O(1/zeta): quadrupling zeta divides the error by about 4
    assert errs[0] < 1e-2 and 3 < errs[0] / errs[2] < 5


def test_j1_and_r1_structure():
    spec = rh.GFunSpec(2, 0.7, 5.0)
    for z in (-1 + 0.1j, -0.9 - 0.05j, 0.5 + 2j):
        j = rh.j1(z, spec, 0.3)
        assert abs(np.trace(j)) < 1e-15 * np.max(np.abs(j))
    out = rh.r1(1.0 + 1j, spec, 0.3)
    assert out[0, 1] != 0 and out[0, 0] == out[1, 0] == out[1, 1] == 0
    with pytest.raises(ValueError):
        rh.j1(0.5j, rh.GFunSpec(1, 1.0, 2.0, "ghat"), 0.3)
    with pytest.raises(PoleError):
        rh.r1(-1.0, spec, 0.3)


def test_r1_inside_matches_cauchy_integral():
    spec = rh.GFunSpec(1, 0.6, 6.0)
    for z in (-1 + 0.1j, -1.05 - 0.02j, -0.5 + 0.5j, 2.0 + 0j):
        assert np.max(np.abs(rh.r1(z, spec, 0.5) - rh.r1_cauchy(z, spec, 0.5))) < 1e-10


def test_r1_21_constant_and_e_tilde():
    for k, lam, s in ((1, 1.0, 8.0), (2, 0.5, 4.0), (3, 1.2, 10.0)):
        spec = rh.GFunSpec(k, lam, s)
        for a in ALPHAS:
            c0, _ = rh.r1_21_expansion(spec, a)
            v = lambda t: rh.r1(-1.0 + t * np.exp(0.7j), spec, a)[1, 0]
            assert abs(2 * v(1e-5) - v(2e-5) - c0) / abs(c0) < 1e-8
            assert np.max(np.abs(rh.e_tilde_limit(spec, a) - rh.e_tilde_at_minus1(spec, a))) < 1e-8


def test_fs_asy_forms():
    for a in (0.0, 0.5, 1.0):
        f = rh.fs_asy(a, 100.0)
        assert f.first == pytest.approx(-0.25 + a / 20 - a * a / 400, abs=1e-15)
        assert abs(f.difference) < 1e-15
    assert rh.fs_asy(0.0, 50.0).first == pytest.approx(-0.25, abs=1e-16)
    f = rh.fs_asy(0.5, 100.0, 1.0, 1)
    assert f.difference != 0 and abs(f.difference) < 1e-2
    with pytest.raises(ValueError):
        rh.fs_asy(0.0, 0.0)


@pytest.mark.parametrize("alpha", [0.0, 1.0])
def test_fs_asy_against_fredholm_derivative(alpha):
    h = 0.5
    for s, tol in ((100.0, 5e-3), (400.0, 2e-3)):
        F = lambda x: kn.gap_log_det(kn.HardEdgeParams(alpha, x))
        d = (F(s - 2 * h) - 8 * F(s - h) + 8 * F(s + h) - F(s + 2 * h)) / (12 * h)
        assert abs(d - rh.fs_asy(alpha, s).second) < tol


def test_flambda_asy():
    for a in (-0.7, 0.0, 0.3, 1.0, 2.5):
        for lam in (1e-3, 0.1, 2.0):
            assert abs(rh.flambda_asy(a, lam, pv.r_small(a, lam))) < 1e-13 / lam
    assert rh.flambda_asy(0.0, 0.5, 0.125) == 0.0
    assert rh.flambda_asy(0.0, 0.5, 0.2) == pytest.approx(0.075, rel=1e-14)
    with pytest.raises(ValueError):
        rh.flambda_asy(0.0, 0.0, 0.1)


def test_f_asy_total():
    for a in (0.0, 0.5, 1.0, 2.0):
        for s in (10.0, 100.0):
            assert rh.f_asy_total(a, s, 0.0) == pytest.approx(pv.asy_log_det_bessel(a, s), abs=1e-13)
    assert rh.f_asy_total(0.0, 100.0, 0.0) == -25.0
    assert rh.f_asy_total(0.5, 100.0, 0.3, 0.1) == pytest.approx(rh.f_asy_total(0.5, 100.0, 0.0) + 0.1)
    with pytest.raises(ValueError):
        rh.f_asy_total(0.0, 100.0, 0.0, 1.0)
    # O(s^{-1/2}) remainder against the Fredholm value
    scaled = [abs(kn.gap_log_det(kn.HardEdgeParams(1.0, s)) - rh.f_asy_total(1.0, s, 0.0)) * math.sqrt(s)
              for s in (100.0, 200.0, 400.0)]
    assert max(scaled) < 0.2 and max(scaled) / min(scaled) < 1.1


@pytest.mark.parametrize("alpha,k", [(0.5, 1), (0.0, 1), (1.3, 2), (-0.5, 1)])
def test_f_local_jump(alpha, k):
    lam, s = 1.0, 1.0
    x = -2 * lam * lam * s
    p, m = rh.boundary_values(lambda z: rh.f_local(z, lam, s, alpha, k), x, 1j)
    w = abs(x) ** alpha * math.exp(2 * (-1) ** (k + 1) * lam ** (2 * k) / x ** k)
    assert abs(p - m - w) < 1e-8 * max(1.0, w)


def test_f_local_endpoint_log():
    lam, s, a = 1.0, 1.0, 0.5
    c = -lam * lam * s
    vals = []
    for d in (1e-2, 1e-4, 1e-6):
        z = c + d * np.exp(1j)
        vals.append(abs(rh.f_local(z, lam, s, a)
                        - (lam * lam * s) ** a * math.exp(-2 / s) / (2j * math.pi) * np.log(z - c)))
    assert max(vals) < 1.0 and abs(vals[-1] - vals[-2]) < 1e-3


def test_f_local_errors():
    with pytest.raises(rh.CutError):
        rh.f_local(-3.0, 1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        rh.f_local(1.0, 1.0, 1.0, -1.0)


@pytest.mark.parametrize("alpha", [0.5, 1.3, 0.0, 1.0])
def test_h_entire(alpha):
    for x in (-0.1, -1.0, -3.7):
        p, m = rh.boundary_values(lambda z: rh.h_local(z, alpha), x, 1j)
        assert abs(p - m) / max(1.0, abs(p)) < 1e-9
    with pytest.raises(PoleError):
        rh.h_local(0.0, alpha)


def test_sector_of():
    assert rh.sector_of(1.0) == "Omega1"
    assert rh.sector_of(-1 + 0.1j) == "Omega2"
    assert rh.sector_of(-1 - 0.1j) == "Omega3"
