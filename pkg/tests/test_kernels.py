from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardedge import kernels as kn
from hardedge import painleve as pv

P = kn.HardEdgeParams


def _k_mp(a, x, y):
    mpmath.mp.dps = 30
    rx, ry = mpmath.sqrt(x), mpmath.sqrt(y)
    dj = lambda r: mpmath.besselj(a, r, derivative=1)
    return float((mpmath.besselj(a, rx) * ry * dj(ry) - rx * dj(rx) * mpmath.besselj(a, ry)) / (2 * (x - y)))


def test_params_validation():
    for bad in [dict(alpha=-1.0, s=1), dict(alpha=0, s=0), dict(alpha=0, s=1, lam=-1), dict(alpha=0, s=1, k=0)]:
        with pytest.raises(ValueError):
            P(**bad)


def test_k_bessel_symmetry_and_oracle():
    assert abs(kn.k_bessel(0, 1, 2) - kn.k_bessel(0, 2, 1)) < 1e-14
    # frozen from a 30-digit mpmath evaluation of the defining formula
    assert abs(kn.k_bessel(0, 1.0, 4.0) - 0.13068228480805078976) < 1e-12
    assert abs(kn.k_bessel(0.5, 0.3, 2.5) - 0.074020085877949444812) < 1e-12


@settings(max_examples=40, deadline=None)
@given(a=st.floats(-0.9, 4.0), x=st.floats(0.05, 60.0), y=st.floats(0.05, 60.0))
def test_k_bessel_against_mpmath(a, x, y):
    if abs(x - y) < 1e-3 * max(x, y):
        return
    ref = _k_mp(a, x, y)
    assert abs(kn.k_bessel(a, x, y) - ref) < 1e-11 * max(1.0, abs(ref))


def test_diagonal_limit():
    d = kn.k_bessel_diag(0, 1.0)
    assert abs(d - 0.19479300438203077723) < 1e-14
    # one-sided approach is O(h); Richardson removes the linear term
    for j in range(3, 7):
        h = 10.0 ** -j
        lim = 2 * kn.k_bessel(0, 1.0, 1 + h) - kn.k_bessel(0, 1.0, 1 + 2 * h)
        assert abs(lim - d) < 1e-9 + 1e-2 * h * h
    h = 1e-5
    assert abs(0.5 * (kn.k_bessel(0, 1, 1 + h) + kn.k_bessel(0, 1, 1 - h)) - d) < 1e-8
    assert abs(kn.k_bessel_diag(1.3, 2.0) - 0.02388162813267261513) < 1e-14


def test_diagonal_edge():
    assert abs(kn.k_bessel_diag(0, 1e-14) - 0.25) < 1e-12
    assert kn.k_bessel_diag(0, 0.0) == 0.25
    assert abs(kn.k_bessel_diag(1, 1e-12)) < 1e-12
    with pytest.raises(ValueError):
        kn.k_bessel_diag(0, -1.0)
    with pytest.raises(ValueError):
        kn.k_bessel(0, 0.0, 1.0)


@settings(max_examples=40, deadline=None)
@given(a=st.floats(-0.95, 5.0), x=st.floats(1e-6, 200.0))
def test_diagonal_nonnegative(a, x):
    assert kn.k_bessel_diag(a, x) >= -1e-15


def test_small_s_trace_term():
    f = kn.gap_log_det(P(0.0, 0.01))
    assert abs(f - (-0.0025)) < 3e-6


def test_gap_against_mpmath_nystrom():
    # frozen 30-digit Nystrom values (independent assembly with mpmath Bessel functions)
    refs = {(1.0, 4.0): -0.17600645851704306538, (0.5, 4.0): -0.4406517642498540559,
            (2.0, 10.0): -0.18713047308656951625}
    for (a, s), ref in refs.items():
        assert abs(kn.gap_log_det(P(a, s)) - ref) < 1e-13


def test_gap_matches_tracy_widom_at_one():
    assert abs(kn.gap_log_det(P(0.0, 1.0)) - pv.tw_log_det(0.0, 1.0)) < 1e-8


def test_monotone_in_s():
    vals = [kn.gap_log_det(P(0.0, s)) for s in (1, 2, 4, 8)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("alpha", [-0.5, 0.0, 0.5, 1.0, 2.0])
def test_probability_in_unit_interval(alpha):
    for s in (0.01, 0.5, 3.0, 20.0, 100.0):
        p = math.exp(kn.gap_log_det(P(alpha, s)))
        assert 0.0 < p <= 1.0


def test_second_trace_term():
    # |F + Tr K| <= C s^2 for small s; the fitted C stays put as s shrinks
    ratios = []
    for s in (0.1, 0.05, 0.025):
        f = kn.gap_log_det(P(0.0, s))
        ratios.append(abs(f + kn.bessel_trace(0.0, s)) / s ** 2)
    assert max(ratios) / min(ratios) < 1.2


def test_lambda_must_be_zero():
    with pytest.raises(ValueError):
        kn.gap_log_det(P(0.0, 1.0, lam=0.5))


@pytest.mark.parametrize("alpha", [-0.9, -0.3, 0.3, 1.3])
def test_non_half_integer_orders(alpha):
    s = 6.0
    assert abs(kn.gap_log_det(P(alpha, s)) - pv.tw_log_det(alpha, s)) < 1e-9


def test_extended_precision_path():
    a, s = 1.0, 30.0
    d = kn.gap_log_det(P(a, s), precision="double")
    e = kn.gap_log_det(P(a, s), precision="extended")
    assert abs(d - e) < 1e-10
    with pytest.raises(ValueError):
        kn.gap_log_det(P(a, s), precision="quad")


def test_edge_layout_weights_sum():
    for a in (-0.9, -0.3, 0.3, 1.7):
        r = kn.hard_edge_rule(a, 5.0, 40)
        assert abs(r.weights.sum() - 5.0) < 1e-13 * 5


# --- psi-sampled kernel -----------------------------------------------------------------


# the lambda = 0 samples are analytic at x = 0 only for even integer alpha; other
# orders carry a |x|^{alpha/2} branch point that polynomial interpolation resolves
# only algebraically


@pytest.mark.parametrize("alpha", [0.0, 2.0, 4.0])
def test_psi_kernel_reduces_to_bessel(alpha):
    smp = kn.psi_samples_lambda0(alpha, 4.0, 64)
    for u, v in [(-0.3, -2.0), (-1.0, -3.5), (-2.2, -2.2)]:
        ref = kn.k_bessel(alpha, -u, -v) if u != v else kn.k_bessel_diag(alpha, -u)
        assert abs(kn.k_piii_from_psi(smp, u, v) - ref) < 1e-6


def test_psi_kernel_symmetric():
    smp = kn.psi_samples_lambda0(1.0, 3.0, 40)
    # the numerator is antisymmetric, so the kernel is symmetric for any data
    assert abs(kn.k_piii_from_psi(smp, -0.4, -2.9) - kn.k_piii_from_psi(smp, -2.9, -0.4)) < 1e-12


@pytest.mark.parametrize("a", [0.0, 2.0])
def test_psi_gap_matches_bessel(a):
    s = 4.0
    g = kn.gap_log_det(P(a, s))
    smp = kn.psi_samples_lambda0(a, s, 64)
    assert abs(kn.gap_log_det_psi(P(a, s), smp) - g) < 1e-6
    dense = kn.psi_samples_lambda0(a, s, 128)
    assert abs(kn.gap_log_det_psi(P(a, s), dense) - kn.gap_log_det_psi(P(a, s), smp)) < 1e-7


def test_psi_small_interval():
    smp = kn.psi_samples_lambda0(0.0, 1e-6, 16)
    assert abs(kn.gap_log_det_psi(P(0.0, 1e-6), smp)) < 1e-6


def test_psi_errors():
    smp = kn.psi_samples_lambda0(0.0, 2.0, 20)
    with pytest.raises(ValueError):
        kn.k_piii_from_psi(smp, -3.0, -1.0)
    with pytest.raises(ValueError):
        kn.gap_log_det_psi(P(0.0, 5.0), smp)
    with pytest.raises(ValueError):
        kn.gap_log_det_psi(P(1.0, 2.0), smp)
    plus = kn.PsiSamples(smp.grid, smp.psi1, smp.psi2, 0.0, 0.0, "plus")
    with pytest.raises(ValueError):
        kn.gap_log_det_psi(P(0.0, 2.0), plus)
    bad = kn.PsiSamples(smp.grid, smp.psi1, smp.psi2 * 1j, 0.0, 0.0)
    with pytest.raises(ValueError):
        kn.k_piii_from_psi(bad, -0.5, -1.5)
    with pytest.raises(ValueError):
        kn.PsiSamples(smp.grid[::-1], smp.psi1, smp.psi2, 0.0, 0.0)


def test_psi_csv_round_trip(tmp_path):
    smp = kn.psi_samples_lambda0(0.5, 2.0, 24)
    path = tmp_path / "psi.csv"
    kn.write_psi_csv(smp, str(path))
    back = kn.read_psi_csv(str(path))
    assert np.array_equal(back.grid, smp.grid)
    assert np.array_equal(back.psi1, smp.psi1) and np.array_equal(back.psi2, smp.psi2)
    text = path.read_text().replace("# side: minus", "# side: plus")
    path.write_text(text)
    with pytest.raises(ValueError):
        kn.read_psi_csv(str(path))
