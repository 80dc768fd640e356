import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from excess_noise.analytic import (
    SERIES_CROSSOVER,
    cavity_absorbing,
    cavity_amplifying,
    cavity_amplifying_noise_figure,
    threshold_cdf,
    threshold_noise_figure,
    threshold_pdf,
    threshold_typical,
    waveguide_absorbing,
    waveguide_amplifying,
    waveguide_kernels,
)
from excess_noise.detection import DetectionConfig
from excess_noise.ensembles import PoleSpec, sample_haar_coupling, sample_pole_matrix
from excess_noise.errors import ThresholdCrossed
from excess_noise.photostat import noise_figure
from excess_noise.rng import generator

# ------------------------------------------------------------- waveguide


def test_waveguide_zero_gain_limit():
    p = waveguide_amplifying(0.0, 0.1)
    assert p.mean_current == pytest.approx(4 / 30)
    assert p.excess_noise == 0.0
    q = waveguide_absorbing(0.0, 0.1)
    assert q.mean_current == pytest.approx(p.mean_current)
    r = waveguide_amplifying(0.0, 0.1, side="reflection")
    assert r.mean_current == pytest.approx(1 - 4 / 30)


def test_waveguide_spot_values_at_half_threshold():
    # values from evaluating the closed forms by hand at s = pi/2, L/l = 10
    p = waveguide_amplifying(math.pi / 2, 0.1)
    assert p.mean_current == pytest.approx(0.2 * math.pi / 3, rel=1e-12)
    # sin s = 1, cot s = 0: bracket 3 - 2s - 1 - s = 2 - 3 pi / 2, times s
    bracket = (math.pi / 2) * (2 - 3 * math.pi / 2)
    assert p.excess_noise == pytest.approx(-(2 / 30) * bracket, rel=1e-12)
    assert p.noise_figure == pytest.approx(11.25, abs=1e-2)


def test_waveguide_threshold_guard_and_flag():
    with pytest.raises(ThresholdCrossed):
        waveguide_amplifying(math.pi, 0.1)
    assert waveguide_amplifying(0.99 * math.pi, 0.1).flag == "threshold"
    assert waveguide_amplifying(0.9 * math.pi, 0.1).flag == ""
    with pytest.raises(ValueError):
        waveguide_absorbing(-1.0, 0.1)


def test_waveguide_noise_figure_grows_towards_threshold():
    vals = [waveguide_amplifying(s, 0.1).noise_figure for s in np.linspace(0.5, 3.1, 20)]
    assert np.all(np.diff(vals) > 0)
    assert waveguide_amplifying(math.pi - 1e-4, 0.1).noise_figure > 1e6


@pytest.mark.parametrize("name_index", range(4))
def test_series_and_closed_form_agree_at_crossover(name_index):
    s = SERIES_CROSSOVER
    below = waveguide_kernels(s * (1 - 1e-12))[name_index]
    # evaluate the trigonometric branch just above the crossover
    above = waveguide_kernels(s * (1 + 1e-12))[name_index]
    assert abs(below - above) < 1e-10


def test_series_branch_is_accurate():
    # i_t and i_r have no cancellation; p_t is checked against its leading terms
    for s in (0.05, 0.1, 0.15):
        i_t, p_t, i_r, p_r = waveguide_kernels(s)
        assert i_t.real == pytest.approx(s / math.sin(s), rel=1e-14)
        assert i_r.real == pytest.approx(s / math.tan(s), rel=1e-14)
        assert p_t.real == pytest.approx(-2 / 3 * s**2 - 2 / 9 * s**4 - 61 / 1260 * s**6, rel=1e-6)


def test_waveguide_duality_at_ten_points():
    rng = generator(42)
    for s in rng.uniform(0.01, 6.0, 10):
        for side in ("transmission", "reflection"):
            absorb = waveguide_absorbing(s, 0.1, side=side)
            kern = tuple(k.real for k in waveguide_kernels(1j * s))
            # continuation of the amplifying formulas, same occupation factor
            i_t, p_t, i_r, p_r = kern
            if side == "transmission":
                mean = (4 / 3) * 0.1 * i_t
                bracket = p_t
            else:
                mean = 1 - (4 / 3) * 0.1 * i_r
                bracket = p_r
            assert absorb.mean_current == pytest.approx(mean, abs=1e-10)
            assert absorb.excess_noise == pytest.approx((2 / 3) * 0.1 * bracket, abs=1e-10)


def test_waveguide_absorbing_maximum_and_opaque_limit():
    grid = np.linspace(0.1, 6.0, 2000)
    exc = [waveguide_absorbing(s, 0.1).excess_noise for s in grid]
    assert 1.5 < grid[int(np.argmax(exc))] < 2.5
    far = waveguide_absorbing(400.0, 0.1)
    assert far.mean_current < 1e-100 and abs(far.excess_noise) < 1e-100
    assert far.noise_figure > 1e100


# ------------------------------------------------------------- cavity


def test_cavity_values():
    p = cavity_amplifying(0.0)
    assert (p.mean_current, p.excess_noise, p.noise_figure) == (1.0, 0.0, 1.0)
    q = cavity_amplifying(0.5)
    assert q.mean_current == pytest.approx(2.0)
    assert q.noise_figure == pytest.approx(3.5)
    assert cavity_absorbing(1.0).excess_noise == pytest.approx(0.375)
    assert cavity_absorbing(0.0).excess_noise == 0.0
    with pytest.raises(ThresholdCrossed):
        cavity_amplifying(1.0)
    with pytest.raises(ThresholdCrossed):
        cavity_amplifying_noise_figure(1.0)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 0.99))
def test_cavity_noise_figure_identity(gamma):
    assert cavity_amplifying(gamma).noise_figure == pytest.approx(
        cavity_amplifying_noise_figure(gamma), rel=1e-12
    )


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 50.0), st.floats(0.1, 1.0), st.floats(0.01, 5.0))
def test_cavity_duality(gamma, alpha, f):
    a = cavity_absorbing(gamma, alpha=alpha, f=f)
    b = cavity_amplifying(-gamma, alpha=alpha, f=f)
    assert abs(a.mean_current - b.mean_current) <= 1e-12
    assert abs(a.excess_noise - b.excess_noise) <= 1e-12


def test_cavity_absorbing_maximum():
    grid = np.linspace(0.01, 5.0, 5000)
    exc = [cavity_absorbing(g).excess_noise for g in grid]
    assert 0.7 < grid[int(np.argmax(exc))] < 1.3


def test_plot_units():
    p = waveguide_amplifying(1.0, 0.1, alpha=0.5, f=-2.0)
    # excess noise in units of alpha^2 l |f| I0 / L
    assert p.excess_coeff == pytest.approx(p.excess_noise / (0.25 * 0.1 * 2.0))
    q = cavity_amplifying(0.4, alpha=0.5, f=-2.0)
    assert q.excess_coeff == pytest.approx(q.excess_noise / (0.25 * 2.0))


# ------------------------------------------------------------- threshold


def test_threshold_noise_figure_examples():
    n = 3
    assert threshold_noise_figure(np.ones(2 * n), 0) == pytest.approx(4 * n)
    assert threshold_noise_figure([0.3 + 0.1j], 0) == pytest.approx(2.0)
    assert threshold_noise_figure([0.0, 1.0], 0) == math.inf


@pytest.mark.parametrize("seed", range(3))
def test_threshold_noise_figure_matches_pole_matrix(seed):
    n = 4
    sigma = sample_haar_coupling(2 * n, seed)
    total = float(np.sum(np.abs(sigma) ** 2))
    expect = threshold_noise_figure(sigma, 0)
    cfg = DetectionConfig(alpha=1.0, f=-1.0)
    for eps in (1e-4, 1e-6):
        sm = sample_pole_matrix(PoleSpec(tuple(sigma), decay=total, amp_rate=total * (1 - eps)))
        # the remainder term shrinks like |denominator|^2
        assert noise_figure(sm, cfg) == pytest.approx(expect, rel=10 * eps)
        refl = noise_figure(sm, cfg.replace(side="reflection"))
        assert refl == pytest.approx(expect, rel=10 * eps)


@pytest.mark.parametrize("n", range(2, 11))
def test_threshold_pdf_normalised(n):
    # substitute F = 2/y to map [2, inf) onto (0, 1]
    val, _ = integrate.quad(lambda y: threshold_pdf(2 / y, n) * 2 / y**2, 0, 1, epsabs=1e-12, epsrel=1e-12)
    assert val == pytest.approx(1.0, abs=1e-8)


def test_threshold_pdf_examples():
    F = np.array([1.0, 2.0, 3.0, 10.0])
    np.testing.assert_allclose(threshold_pdf(F, 2), [0.0, 0.5, 2 / 9, 0.02])
    grid = np.linspace(2, 40, 38001)
    assert grid[np.argmax(threshold_pdf(grid, 10))] == pytest.approx(10.0, abs=1e-3)
    assert threshold_typical(10) == 10.0
    assert threshold_cdf(2.0, 5) == 0.0
    assert threshold_cdf(1e12, 5) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        threshold_pdf(3.0, 1)
    with pytest.raises(ValueError):
        threshold_pdf(3.0, 2, f=1.0)


def test_threshold_cdf_is_integral_of_pdf():
    for n in (2, 5):
        for x in (3.0, 10.0, 50.0):
            val, _ = integrate.quad(threshold_pdf, 2, x, args=(n,))
            assert val == pytest.approx(threshold_cdf(x, n), rel=1e-9)


def test_threshold_truncated_mean_grows_logarithmically():
    # for N = 2 the mean over [2, X] is 2 ln(X/2)
    for x in (1e2, 1e4, 1e6):
        val, _ = integrate.quad(lambda F: F * threshold_pdf(F, 2), 2, x, limit=200)
        assert val == pytest.approx(2 * math.log(x / 2), rel=1e-8)
