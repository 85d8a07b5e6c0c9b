import math

import numpy as np
import pytest

from nullwave import sphharm
from nullwave.energetics import (
    EnergySample,
    FitWindowError,
    InsufficientSlicesError,
    cascade_trend,
    fit_growth,
    flat_norms,
    hyperboloidal_energy,
    simpson_uniform,
)
from nullwave.evolve import SliceFrame

SQRT4PI = math.sqrt(4.0 * math.pi)


def make_frame(r, lmax=0, t=1.0, **cols):
    """Frame with zero arrays except the named columns.

    cols maps field name -> (mode_index, values) or a full [n_r, n_modes]
    array.
    """
    h = float(r[1] - r[0])
    nm = (lmax + 1) ** 2
    arrays = {
        name: np.zeros((r.size, nm))
        for name in ("Phi", "Psi", "dPhi_dt", "dPhi_dr", "dPsi_dt", "dPsi_dr")
    }
    for name, val in cols.items():
        if isinstance(val, tuple):
            mode, vec = val
            arrays[name][:, mode] = vec
        else:
            arrays[name][:] = val
    return SliceFrame(t=t, h=h, lmax=lmax, r=r, **arrays)


class TestSimpson:
    def test_cubic_exact_on_even_intervals(self):
        x = np.linspace(0.0, 1.0, 11)
        assert abs(simpson_uniform(x**3, x[1]) - 0.25) < 1e-14

    def test_trapezoid_tail_on_odd_intervals(self):
        # 3 intervals: simpson over the first two, trapezoid on the last
        x = np.linspace(0.0, 1.0, 4)
        expect = 8.0 / 81.0 + (4.0 / 9.0 + 1.0) / 2.0 / 3.0
        assert abs(simpson_uniform(x**2, x[1]) - expect) < 1e-15

    def test_short_inputs(self):
        assert simpson_uniform(np.array([3.0]), 0.5) == 0.0
        assert simpson_uniform(np.array([]), 0.5) == 0.0
        assert abs(simpson_uniform(np.array([1.0, 1.0]), 0.5) - 0.5) < 1e-15

    def test_last_axis_vectorized(self):
        x = np.linspace(0.0, 1.0, 21)
        y = np.vstack([x, x**2])
        out = simpson_uniform(y, x[1])
        assert out.shape == (2,)
        assert abs(out[0] - 0.5) < 1e-14
        assert abs(out[1] - 1.0 / 3.0) < 1e-14


class TestFlatNorms:
    def test_monopole_coefficient_profile(self):
        r = np.linspace(0.0, 1.0, 101)
        fr = make_frame(r, Phi=(0, r), dPhi_dr=(0, np.ones_like(r)))
        s = flat_norms(fr)
        assert abs(s.l2_phi - math.sqrt(1.0 / 3.0)) < 1e-12
        # d_r Phi - Phi/r vanishes identically for Phi = c*r
        assert s.l2_dphi < 1e-12
        assert s.cascade_ratio == 0.0

    def test_unit_pointwise_field(self):
        # phi == 1 everywhere: coefficient Phi_00 = sqrt(4pi) * r
        r = np.linspace(0.0, 1.0, 101)
        fr = make_frame(r, Phi=(0, SQRT4PI * r), dPhi_dr=(0, SQRT4PI * np.ones_like(r)))
        s = flat_norms(fr)
        assert abs(s.l2_phi - math.sqrt(4.0 * math.pi / 3.0)) < 1e-10

    def test_l1_gradient_terms(self):
        r = np.linspace(0.0, 1.0, 101)
        fr = make_frame(r, lmax=1, Phi=(2, r**2), dPhi_dr=(2, 2.0 * r))
        s = flat_norms(fr)
        # radial: (2r - r)^2 -> 1/3; angular: l(l+1)=2 times int r^2 -> 2/3
        assert abs(s.l2_dphi - 1.0) < 1e-12
        assert abs(s.l2_phi - math.sqrt(0.2)) < 1e-8

    def test_time_derivative_term(self):
        r = np.linspace(0.0, 1.0, 101)
        fr = make_frame(r, dPsi_dt=(0, r))
        s = flat_norms(fr)
        assert abs(s.l2_dpsi - math.sqrt(1.0 / 3.0)) < 1e-12
        assert s.l2_psi == 0.0

    def test_zero_frame(self):
        r = np.linspace(0.0, 1.0, 11)
        s = flat_norms(make_frame(r))
        assert s.l2_phi == s.l2_dphi == s.l2_psi == s.l2_dpsi == 0.0
        assert s.cascade_ratio == 0.0

    def test_parseval_against_collocation(self):
        # coefficient-space norm == pointwise sphere integral
        rng = np.random.default_rng(7)
        lmax = 2
        nm = (lmax + 1) ** 2
        r = np.linspace(0.0, 1.0, 81)
        coeffs = rng.normal(size=(r.size, nm)) * r[:, None] ** 2
        fr = make_frame(r, lmax=lmax, Phi=coeffs)
        s = flat_norms(fr)

        grid = sphharm.build_grid(lmax)
        shells = np.empty(r.size)
        for k in range(r.size):
            pts = sphharm.synthesize(grid, coeffs[k])
            shells[k] = 4.0 * math.pi * sphharm.sphere_mean(grid, pts**2)
        direct = math.sqrt(simpson_uniform(shells, fr.h))
        assert abs(s.l2_phi - direct) < 1e-8 * max(1.0, direct)


class TestFits:
    def test_power_recovery(self):
        ts = np.linspace(10.0, 100.0, 16)
        fit = fit_growth(ts, 2.5 * ts**0.5, "power")
        assert abs(fit.params[0] - 0.5) < 1e-12
        assert abs(fit.params[1] - 2.5) < 1e-10
        assert fit.rms < 1e-10

    def test_log_recovery(self):
        ts = np.linspace(5.0, 60.0, 12)
        fit = fit_growth(ts, 3.0 * np.log(ts) + 1.0, "log")
        a, b = fit.params
        assert abs(a - 3.0) < 1e-12 and abs(b - 1.0) < 1e-12
        assert fit.rms < 1e-13

    def test_window_restricts_samples(self):
        ts = np.linspace(1.0, 100.0, 60)
        ys = 2.0 * ts
        fit = fit_growth(ts, ys, "power", window=(10.0, 90.0))
        assert fit.n_samples < ts.size
        assert abs(fit.params[0] - 1.0) < 1e-12

    def test_too_few_samples(self):
        ts = np.linspace(10.0, 100.0, 6)
        with pytest.raises(FitWindowError):
            fit_growth(ts, ts, "power")

    def test_narrow_window(self):
        ts = np.linspace(10.0, 20.0, 20)
        with pytest.raises(FitWindowError):
            fit_growth(ts, ts, "power")

    def test_nonpositive_time(self):
        ts = np.linspace(0.0, 50.0, 20)
        with pytest.raises(FitWindowError):
            fit_growth(ts, np.ones_like(ts), "log")

    def test_power_needs_positive_values(self):
        ts = np.linspace(10.0, 100.0, 20)
        ys = np.ones_like(ts)
        ys[3] = -1.0
        with pytest.raises(ValueError):
            fit_growth(ts, ys, "power")

    def test_unknown_model(self):
        ts = np.linspace(10.0, 100.0, 20)
        with pytest.raises(ValueError):
            fit_growth(ts, ts, "exp")


def sample(t, ratio):
    return EnergySample(t=t, l2_phi=1.0, l2_dphi=ratio, l2_psi=0.0,
                        l2_dpsi=0.0, cascade_ratio=ratio)


class TestCascadeTrend:
    def test_decreasing_ratios(self):
        samples = [sample(t, 1.0 / t) for t in (1.0, 2.0, 3.0, 4.0, 5.0)]
        ts, ratios, rho = cascade_trend(samples)
        assert ts.size == 5
        assert rho == pytest.approx(-1.0, abs=1e-12)

    def test_constant_ratios(self):
        samples = [sample(t, 2.0) for t in (1.0, 2.0, 3.0)]
        _, _, rho = cascade_trend(samples)
        assert rho == 0.0

    def test_too_short(self):
        _, _, rho = cascade_trend([sample(1.0, 1.0), sample(2.0, 0.5)])
        assert rho == 0.0


def outgoing_frames(t_lo, t_hi, dt, r_max, h, center=8.0):
    """Frames of the regular outgoing monopole Phi = F(t+r) - F(t-r)."""

    def F(x):
        return np.exp(-((x - center) ** 2))

    def Fp(x):
        return -2.0 * (x - center) * np.exp(-((x - center) ** 2))

    r = np.arange(0.0, r_max + h / 2, h)
    frames = []
    t = t_lo
    while t <= t_hi + 1e-9:
        frames.append(make_frame(
            r, t=t,
            Phi=(0, F(t + r) - F(t - r)),
            dPhi_dt=(0, Fp(t + r) - Fp(t - r)),
            dPhi_dr=(0, Fp(t + r) + Fp(t - r)),
        ))
        t += dt
    return frames


class TestHyperboloidal:
    def test_conserved_analytic_energy(self):
        # for this solution the energy is sqrt(2 pi) independent of s
        frames = outgoing_frames(3.9, 14.6, 0.05, 12.0, 0.02)
        for s in (4.0, 5.0):
            e = hyperboloidal_energy(s, frames)
            assert abs(e - math.sqrt(2.0 * math.pi)) < 5e-3 * math.sqrt(2.0 * math.pi)

    def test_zero_field(self):
        r = np.linspace(0.0, 2.0, 21)
        frames = [make_frame(r, t=4.0), make_frame(r, t=6.0)]
        assert hyperboloidal_energy(5.0, frames) == 0.0

    def test_needs_two_slices(self):
        r = np.linspace(0.0, 2.0, 21)
        with pytest.raises(InsufficientSlicesError):
            hyperboloidal_energy(5.0, [make_frame(r, t=6.0)])

    def test_vertex_before_coverage(self):
        r = np.linspace(0.0, 2.0, 21)
        frames = [make_frame(r, t=6.0), make_frame(r, t=8.0)]
        with pytest.raises(InsufficientSlicesError):
            hyperboloidal_energy(4.0, frames)

    def test_truncated_coverage_rejected(self):
        # slices stop while the pulse still straddles the hyperboloid
        frames = outgoing_frames(3.9, 6.0, 0.05, 12.0, 0.02)
        with pytest.raises(InsufficientSlicesError):
            hyperboloidal_energy(4.0, frames)

    def test_psi_field_selector(self):
        r = np.linspace(0.0, 2.0, 41)
        prof = np.clip(r * (1.0 - r), 0.0, None)
        fr_a = make_frame(r, t=4.0, dPsi_dt=(0, prof))
        fr_b = make_frame(r, t=9.0, dPsi_dt=(0, prof))
        e = hyperboloidal_energy(5.0, [fr_a, fr_b], field="psi")
        assert e > 0.0
        with pytest.raises(ValueError):
            hyperboloidal_energy(5.0, [fr_a, fr_b], field="chi")
