"""Slice-based energy norms, hyperboloidal energies, and growth-law fits.

Everything in here consumes the constant-t slice frames produced by the
evolution (see ``evolve.SliceBand.frame``).  Norms are spherical-harmonic
sums of radial integrals, so a slice with ``n_modes`` columns costs a
handful of 1-d Simpson passes.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import spearmanr

from . import sphharm


class InsufficientSlicesError(ValueError):
    """A hyperboloid left the region covered by the recorded slices."""


class FitWindowError(ValueError):
    """Fit window too narrow or too thinly sampled to mean anything."""


def simpson_uniform(y, h):
    """Composite Simpson along the last axis of ``y`` on a uniform grid.

    Odd interval counts get a trapezoid on the final interval.  Returns a
    scalar for 1-d input.
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[-1]
    out = np.zeros(y.shape[:-1])
    if n < 2:
        return out if out.shape else float(out)
    m = n if n % 2 == 1 else n - 1
    if m >= 3:
        ys = y[..., :m]
        out = (h / 3.0) * (
            ys[..., 0]
            + ys[..., -1]
            + 4.0 * ys[..., 1:-1:2].sum(axis=-1)
            + 2.0 * ys[..., 2:-1:2].sum(axis=-1)
        )
    if m != n:
        out = out + 0.5 * h * (y[..., -1] + y[..., -2])
    return out if out.shape else float(out)


@dataclass
class EnergySample:
    """Norms of one constant-t slice."""

    t: float
    l2_phi: float
    l2_dphi: float
    l2_psi: float
    l2_dpsi: float
    cascade_ratio: float
    e_hyp_phi: float = None
    e_hyp_psi: float = None


def _axis_value(F, h):
    # one-sided second-order limit of F/r at r=0
    if F.shape[0] < 3:
        return np.zeros(F.shape[1])
    return (4.0 * F[1] - F[2]) / (2.0 * h)


def _field_norms(F, dFdt, dFdr, r, h, lam):
    f = np.empty_like(F)
    f[1:] = F[1:] / r[1:, None]
    f[0] = _axis_value(F, h)

    l2 = simpson_uniform((F ** 2).sum(axis=1), h)

    dt_term = (dFdt ** 2).sum(axis=1)
    rad = ((dFdr - f) ** 2).sum(axis=1)
    ang = ((lam[None, :]) * f ** 2).sum(axis=1)
    # exact limits at the axis: both gradient integrands vanish with r^2
    rad[0] = 0.0
    ang[0] = 0.0
    d2 = simpson_uniform(dt_term + rad + ang, h)
    return math.sqrt(max(l2, 0.0)), math.sqrt(max(d2, 0.0))


def flat_norms(frame):
    """L2 norms of both fields and their first derivatives on one slice.

    The radial-gradient term is integrated as (d_r F - F/r)^2, which is
    (r d_r (F/r))^2 without the cancellation at large r.
    """
    lam = np.array([l * (l + 1) for l, _ in sphharm.mode_list(frame.lmax)], dtype=float)
    r = frame.r
    h = frame.h
    l2_phi, l2_dphi = _field_norms(frame.Phi, frame.dPhi_dt, frame.dPhi_dr, r, h, lam)
    l2_psi, l2_dpsi = _field_norms(frame.Psi, frame.dPsi_dt, frame.dPsi_dr, r, h, lam)
    if l2_phi > 0.0:
        ratio = l2_dphi / l2_phi
    else:
        ratio = 0.0 if l2_dphi == 0.0 else math.inf
    return EnergySample(
        t=frame.t,
        l2_phi=l2_phi,
        l2_dphi=l2_dphi,
        l2_psi=l2_psi,
        l2_dpsi=l2_dpsi,
        cascade_ratio=ratio,
    )


def _frame_arrays(frame, which):
    if which == "phi":
        return frame.Phi, frame.dPhi_dt, frame.dPhi_dr
    if which == "psi":
        return frame.Psi, frame.dPsi_dt, frame.dPsi_dr
    raise ValueError("field must be 'phi' or 'psi'")


def hyperboloidal_energy(s, frames, field="phi"):
    """Energy on the hyperboloid t = sqrt(s^2 + r^2) from stored slices.

    Values between recorded slice times are linearly interpolated at fixed
    r.  Raises InsufficientSlicesError when the hyperboloid runs off the
    covered region while the integrand is still significant.
    """
    if s <= 0.0:
        raise ValueError("hyperboloid parameter must be positive")
    frames = sorted(frames, key=lambda fr: fr.t)
    if len(frames) < 2:
        raise InsufficientSlicesError("need at least two slices to interpolate")
    ts = [fr.t for fr in frames]
    if s < ts[0]:
        raise InsufficientSlicesError(
            "hyperboloid vertex t=%g sits before the first slice t=%g" % (s, ts[0])
        )
    h = frames[0].h
    lam = np.array(
        [l * (l + 1) for l, _ in sphharm.mode_list(frames[0].lmax)], dtype=float
    )

    vals = []
    truncated = False
    k = 0
    while True:
        r = k * h
        t = math.hypot(s, r)
        if t > ts[-1]:
            truncated = True
            break
        j = np.searchsorted(ts, t)
        if j == 0:
            ja, jb, w = 0, 0, 0.0
        else:
            ja, jb = j - 1, min(j, len(ts) - 1)
            w = 0.0 if ts[jb] == ts[ja] else (t - ts[ja]) / (ts[jb] - ts[ja])
        fa, fb = frames[ja], frames[jb]
        if k >= fa.r.size or k >= fb.r.size:
            truncated = True
            break
        Fa, dta, dra = _frame_arrays(fa, field)
        Fb, dtb, drb = _frame_arrays(fb, field)
        F = (1 - w) * Fa[k] + w * Fb[k]
        dFdt = (1 - w) * dta[k] + w * dtb[k]
        dFdr = (1 - w) * dra[k] + w * drb[k]
        if k == 0:
            vals.append(0.0)
        else:
            f = F / r
            term1 = (s / t) ** 2 * (dFdt ** 2).sum()
            term2 = (((r / t) * dFdt + dFdr - f) ** 2).sum()
            term3 = (lam * f ** 2).sum()
            vals.append(term1 + term2 + term3)
        k += 1

    vals = np.asarray(vals)
    if vals.size < 2:
        raise InsufficientSlicesError("hyperboloid not covered by recorded slices")
    peak = vals.max()
    if truncated and peak > 0.0 and vals[-1] > 1e-8 * peak:
        raise InsufficientSlicesError(
            "slices end at t=%g with the integrand still significant" % ts[-1]
        )
    return float(simpson_uniform(vals, h))


@dataclass
class FitResult:
    model: str
    params: tuple
    window: tuple
    rms: float
    n_samples: int


def fit_growth(ts, ys, model, window=None):
    """Least-squares fit of a growth law over a time window.

    model="power" fits y = a * t^p and returns params (p, a);
    model="log" fits y = a * ln t + b and returns params (a, b).
    The window must span at least a factor 5 in t and hold >= 8 samples.
    """
    ts = np.asarray(ts, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if model not in ("power", "log"):
        raise ValueError("model must be 'power' or 'log'")
    if window is None:
        window = (float(ts.min()), float(ts.max()))
    lo, hi = window
    sel = (ts >= lo) & (ts <= hi)
    tw, yw = ts[sel], ys[sel]
    if tw.size < 8:
        raise FitWindowError("need at least 8 samples in the fit window")
    if tw.min() <= 0.0:
        raise FitWindowError("fit window must sit at positive t")
    if tw.max() < 5.0 * tw.min():
        raise FitWindowError("fit window must span at least a factor 5 in t")

    if model == "power":
        if np.any(yw <= 0.0):
            raise ValueError("power-law fit needs positive samples")
        A = np.column_stack([np.log(tw), np.ones_like(tw)])
        coef, *_ = np.linalg.lstsq(A, np.log(yw), rcond=None)
        p, ln_a = coef
        fit = math.exp(ln_a) * tw ** p
        params = (float(p), math.exp(ln_a))
    else:
        A = np.column_stack([np.log(tw), np.ones_like(tw)])
        coef, *_ = np.linalg.lstsq(A, yw, rcond=None)
        fit = A @ coef
        params = (float(coef[0]), float(coef[1]))
    rms = float(np.sqrt(np.mean((yw - fit) ** 2)))
    return FitResult(model=model, params=params, window=(float(lo), float(hi)),
                     rms=rms, n_samples=int(tw.size))


def cascade_trend(samples):
    """Cascade-ratio series with its Spearman rank correlation against t.

    Returns (ts, ratios, rho); rho < 0 means the ratio is falling.
    """
    samples = sorted(samples, key=lambda s: s.t)
    ts = np.array([s.t for s in samples])
    ratios = np.array([s.cascade_ratio for s in samples])
    if ts.size < 3 or np.allclose(ratios, ratios[0]):
        return ts, ratios, 0.0
    rho = spearmanr(ts, ratios).statistic
    return ts, ratios, float(rho)
