"""Real spherical harmonics on a Gauss-Legendre x uniform-longitude grid.

Coefficients are stored against the orthonormal real basis (integral of Y^2
over the sphere is 1, so Y_00 = 1/sqrt(4 pi)).  Modes are enumerated as
(ell, m) for ell = 0..lmax, m = -ell..ell, flattened to index ell^2+ell+m.

A grid built for band limit B integrates products of two band-B fields
exactly: n_theta Gauss-Legendre nodes handle polynomial degree 2*n_theta-1
in cos(theta) and n_phi uniform nodes handle longitude frequencies below
n_phi.  Quadratic sources of band-L fields therefore need a grid built at
band 2L before truncating back; callers do that, this module only flags
the overflow.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import lpmv


class BandwidthError(ValueError):
    """A nonlinear product exceeds what the grid can integrate exactly."""


def n_modes(lmax):
    return (lmax + 1) ** 2


def mode_index(ell, m):
    if not (0 <= abs(m) <= ell):
        raise ValueError(f"bad mode ({ell},{m})")
    return ell * ell + ell + m


def mode_list(lmax):
    return [(ell, m) for ell in range(lmax + 1) for m in range(-ell, ell + 1)]


def _real_harmonic(ell, m, x, phi):
    # orthonormal real basis from associated Legendre functions; lpmv
    # carries the Condon-Shortley phase, the extra (-1)^m cancels it
    am = abs(m)
    norm = np.sqrt((2 * ell + 1) / (4.0 * np.pi)
                   * np.prod(1.0 / np.arange(ell - am + 1, ell + am + 1)))
    p = lpmv(am, ell, x)
    if m == 0:
        return norm * p
    if m > 0:
        return np.sqrt(2.0) * (-1.0) ** m * norm * p * np.cos(m * phi)
    return np.sqrt(2.0) * (-1.0) ** am * norm * p * np.sin(am * phi)


@dataclass(frozen=True)
class AngularGrid:
    """Collocation grid plus precomputed basis and quadrature weights."""

    lmax: int
    theta: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)     # per flattened point, sums to 4 pi
    basis: np.ndarray = field(repr=False)       # [n_modes, n_points]
    eigenvalues: np.ndarray = field(repr=False)  # -l(l+1) per mode

    @property
    def n_points(self):
        return self.weights.size

    @property
    def n_modes(self):
        return n_modes(self.lmax)


def build_grid(lmax, n_theta=None, n_phi=None):
    """Build a collocation grid exact for products of two band-lmax fields."""
    if lmax < 0:
        raise ValueError("lmax must be >= 0")
    if n_theta is None:
        n_theta = lmax + 1
    if n_phi is None:
        n_phi = 2 * lmax + 1
    if n_theta < lmax + 1 or n_phi < 2 * lmax + 1:
        raise ValueError("grid too small for requested band limit")
    x, wx = leggauss(n_theta)
    theta = np.arccos(x)
    phis = 2.0 * np.pi * np.arange(n_phi) / n_phi
    wphi = 2.0 * np.pi / n_phi
    # flattened points: theta-major
    th_flat = np.repeat(theta, n_phi)
    ph_flat = np.tile(phis, n_theta)
    w_flat = np.repeat(wx, n_phi) * wphi
    basis = np.empty((n_modes(lmax), th_flat.size))
    eig = np.empty(n_modes(lmax))
    for ell, m in mode_list(lmax):
        k = mode_index(ell, m)
        basis[k] = _real_harmonic(ell, m, np.repeat(x, n_phi), ph_flat)
        eig[k] = -ell * (ell + 1)
    return AngularGrid(lmax=lmax, theta=th_flat, phi=ph_flat,
                       weights=w_flat, basis=basis, eigenvalues=eig)


def synthesize(grid, coeffs):
    """Mode coefficients [..., n_modes] to point values [..., n_points]."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[-1] != grid.n_modes:
        raise ValueError("coefficient count does not match grid band limit")
    return coeffs @ grid.basis


def analyze(grid, values):
    """Point values [..., n_points] to mode coefficients [..., n_modes].

    Exact for fields within the grid's band limit; otherwise it is the
    quadrature projection, which silently aliases. Callers pick the band.
    """
    values = np.asarray(values, dtype=float)
    if values.shape[-1] != grid.n_points:
        raise ValueError("value count does not match grid")
    return values @ (grid.basis * grid.weights).T


def sphere_mean(grid, values):
    """Average of point values over the sphere, weight total 4 pi."""
    values = np.asarray(values, dtype=float)
    return (values @ grid.weights) / (4.0 * np.pi)


def laplace_beltrami(grid, coeffs):
    """Angular Laplacian in coefficient space: multiply by -l(l+1)."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[-1] != grid.n_modes:
        raise ValueError("coefficient count does not match grid band limit")
    return coeffs * grid.eigenvalues


def inferred_band(coeffs):
    """Largest ell with any nonzero coefficient (0 for all-zero input)."""
    coeffs = np.asarray(coeffs)
    flat = coeffs.reshape(-1, coeffs.shape[-1])
    nz = np.any(flat != 0.0, axis=0)
    lmax = int(np.sqrt(coeffs.shape[-1])) - 1
    band = 0
    for ell in range(lmax + 1):
        if np.any(nz[ell * ell:(ell + 1) * (ell + 1)]):
            band = ell
    return band


def angular_gradient_sq(grid, coeffs, band=None):
    """Pointwise squared angular gradient of a band-limited field.

    Uses |grad f|^2 = (1/2) Lap(f^2) - f Lap f, with f^2 projected on the
    grid; exact when the field's band is at most half the grid band.
    Returns point values on the grid.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if band is None:
        band = inferred_band(coeffs)
    if 2 * band > grid.lmax:
        raise BandwidthError(
            f"field band {band} needs grid band >= {2 * band}, have {grid.lmax}")
    f = synthesize(grid, coeffs)
    lap_f = synthesize(grid, laplace_beltrami(grid, coeffs))
    fsq_coeffs = analyze(grid, f * f)
    lap_fsq = synthesize(grid, laplace_beltrami(grid, fsq_coeffs))
    return 0.5 * lap_fsq - f * lap_f


def pad_coeffs(coeffs, lmax_from, lmax_to):
    """Zero-extend coefficients to a larger band limit."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[-1] != n_modes(lmax_from):
        raise ValueError("coefficient count does not match lmax_from")
    if lmax_to < lmax_from:
        raise ValueError("lmax_to must be >= lmax_from")
    out = np.zeros(coeffs.shape[:-1] + (n_modes(lmax_to),))
    out[..., :n_modes(lmax_from)] = coeffs
    return out


def truncate_coeffs(coeffs, lmax_to):
    """Drop coefficients above a band limit."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[-1] < n_modes(lmax_to):
        raise ValueError("input has fewer modes than requested band")
    return coeffs[..., :n_modes(lmax_to)].copy()
