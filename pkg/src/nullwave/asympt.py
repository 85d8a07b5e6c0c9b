"""Late-time analysis of a finished run: radiation constants, the
cumulative-flux identity, region bookkeeping, and residuals against the
leading-order profiles.

The entry point is a RadiationRecord (per-retarded-time mode data on the
outer boundary) plus, for interior residuals, the constant-t slice frames.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson

from . import profiles, sphharm
from .energetics import simpson_uniform

_SQRT4PI = math.sqrt(4.0 * math.pi)

# below this, a leading-order prediction is treated as absent rather than
# divided by
PREDICTION_FLOOR = 1e-14

# fraction of the peak squared flux still present on the last retarded-time
# row before the truncation warning fires
TAIL_WARN_FRACTION = 1e-3


@dataclass
class RadiationRecord:
    """Mode coefficients along the outer boundary v = v_max.

    Arrays are [n_u, n_modes] on the uniform retarded-time grid ``u``.
    ``upsi`` holds U(r*psi) = 2 d_u (r*psi); ``phi_over_lnv`` is
    (r*phi)/ln(v_max).
    """

    u: np.ndarray
    psi: np.ndarray
    upsi: np.ndarray
    phi: np.ndarray
    phi_over_lnv: np.ndarray
    lmax: int
    v_max: float
    h: float

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        for name in ("psi", "upsi", "phi", "phi_over_lnv"):
            arr = np.asarray(getattr(self, name), dtype=float)
            setattr(self, name, arr)
            if arr.shape != (self.u.size, sphharm.n_modes(self.lmax)):
                raise ValueError("%s has shape %s, expected (%d, %d)"
                                 % (name, arr.shape, self.u.size,
                                    sphharm.n_modes(self.lmax)))
            if not np.all(np.isfinite(arr)):
                raise ValueError("%s contains non-finite entries" % name)
        if self.u.size < 2 or np.any(np.diff(self.u) <= 0):
            raise ValueError("u grid must be increasing with at least 2 points")

    @classmethod
    def from_pointwise_radial(cls, u, psi, upsi, phi, v_max):
        """Wrap spherically symmetric pointwise data as a record.

        Coefficient convention: a constant field c has coefficient
        c*sqrt(4 pi) on the (0,0) harmonic.
        """
        u = np.asarray(u, dtype=float)

        def col(x):
            return _SQRT4PI * np.asarray(x, dtype=float)[:, None]

        lnv = math.log(v_max)
        return cls(u=u, psi=col(psi), upsi=col(upsi), phi=col(phi),
                   phi_over_lnv=col(phi) / lnv, lmax=0, v_max=float(v_max),
                   h=float(u[1] - u[0]))


@dataclass
class AsymptoticConstants:
    """Radiation constants of one run.

    c3 and c4 are direction-dependent and live on the collocation grid;
    c1 and c2 are their sphere means, computed independently so the mean
    relations stay a real check.
    """

    c1: float
    c2: float
    c5: float
    c3: np.ndarray
    c4: np.ndarray
    grid: sphharm.AngularGrid
    u_max: float
    v_max: float
    warnings: list = field(default_factory=list)


def _pointwise(rec, grid):
    band = grid.lmax

    def synth(arr):
        return sphharm.synthesize(grid, sphharm.pad_coeffs(arr, rec.lmax, band))

    return synth(rec.upsi), synth(rec.phi_over_lnv)


def compute_constants(rec):
    """Integrate the boundary fluxes into the asymptotic constants.

    Products of two band-L fields are integrated exactly on a band-2L
    grid, so the sphere-mean identities hold to rounding.
    """
    grid = sphharm.build_grid(2 * rec.lmax)
    B, A = _pointwise(rec, grid)
    h = rec.h

    c3 = simpson_uniform(np.ascontiguousarray(B.T) ** 2, h) / 8.0
    c4 = simpson_uniform(np.ascontiguousarray((A * B ** 2).T), h) / 4.0

    # opposite integration order (sphere first, then u) for the means
    c1 = simpson_uniform(B ** 2 @ grid.weights, h) / (32.0 * math.pi)
    c2 = simpson_uniform((A * B ** 2) @ grid.weights, h) / (16.0 * math.pi)
    c5 = math.sqrt(simpson_uniform((0.5 * B) ** 4 @ grid.weights, h))

    warnings = []
    peak = float(np.max(B ** 2)) if B.size else 0.0
    if peak > 0.0 and float(np.max(B[-1] ** 2)) > TAIL_WARN_FRACTION * peak:
        warnings.append(
            "flux not decayed at u_max=%g: last-row fraction %.2e"
            % (rec.u[-1], float(np.max(B[-1] ** 2)) / peak)
        )
    return AsymptoticConstants(
        c1=float(c1), c2=float(c2), c5=float(c5), c3=c3, c4=c4, grid=grid,
        u_max=float(rec.u[-1]), v_max=rec.v_max, warnings=warnings,
    )


@dataclass
class IdentityReport:
    """How well the cumulative-flux relations hold on one record."""

    relation_residual: np.ndarray   # sup over directions, per u
    relation_sup: float
    plateau: float
    relation_sup_rel: float
    c4_gap: float
    c4_gap_rel: float
    c1_mean_gap: float
    c2_mean_gap: float
    u: np.ndarray
    v_max: float


def check_identities(rec, consts=None):
    """Check the boundary relations that pin down the constants.

    (a) (r*phi)/ln v against the running flux integral (1/4) int (U Psi)^2,
    pointwise in direction; (b) the c4 = 2 c3^2 product relation; (c) the
    sphere means of c3, c4 against c1, c2.
    """
    if consts is None:
        consts = compute_constants(rec)
    grid = consts.grid
    B, A = _pointwise(rec, grid)

    F = cumulative_simpson(B ** 2, dx=rec.h, axis=0, initial=0.0) / 4.0
    resid = np.abs(A - F)
    per_u = resid.max(axis=1)
    plateau = float(np.max(np.abs(F[-1]))) if F.size else 0.0
    sup = float(per_u.max()) if per_u.size else 0.0

    gap = np.abs(consts.c4 - 2.0 * consts.c3 ** 2)
    c4_scale = float(np.max(np.abs(consts.c4))) if consts.c4.size else 0.0
    c4_gap = float(gap.max()) if gap.size else 0.0

    c1_gap = abs(consts.c1 - sphharm.sphere_mean(grid, consts.c3))
    c2_gap = abs(consts.c2 - sphharm.sphere_mean(grid, consts.c4))

    return IdentityReport(
        relation_residual=per_u,
        relation_sup=sup,
        plateau=plateau,
        relation_sup_rel=sup / plateau if plateau > 0.0 else math.inf,
        c4_gap=c4_gap,
        c4_gap_rel=c4_gap / c4_scale if c4_scale > 0.0 else 0.0,
        c1_mean_gap=float(c1_gap),
        c2_mean_gap=float(c2_gap),
        u=rec.u.copy(),
        v_max=rec.v_max,
    )


@dataclass(frozen=True)
class RegionTag:
    """Interior/exterior classification of one (u, v) point."""

    region: str      # "I", "II", or "neither"
    c_int: bool
    c_ext: bool
    d_int: bool
    d_ext: bool


def region_classify(u, v, delta=0.1):
    """Classify a point of the forward cone by its r-to-u relation.

    Region I is r <= u^{1-delta}/2, region II is r >= exp(u^delta)/2; the
    two can both hold at moderate u, in which case I wins.  The c/d flags
    split at u^{1-delta}/2 and u^{1+delta}/2.
    """
    if not (u > 0.0 and v >= u):
        raise ValueError("need 0 < u <= v")
    r = 0.5 * (v - u)
    c_split = 0.5 * u ** (1.0 - delta)
    d_split = 0.5 * u ** (1.0 + delta)
    in_one = r <= c_split
    in_two = r >= 0.5 * math.exp(u ** delta)
    region = "I" if in_one else ("II" if in_two else "neither")
    return RegionTag(region=region, c_int=r <= c_split, c_ext=r >= c_split,
                     d_int=r <= d_split, d_ext=r >= d_split)


@dataclass
class ResidualRow:
    u: float
    v: float
    region: str
    field: str
    leading: float
    measured: float
    rel_residual: float


def _sample_indices(n, cap=220):
    # geometric thinning in radius; always keeps the first off-axis node
    if n <= 2:
        return np.array([], dtype=int)
    top = n - 1
    raw = np.geomspace(1.0, top, num=min(cap, top))
    return np.unique(np.round(raw).astype(int))


def _frame_pointwise(frame, grid):
    band = grid.lmax

    def synth(arr):
        return sphharm.synthesize(grid, sphharm.pad_coeffs(arr, frame.lmax, band))

    return synth(frame.Phi), synth(frame.Psi)


def residual_profile(frames, rec, consts=None, delta=0.1):
    """Residuals of both fields against their leading profiles.

    Emits one row per sampled slice point and field: region-I rows compare
    against c1*phi_L and c2*psi_L, region-II rows against the
    direction-dependent c3(w)*phi_L and the boundary-anchored psi
    expansion (reported in scaled absolute form).  Mean-field rows cover
    the whole cone.
    """
    if consts is None:
        consts = compute_constants(rec)
    grid = consts.grid
    lnv_out = math.log(rec.v_max)
    rows = []
    for frame in sorted(frames, key=lambda fr: fr.t):
        Phi_pts, Psi_pts = _frame_pointwise(frame, grid)
        for k in _sample_indices(frame.r.size):
            r = frame.r[k]
            u = frame.t - r
            v = frame.t + r
            if u <= 0.0:
                continue
            tag = region_classify(u, v, delta)
            phi = Phi_pts[k] / r
            psibar = Psi_pts[k] / r + 0.5 * phi ** 2
            phi0 = sphharm.sphere_mean(grid, phi)
            psibar0 = sphharm.sphere_mean(grid, psibar)
            phi_L = profiles.phi_leading(u, v)

            def emit(name, lead, meas):
                if abs(lead) < PREDICTION_FLOOR:
                    return
                rows.append(ResidualRow(
                    u=u, v=v, region=tag.region, field=name,
                    leading=float(lead), measured=float(meas),
                    rel_residual=float(abs(meas - lead) / abs(lead)),
                ))

            emit("phi_mean", consts.c1 * phi_L, phi0)
            if u > 1.0:
                emit("psibar_mean",
                     consts.c2 * profiles.psi_leading(u, v), psibar0)

            if tag.region == "I":
                lead = consts.c1 * phi_L
                if abs(lead) >= PREDICTION_FLOOR:
                    j = int(np.argmax(np.abs(phi - lead)))
                    emit("phi_regI", lead, phi[j])
                if u > 1.0:
                    lead = consts.c2 * profiles.psi_leading(u, v)
                    if abs(lead) >= PREDICTION_FLOOR:
                        j = int(np.argmax(np.abs(psibar - lead)))
                        emit("psibar_regI", lead, psibar[j])
            elif tag.region == "II":
                lead = consts.c3 * phi_L
                ok = np.abs(lead) >= PREDICTION_FLOOR
                if np.any(ok):
                    relv = np.abs(phi - lead)[ok] / np.abs(lead)[ok]
                    j = int(np.argmax(relv))
                    jj = np.nonzero(ok)[0][j]
                    emit("phi_regII", lead[jj], phi[jj])
                iu = int(round(u / rec.h))
                if 0 <= iu < rec.u.size:
                    Psi_inf = sphharm.synthesize(
                        grid, sphharm.pad_coeffs(rec.psi[iu], rec.lmax, grid.lmax))
                    lead = Psi_inf / r - consts.c4 * lnv_out / (r * v)
                    scale = r * v * u ** (delta / 4.0) / math.log(v)
                    scaled = np.abs(psibar - lead) * scale
                    j = int(np.argmax(scaled))
                    rows.append(ResidualRow(
                        u=u, v=v, region="II", field="psibar_regII",
                        leading=float(lead[j]), measured=float(psibar[j]),
                        rel_residual=float(scaled[j]),
                    ))
    return rows


@dataclass
class ModeResidualTable:
    ell: int
    delta_ell: float
    excited: bool
    C: np.ndarray                  # per-m flux coefficients, [2*ell+1]
    rows: list
    normalized: list               # rel_residual * u^{delta_ell}, row-aligned


def mode_flux_coefficients(rec):
    """Mode coefficients of the integrated squared flux int (d_t Psi)^2 du.

    Computed on the de-aliased grid and truncated back to the record band.
    """
    grid = sphharm.build_grid(2 * rec.lmax)
    B, _ = _pointwise(rec, grid)
    flux_pts = simpson_uniform(np.ascontiguousarray((0.5 * B).T) ** 2, rec.h)
    return sphharm.truncate_coeffs(sphharm.analyze(grid, flux_pts), rec.lmax)


def mode_profile_residual(ell, frames, rec, delta=0.1, delta_ell=None):
    """Compare one multipole against its late-time profile shape.

    Prediction per (ell, m) coefficient: sign/(2r) * C_lm * D_ell(u/r) in
    the wave-zone wedge r >= u^{1-delta_ell}.  A mode whose flux
    coefficients all sit below the prediction floor is reported unexcited
    rather than divided by.
    """
    if delta_ell is None:
        delta_ell = min(delta / 2.0, 1.0 / (4.0 * ell + 4.0))
    C_all = mode_flux_coefficients(rec)
    idx = [sphharm.mode_index(ell, m) for m in range(-ell, ell + 1)]
    C = C_all[idx]
    if float(np.max(np.abs(C))) < PREDICTION_FLOOR:
        return ModeResidualTable(ell=ell, delta_ell=delta_ell, excited=False,
                                 C=C, rows=[], normalized=[])
    rows, normed = [], []
    for frame in sorted(frames, key=lambda fr: fr.t):
        for k in _sample_indices(frame.r.size):
            r = frame.r[k]
            u = frame.t - r
            if u <= 0.0 or r < u ** (1.0 - delta_ell):
                continue
            tag = region_classify(u, frame.t + r, delta)
            # one quadrature per point, shared across m
            D = profiles.mode_profile_integral(ell, u / r)
            sign = 1.0 if ell == 0 else (-1.0) ** (ell + 1)
            for m, j in zip(range(-ell, ell + 1), idx):
                lead = sign * C[m + ell] * D / (2.0 * r)
                if abs(lead) < PREDICTION_FLOOR:
                    continue
                meas = frame.Phi[k, j] / r
                rel = abs(meas - lead) / abs(lead)
                rows.append(ResidualRow(
                    u=u, v=frame.t + r, region=tag.region,
                    field="phi_%d_%d" % (ell, m), leading=float(lead),
                    measured=float(meas), rel_residual=float(rel)))
                normed.append(float(rel * u ** delta_ell))
    return ModeResidualTable(ell=ell, delta_ell=delta_ell, excited=True, C=C,
                             rows=rows, normalized=normed)


@dataclass
class XDiagnostic:
    rows: list          # (u, v, sup_w |X|, scaled by u/ln u)
    sup_scaled: float


def x_diagnostic(frames, delta=0.1):
    """Cancellation check for X = U(r phi) - ln(v) (d_t Psi)^2.

    Sampled over the far-exterior wedge r >= u^{1+2 delta}/2 at u >= 2;
    the headline number is sup of |X| * u/ln u, which stays bounded only
    because the two terms cancel at leading order.
    """
    frames = sorted(frames, key=lambda fr: fr.t)
    if not frames:
        return XDiagnostic(rows=[], sup_scaled=0.0)
    grid = sphharm.build_grid(2 * frames[0].lmax)
    rows = []
    sup = 0.0
    for frame in frames:
        band = grid.lmax

        def synth(arr):
            return sphharm.synthesize(
                grid, sphharm.pad_coeffs(arr, frame.lmax, band))

        UPhi = synth(frame.dPhi_dt - frame.dPhi_dr)
        dtPsi = synth(frame.dPsi_dt)
        for k in _sample_indices(frame.r.size):
            r = frame.r[k]
            u = frame.t - r
            v = frame.t + r
            if u < 2.0:
                continue
            if not region_classify(u, v, 2.0 * delta).d_ext:
                continue
            X = UPhi[k] - math.log(v) * dtPsi[k] ** 2
            amp = float(np.max(np.abs(X)))
            scaled = amp * u / math.log(u)
            rows.append((u, v, amp, scaled))
            sup = max(sup, scaled)
    return XDiagnostic(rows=rows, sup_scaled=sup)
