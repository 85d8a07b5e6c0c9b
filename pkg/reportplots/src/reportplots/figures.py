"""The four figure kinds.

Every renderer takes a FigureSpec, writes one PNG, and returns the
output path plus the annotation values it printed, so tests can hold
the annotations to the upstream fit files without parsing pixels.
Slope annotations are copied verbatim from the fit JSON; nothing is
re-fitted here.
"""

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from numpy.polynomial.legendre import leggauss

from . import schema
from .schema import SchemaError

FIGURE_KINDS = (
    "residual-vs-u",
    "energy-growth",
    "c3-sphere-map",
    "identity-residual-vs-vmax",
)


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    indir: str
    outdir: str

    def validate(self):
        if self.kind not in FIGURE_KINDS:
            raise SchemaError("unknown figure kind %r" % self.kind)


@dataclass
class FigureResult:
    path: Path
    annotations: dict = field(default_factory=dict)


def _finish(fig, outdir, name):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / name
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _log_safe(ax, xs, ys):
    # log axes only when there is something positive to put on them
    return xs.size > 0 and np.any(xs > 0) and np.any(ys > 0)


def render_residual_vs_u(spec):
    run = schema.run_dirs(spec.indir)[0]
    data = schema.read_residuals(run / "residuals.csv")
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    fields = sorted(set(data["field"]))
    plotted = False
    for name in fields:
        sel = np.array([f == name for f in data["field"]])
        u = data["u"][sel]
        rel = data["rel_residual"][sel]
        keep = (u > 0) & (rel > 0) & np.isfinite(rel)
        if not keep.any():
            continue
        order = np.argsort(u[keep])
        ax.plot(u[keep][order], rel[keep][order], ".", ms=3, label=name)
        plotted = True
    if plotted:
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.legend(fontsize=8)
    else:
        ax.text(0.5, 0.5, "no residual rows", ha="center", va="center",
                transform=ax.transAxes)
    ax.set_xlabel("u")
    ax.set_ylabel("relative residual")
    ax.set_title("leading-order residuals")
    return FigureResult(_finish(fig, spec.outdir, "residual_vs_u.png"))


def render_energy_growth(spec):
    run = schema.run_dirs(spec.indir)[0]
    en = schema.read_energies(run / "energies.csv")
    summary = schema.read_energy_summary(run / "energies_summary.json")
    fits = summary["fits"]
    t = en["t"]
    ann = {}

    fig, (axl, axr) = plt.subplots(1, 2, figsize=(10.0, 4.2))

    axl.set_xlabel("t")
    axl.set_ylabel("|phi|")
    if _log_safe(axl, t, en["L2_phi"]):
        axl.loglog(t, en["L2_phi"], "o-", ms=3, label="measured")
        pf = fits.get("phi_power") or {}
        if "params" in pf:
            p, a = pf["params"]
            ann["phi_power_p"] = p
            tw = np.geomspace(max(t[t > 0].min(), 1e-12), t.max(), 64)
            axl.loglog(tw, a * tw ** p, "--", label="fit")
            axl.annotate("slope p = %.6f" % p, xy=(0.05, 0.92),
                         xycoords="axes fraction", fontsize=9)
        axl.legend(fontsize=8)
    else:
        axl.plot(t, en["L2_phi"], "o-", ms=3)

    axr.set_xlabel("ln t")
    axr.set_ylabel("|d phi|")
    pos = t > 0
    lt = np.log(t[pos])
    axr.plot(lt, en["L2_dphi"][pos], "o", ms=3, label="measured")
    lf = fits.get("dphi_log") or {}
    if "params" in lf and lt.size:
        a, b = lf["params"]
        ann["dphi_log_a"] = a
        axr.plot(lt, a * lt + b, "--", label="fit")
        axr.annotate("slope a = %.6f" % a, xy=(0.05, 0.92),
                     xycoords="axes fraction", fontsize=9)
    axr.legend(fontsize=8)

    fig.suptitle("energy growth")
    fig.tight_layout()
    return FigureResult(_finish(fig, spec.outdir, "energy_growth.png"),
                        annotations=ann)


def render_c3_sphere_map(spec):
    run = schema.run_dirs(spec.indir)[0]
    consts = schema.read_constants(run / "constants.json")
    c3 = np.atleast_1d(np.asarray(consts["c3"], dtype=float))
    n_theta, n_phi = schema.sphere_layout(c3.size)
    vals = c3.reshape(n_theta, n_phi)

    # cell edges: latitude nodes are Gauss-Legendre in cos(theta),
    # longitudes uniform; edges at midpoints, capped at the poles
    x, _ = leggauss(n_theta)
    xe = np.concatenate([[-1.0], 0.5 * (x[1:] + x[:-1]), [1.0]])
    pe = np.linspace(0.0, 2.0 * np.pi, n_phi + 1)

    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    mesh = ax.pcolormesh(pe, xe, vals, shading="flat")
    fig.colorbar(mesh, ax=ax, label="c3")
    ax.set_xlabel("longitude")
    ax.set_ylabel("cos latitude")
    ax.set_title("directional flux constant")
    return FigureResult(_finish(fig, spec.outdir, "c3_sphere_map.png"))


def render_identity_residual_vs_vmax(spec):
    pts = []
    for run in schema.run_dirs(spec.indir):
        consts = schema.read_constants(run / "constants.json")
        ident = consts["identities"]
        pts.append((float(consts["v_max"]),
                    float(ident["relation_sup_rel"]),
                    float(ident["c4_gap_rel"])))
    pts.sort()
    v = np.array([p[0] for p in pts])
    rel = np.array([p[1] for p in pts])
    gap = np.array([p[2] for p in pts])

    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    ax.plot(v, rel, "o-", label="flux relation sup / plateau")
    ax.plot(v, gap, "s-", label="c4 product gap / c4")
    if np.any(v > 0):
        ax.set_xscale("log")
    ax.set_xlabel("v_max")
    ax.set_ylabel("relative residual")
    ax.set_title("boundary identity residuals")
    ax.legend(fontsize=8)
    return FigureResult(
        _finish(fig, spec.outdir, "identity_residual_vs_vmax.png"))


_RENDERERS = {
    "residual-vs-u": render_residual_vs_u,
    "energy-growth": render_energy_growth,
    "c3-sphere-map": render_c3_sphere_map,
    "identity-residual-vs-vmax": render_identity_residual_vs_vmax,
}


def render(spec):
    spec.validate()
    return _RENDERERS[spec.kind](spec)
