"""Experiment driver: config files, run orchestration, flat-file emission.

Configs are INI-style text (diff-able provenance); bulk series go to CSV
and scalar summaries to JSON.  Floats are written with repr() so a
re-parse recovers the exact bits, which is what makes the golden-file and
thread-determinism checks meaningful.
"""

import argparse
import configparser
import csv
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__, sphharm
from .asympt import RadiationRecord, check_identities, compute_constants, \
    residual_profile
from .energetics import EnergySample, FitWindowError, cascade_trend, \
    fit_growth, hyperboloidal_energy
from .evolve import ConfigError, DataSpec, DivergenceError, NullGridSpec, \
    RunPlan, SliceBand, run

RADIATION_COLUMNS = ("u", "ell", "m", "Psi", "UPsi", "Phi", "Phi_over_lnv")
SLICE_COLUMNS = ("t", "u", "v", "ell", "m", "Phi", "Psi")
ENERGY_COLUMNS = ("t", "L2_phi", "L2_dphi", "L2_psi", "L2_dpsi",
                  "cascade_ratio", "E_hyp_phi")
RESIDUAL_COLUMNS = ("u", "v", "region", "field", "leading", "measured",
                    "rel_residual")

META_FORMAT = 1


# ---------------------------------------------------------------- config

@dataclass(frozen=True)
class RunConfig:
    grid: NullGridSpec
    data_phi: DataSpec
    data_psi: DataSpec
    linear: bool = False
    threads: int = 1
    seed: int = 0
    out: str = None
    delta: float = 0.1
    delta_ell: float = None
    report_times: tuple = ()
    fit_window: tuple = None
    hyperboloidal_times: tuple = ()

    def plan(self):
        return RunPlan(report_times=self.report_times, linear=self.linear,
                       threads=self.threads)


@dataclass(frozen=True)
class SweepConfig:
    grid: NullGridSpec
    samples: int
    eps_min: float
    eps_max: float
    tau: float          # per-sample threshold is tau * eps^2
    threads: int = 1
    seed: int = 0
    out: str = None

    def validate(self):
        if self.samples < 1:
            raise ConfigError("sweep.samples must be >= 1")
        if self.tau <= 0.0:
            raise ConfigError("sweep.tau must be > 0")
        if not (0.0 < self.eps_min <= self.eps_max):
            raise ConfigError("sweep.eps range needs 0 < eps_min <= eps_max")


_BOOLS = {"true": True, "yes": True, "1": True,
          "false": False, "no": False, "0": False}


def _parse_scalar(section, key, raw, conv):
    try:
        if conv is bool:
            return _BOOLS[raw.strip().lower()]
        return conv(raw)
    except (ValueError, KeyError):
        raise ConfigError(f"{section}.{key}: cannot parse {raw!r}")


def _parse_tuple(section, key, raw, conv, n=None):
    toks = raw.replace(",", " ").split()
    if n is not None and len(toks) != n:
        raise ConfigError(f"{section}.{key}: expected {n} values, got {raw!r}")
    return tuple(_parse_scalar(section, key, t, conv) for t in toks)


def _parse_modes(section, raw):
    # entries "ell,m:weight" separated by whitespace
    out = []
    for tok in raw.split():
        try:
            lm, w = tok.split(":")
            ell, m = lm.split(",")
            out.append(((int(ell), int(m)), float(w)))
        except ValueError:
            raise ConfigError(f"{section}.modes: bad entry {tok!r}, "
                              "expected ell,m:weight")
    return tuple(out)


def _check_keys(section, got, allowed):
    for key in got:
        if key not in allowed:
            raise ConfigError(f"unknown key {section}.{key}")


def _read_ini(path):
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    with open(path) as f:
        cp.read_file(f)
    return {name: dict(cp[name]) for name in cp.sections()}


def _grid_from_section(sec, name="grid"):
    _check_keys(name, sec, {"h", "u_max", "v_max", "v0", "l_max"})
    for key in ("h", "u_max", "v_max"):
        if key not in sec:
            raise ConfigError(f"missing key {name}.{key}")
    return NullGridSpec(
        h=_parse_scalar(name, "h", sec["h"], float),
        u_max=_parse_scalar(name, "u_max", sec["u_max"], float),
        v_max=_parse_scalar(name, "v_max", sec["v_max"], float),
        data_boundary=_parse_scalar(name, "V0", sec.get("v0", "2.0"), float),
        lmax=_parse_scalar(name, "L_max", sec.get("l_max", "0"), int),
    )


def _data_from_section(sec, name):
    _check_keys(name, sec, {"amplitude", "support", "modes"})
    kw = {"amplitude": _parse_scalar(name, "amplitude",
                                     sec.get("amplitude", "0.0"), float)}
    if "support" in sec:
        kw["support"] = _parse_tuple(name, "support", sec["support"], float, 2)
    if "modes" in sec:
        kw["modes"] = _parse_modes(name, sec["modes"])
    return DataSpec(**kw)


def parse_run_config(path):
    """Parse a run config file; raises ConfigError naming the bad field."""
    secs = _read_ini(path)
    known = {"grid", "data.phi", "data.psi", "run", "analysis"}
    for name in secs:
        if name not in known:
            raise ConfigError(f"unknown section [{name}]")
    if "grid" not in secs:
        raise ConfigError("missing section [grid]")

    grid = _grid_from_section(secs["grid"])
    data_phi = _data_from_section(secs.get("data.phi", {}), "data.phi")
    data_psi = _data_from_section(secs.get("data.psi", {}), "data.psi")

    rsec = secs.get("run", {})
    _check_keys("run", rsec, {"linear", "threads", "seed", "out"})
    asec = secs.get("analysis", {})
    _check_keys("analysis", asec, {"delta", "delta_ell", "report_times",
                                   "fit_window", "hyperboloidal_times"})

    kw = {}
    if "fit_window" in asec:
        kw["fit_window"] = _parse_tuple("analysis", "fit_window",
                                        asec["fit_window"], float, 2)
    if "delta_ell" in asec:
        kw["delta_ell"] = _parse_scalar("analysis", "delta_ell",
                                        asec["delta_ell"], float)
    return RunConfig(
        grid=grid, data_phi=data_phi, data_psi=data_psi,
        linear=_parse_scalar("run", "linear", rsec.get("linear", "false"),
                             bool),
        threads=_parse_scalar("run", "threads", rsec.get("threads", "1"), int),
        seed=_parse_scalar("run", "seed", rsec.get("seed", "0"), int),
        out=rsec.get("out"),
        delta=_parse_scalar("analysis", "delta", asec.get("delta", "0.1"),
                            float),
        report_times=_parse_tuple("analysis", "report_times",
                                  asec.get("report_times", ""), float),
        hyperboloidal_times=_parse_tuple("analysis", "hyperboloidal_times",
                                         asec.get("hyperboloidal_times", ""),
                                         float),
        **kw,
    )


def parse_sweep_config(path):
    secs = _read_ini(path)
    for name in secs:
        if name not in {"sweep", "grid"}:
            raise ConfigError(f"unknown section [{name}]")
    if "sweep" not in secs or "grid" not in secs:
        raise ConfigError("sweep config needs [sweep] and [grid] sections")
    ssec = secs["sweep"]
    _check_keys("sweep", ssec, {"samples", "eps_min", "eps_max", "tau",
                                "threads", "seed", "out"})
    for key in ("samples", "eps_min", "eps_max"):
        if key not in ssec:
            raise ConfigError(f"missing key sweep.{key}")
    cfg = SweepConfig(
        grid=_grid_from_section(secs["grid"]),
        samples=_parse_scalar("sweep", "samples", ssec["samples"], int),
        eps_min=_parse_scalar("sweep", "eps_min", ssec["eps_min"], float),
        eps_max=_parse_scalar("sweep", "eps_max", ssec["eps_max"], float),
        tau=_parse_scalar("sweep", "tau", ssec.get("tau", "1e-12"), float),
        threads=_parse_scalar("sweep", "threads", ssec.get("threads", "1"),
                              int),
        seed=_parse_scalar("sweep", "seed", ssec.get("seed", "0"), int),
        out=ssec.get("out"),
    )
    cfg.validate()
    return cfg


def _grid_map(g):
    return {"h": g.h, "u_max": g.u_max, "v_max": g.v_max,
            "V0": g.data_boundary, "L_max": g.lmax}


def config_mapping(cfg):
    """Plain-dict echo of a RunConfig, JSON-safe and re-parseable."""
    def data_map(d):
        return {"amplitude": d.amplitude, "support": list(d.support),
                "modes": [[ell, m, w] for (ell, m), w in d.modes]}
    return {
        "grid": _grid_map(cfg.grid),
        "data.phi": data_map(cfg.data_phi),
        "data.psi": data_map(cfg.data_psi),
        "run": {"linear": cfg.linear, "threads": cfg.threads,
                "seed": cfg.seed, "out": cfg.out},
        "analysis": {"delta": cfg.delta, "delta_ell": cfg.delta_ell,
                     "report_times": list(cfg.report_times),
                     "fit_window": list(cfg.fit_window)
                     if cfg.fit_window else None,
                     "hyperboloidal_times": list(cfg.hyperboloidal_times)},
    }


def config_from_mapping(m):
    g = m["grid"]
    grid = NullGridSpec(h=g["h"], u_max=g["u_max"], v_max=g["v_max"],
                        data_boundary=g["V0"], lmax=g["L_max"])

    def data_spec(d):
        return DataSpec(amplitude=d["amplitude"],
                        support=tuple(d["support"]),
                        modes=tuple(((ell, m), w)
                                    for ell, m, w in d["modes"]))
    r, a = m["run"], m["analysis"]
    return RunConfig(
        grid=grid, data_phi=data_spec(m["data.phi"]),
        data_psi=data_spec(m["data.psi"]),
        linear=r["linear"], threads=r["threads"], seed=r["seed"],
        out=r["out"], delta=a["delta"], delta_ell=a["delta_ell"],
        report_times=tuple(a["report_times"]),
        fit_window=tuple(a["fit_window"]) if a["fit_window"] else None,
        hyperboloidal_times=tuple(a.get("hyperboloidal_times", ())),
    )


# ---------------------------------------------------------------- file IO

def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def _jsonable(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x]
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    return x


def _write_json(path, obj):
    with open(path, "w") as f:
        json.dump(_jsonable(obj), f, indent=1, sort_keys=True)
        f.write("\n")


def write_radiation(path, rec):
    modes = sphharm.mode_list(rec.lmax)
    rows = []
    for i, u in enumerate(rec.u):
        for k, (ell, m) in enumerate(modes):
            rows.append((u, ell, m, rec.psi[i, k], rec.upsi[i, k],
                         rec.phi[i, k], rec.phi_over_lnv[i, k]))
    _write_csv(path, RADIATION_COLUMNS, rows)


def read_radiation(path, v_max):
    rows = _read_csv(path, RADIATION_COLUMNS)
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    lmax = max(int(r["ell"]) for r in rows)
    u_vals = []
    seen = {}
    for r in rows:
        u = float(r["u"])
        if u not in seen:
            seen[u] = len(u_vals)
            u_vals.append(u)
    nm = sphharm.n_modes(lmax)
    arrs = {name: np.zeros((len(u_vals), nm))
            for name in ("Psi", "UPsi", "Phi", "Phi_over_lnv")}
    for r in rows:
        i = seen[float(r["u"])]
        k = sphharm.mode_index(int(r["ell"]), int(r["m"]))
        for name in arrs:
            arrs[name][i, k] = float(r[name])
    u = np.array(u_vals)
    return RadiationRecord(u=u, psi=arrs["Psi"], upsi=arrs["UPsi"],
                           phi=arrs["Phi"], phi_over_lnv=arrs["Phi_over_lnv"],
                           lmax=lmax, v_max=v_max, h=float(u[1] - u[0]))


def _read_csv(path, expect_columns):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"missing file {path}")
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != tuple(expect_columns):
            raise ConfigError(
                f"{path}: header {reader.fieldnames} != {list(expect_columns)}")
        return list(reader)


def write_slices(path, slices):
    rows = []
    for m in sorted(slices):
        b = slices[m]
        modes = sphharm.mode_list(b.lmax)
        for n in range(b.u_index.size):
            u = b.u_index[n] * b.h
            v = b.v_index[n] * b.h
            for k, (ell, mm) in enumerate(modes):
                rows.append((b.t, u, v, ell, mm, b.Phi[n, k], b.Psi[n, k]))
    _write_csv(path, SLICE_COLUMNS, rows)


def read_slices(path, h):
    rows = _read_csv(path, SLICE_COLUMNS)
    groups = {}
    for r in rows:
        groups.setdefault(float(r["t"]), []).append(r)
    out = {}
    for t, grp in sorted(groups.items()):
        lmax = max(int(r["ell"]) for r in grp)
        nm = sphharm.n_modes(lmax)
        pts = sorted({(int(round(float(r["u"]) / h)),
                       int(round(float(r["v"]) / h))) for r in grp})
        slot = {p: n for n, p in enumerate(pts)}
        Phi = np.zeros((len(pts), nm))
        Psi = np.zeros((len(pts), nm))
        for r in grp:
            n = slot[(int(round(float(r["u"]) / h)),
                      int(round(float(r["v"]) / h)))]
            k = sphharm.mode_index(int(r["ell"]), int(r["m"]))
            Phi[n, k] = float(r["Phi"])
            Psi[n, k] = float(r["Psi"])
        m = int(round(t / h))
        out[m] = SliceBand(
            t=t, h=h, lmax=lmax,
            u_index=np.array([p[0] for p in pts]),
            v_index=np.array([p[1] for p in pts]), Phi=Phi, Psi=Psi)
    return out


def write_energies(path, samples):
    rows = []
    for s in samples:
        e = "" if s.e_hyp_phi is None else s.e_hyp_phi
        rows.append((s.t, s.l2_phi, s.l2_dphi, s.l2_psi, s.l2_dpsi,
                     s.cascade_ratio, e))
    _write_csv(path, ENERGY_COLUMNS, rows)


def read_energies(path):
    out = []
    for r in _read_csv(path, ENERGY_COLUMNS):
        out.append(EnergySample(
            t=float(r["t"]), l2_phi=float(r["L2_phi"]),
            l2_dphi=float(r["L2_dphi"]), l2_psi=float(r["L2_psi"]),
            l2_dpsi=float(r["L2_dpsi"]),
            cascade_ratio=float(r["cascade_ratio"]),
            e_hyp_phi=float(r["E_hyp_phi"]) if r["E_hyp_phi"] else None))
    return out


def _write_meta(out_dir, cfg, status, error, wall, outputs):
    _write_json(out_dir / "meta.json", {
        "format": META_FORMAT,
        "code_version": __version__,
        "status": status,
        "error": error,
        "wall_time_s": wall,
        "config": config_mapping(cfg),
        "outputs": sorted(outputs),
    })


def read_meta(run_dir):
    path = Path(run_dir) / "meta.json"
    if not path.exists():
        raise ConfigError(f"missing file {path}")
    with open(path) as f:
        return json.load(f)


def load_run(run_dir, need_slices=False):
    """Record (+ optionally slice bands) of a finished run directory."""
    run_dir = Path(run_dir)
    meta = read_meta(run_dir)
    cfg = config_from_mapping(meta["config"])
    rec = read_radiation(run_dir / "radiation.csv", cfg.grid.v_max)
    if not need_slices:
        return meta, cfg, rec, None
    return meta, cfg, rec, read_slices(run_dir / "slices.csv", cfg.grid.h)


# ---------------------------------------------------------------- commands

def cmd_evolve(cfg, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        res = run(cfg.grid, cfg.data_phi, cfg.data_psi, cfg.plan())
    except DivergenceError as e:
        _write_meta(out_dir, cfg, "diverged", str(e),
                    time.perf_counter() - t0, [])
        print(f"evolve: diverged: {e}", file=sys.stderr)
        return 1
    write_radiation(out_dir / "radiation.csv", res.record)
    write_slices(out_dir / "slices.csv", res.slices)
    write_energies(out_dir / "energies.csv", res.energies)
    _write_meta(out_dir, cfg, "ok", None, time.perf_counter() - t0,
                ["radiation.csv", "slices.csv", "energies.csv"])
    return 0


def cmd_constants(run_dir):
    run_dir = Path(run_dir)
    meta, cfg, rec, _ = load_run(run_dir)
    consts = compute_constants(rec)
    rep = check_identities(rec, consts)
    _write_json(run_dir / "constants.json", {
        "c1": consts.c1, "c2": consts.c2, "c5": consts.c5,
        "c3": consts.c3, "c4": consts.c4,
        "c3_min": float(np.min(consts.c3)),
        "c3_max": float(np.max(consts.c3)),
        "c4_min": float(np.min(consts.c4)),
        "c4_max": float(np.max(consts.c4)),
        "u_max": consts.u_max, "v_max": consts.v_max,
        "warnings": consts.warnings,
        "identities": {
            "relation_sup": rep.relation_sup,
            "relation_sup_rel": rep.relation_sup_rel,
            "plateau": rep.plateau,
            "c4_gap": rep.c4_gap, "c4_gap_rel": rep.c4_gap_rel,
            "c1_mean_gap": rep.c1_mean_gap, "c2_mean_gap": rep.c2_mean_gap,
        },
    })
    return 0


def cmd_residuals(run_dir):
    run_dir = Path(run_dir)
    meta, cfg, rec, slices = load_run(run_dir, need_slices=True)
    frames = [slices[m].frame() for m in sorted(slices)]
    rows = residual_profile(frames, rec, delta=cfg.delta)
    _write_csv(run_dir / "residuals.csv", RESIDUAL_COLUMNS,
               [(r.u, r.v, r.region, r.field, r.leading, r.measured,
                 r.rel_residual) for r in rows])
    return 0


def cmd_energies(run_dir):
    run_dir = Path(run_dir)
    meta, cfg, rec, slices = load_run(run_dir, need_slices=True)
    samples = read_energies(run_dir / "energies.csv")
    ts = [s.t for s in samples]

    def try_fit(ys, model):
        try:
            return fit_growth(ts, ys, model, window=cfg.fit_window)
        except (FitWindowError, ValueError) as e:
            return str(e)

    def fit_map(fit):
        if isinstance(fit, str):
            return {"error": fit}
        return {"model": fit.model, "params": list(fit.params),
                "window": list(fit.window), "rms": fit.rms,
                "n_samples": fit.n_samples}

    hyp = []
    if cfg.hyperboloidal_times:
        frames = [slices[m].frame() for m in sorted(slices)]
        for s in cfg.hyperboloidal_times:
            try:
                e = hyperboloidal_energy(s, frames)
            except (ValueError, ZeroDivisionError) as err:
                hyp.append({"s": s, "error": str(err)})
                continue
            hyp.append({"s": s, "E_hyp_phi": e})
            for samp in samples:
                if abs(samp.t - s) < 1e-9:
                    samp.e_hyp_phi = e
        write_energies(run_dir / "energies.csv", samples)

    _, _, rho = cascade_trend(samples)
    _write_json(run_dir / "energies_summary.json", {
        "n_samples": len(samples),
        "t_range": [min(ts), max(ts)] if ts else None,
        "fits": {
            "phi_power": fit_map(try_fit([s.l2_phi for s in samples],
                                         "power")),
            "dphi_log": fit_map(try_fit([s.l2_dphi for s in samples], "log")),
        },
        "cascade_rho": rho,
        "hyperboloidal": hyp,
    })
    return 0


def cmd_convergence(run_dirs, out_path):
    """Order-of-accuracy report from three runs at h, h/2, h/4."""
    if len(run_dirs) != 3:
        raise ConfigError("convergence needs exactly 3 run directories")
    recs = []
    for d in run_dirs:
        _, cfg, rec, _ = load_run(d)
        recs.append(rec)
    hs = [rec.h for rec in recs]
    for k in (0, 1):
        if not math.isclose(hs[k], 2.0 * hs[k + 1], rel_tol=1e-9):
            raise ConfigError(
                f"run grids must halve: h = {hs[0]:g}, {hs[1]:g}, {hs[2]:g}")
        if recs[k].u[-1] != recs[k + 1].u[-1] \
                or recs[k].v_max != recs[k + 1].v_max \
                or recs[k].lmax != recs[k + 1].lmax:
            raise ConfigError("runs cover different domains")

    report = {"hs": hs, "orders": {}, "differences": {}, "flags": {}}
    for name in ("psi_extraction", "phi_extraction"):
        field = "psi" if name.startswith("psi") else "phi"
        # compare on the coarse-grid u nodes shared by all three runs
        vals = [getattr(recs[k], field)[:: 2 ** k] for k in range(3)]
        diffs = [float(np.max(np.abs(vals[k + 1] - vals[k])))
                 for k in range(2)]
        if max(diffs) == 0.0:
            order, flag = None, "undefined"
        elif diffs[1] == 0.0 or diffs[1] >= diffs[0]:
            order, flag = None, "non-monotone"
        else:
            order, flag = math.log2(diffs[0] / diffs[1]), ""
        report["differences"][name] = diffs
        report["orders"][name] = order
        report["flags"][name] = flag
    _write_json(out_path, report)
    return 0


def _sweep_member(grid, seed, index, eps_min, eps_max):
    # counter-based stream keyed by (seed, index): member i is the same
    # no matter how the pool schedules it
    rng = np.random.Generator(np.random.Philox(key=[seed, index]))
    eps = float(rng.uniform(eps_min, eps_max))
    V0 = grid.data_boundary

    def support():
        return (V0 * float(rng.uniform(0.05, 0.45)),
                V0 * float(rng.uniform(0.55, 0.95)))

    data_phi = DataSpec(amplitude=eps * float(rng.uniform(0.0, 1.0)),
                        support=support())
    data_psi = DataSpec(amplitude=eps, support=support())
    base = {"index": index, "eps": eps,
            "amplitude_phi": data_phi.amplitude,
            "support_phi": list(data_phi.support),
            "support_psi": list(data_psi.support)}
    try:
        res = run(grid, data_phi, data_psi)
    except DivergenceError as e:
        base["diverged"] = str(e)
        return base
    consts = compute_constants(res.record)
    base.update({
        "c1": consts.c1, "c2": consts.c2,
        "c3_min": float(np.min(consts.c3)),
        "c3_max": float(np.max(consts.c3)),
        "c4_min": float(np.min(consts.c4)),
        "c4_max": float(np.max(consts.c4)),
    })
    return base


def cmd_generic_sweep(cfg, out_dir):
    cfg.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def member(i):
        return _sweep_member(cfg.grid, cfg.seed, i, cfg.eps_min, cfg.eps_max)

    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            members = list(pool.map(member, range(cfg.samples)))
    else:
        members = [member(i) for i in range(cfg.samples)]

    ok = []
    for mem in members:
        if "diverged" in mem:
            continue
        mem["tau"] = cfg.tau * mem["eps"] ** 2
        mem["c1_above"] = mem["c1"] > mem["tau"]
        ok.append(mem)
    _write_json(out_dir / "sweep.json", {
        "config": {"samples": cfg.samples, "eps_min": cfg.eps_min,
                   "eps_max": cfg.eps_max, "tau": cfg.tau, "seed": cfg.seed,
                   "grid": _grid_map(cfg.grid)},
        "members": members,
        "n_ok": len(ok),
        "n_diverged": len(members) - len(ok),
        "fraction_c1_above": (sum(m["c1_above"] for m in ok) / len(ok))
        if ok else None,
        "pairs_c1_c2": [[m["c1"], m["c2"]] for m in ok],
    })
    return 0


def cmd_report(cfg, out_dir):
    rc = cmd_evolve(cfg, out_dir)
    if rc != 0:
        return rc
    cmd_constants(out_dir)
    cmd_residuals(out_dir)
    cmd_energies(out_dir)
    return 0


# ---------------------------------------------------------------- entry

def _apply_overrides(cfg, args):
    kw = {}
    if args.threads is not None:
        kw["threads"] = args.threads
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.linear:
        kw["linear"] = True
    return replace(cfg, **kw) if kw else cfg


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="nullwave",
        description="Characteristic evolution runs and their analysis files")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_config_cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--linear", action="store_true")
        return p

    add_config_cmd("evolve", "run one configuration, write the run files")
    add_config_cmd("report", "evolve plus every analysis product")

    for name, help_ in (("constants", "radiation constants and identities"),
                        ("residuals", "profile residuals from slices"),
                        ("energies", "norm growth fits and energy summary")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("run_dir")

    p = sub.add_parser("convergence", help="order report from an h-ladder")
    p.add_argument("run_dirs", nargs=3)
    p.add_argument("--out", default="convergence.json")

    p = sub.add_parser("generic-sweep", help="random-data sweep of c1, c2")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)

    args = ap.parse_args(argv)
    try:
        if args.command in ("evolve", "report"):
            cfg = _apply_overrides(parse_run_config(args.config), args)
            out = args.out or cfg.out
            if out is None:
                raise ConfigError("no output directory: set --out or run.out")
            fn = cmd_evolve if args.command == "evolve" else cmd_report
            return fn(cfg, out)
        if args.command == "constants":
            return cmd_constants(args.run_dir)
        if args.command == "residuals":
            return cmd_residuals(args.run_dir)
        if args.command == "energies":
            return cmd_energies(args.run_dir)
        if args.command == "convergence":
            return cmd_convergence(args.run_dirs, args.out)
        if args.command == "generic-sweep":
            cfg = parse_sweep_config(args.config)
            if args.threads is not None:
                cfg = replace(cfg, threads=args.threads)
            if args.seed is not None:
                cfg = replace(cfg, seed=args.seed)
            out = args.out or cfg.out
            if out is None:
                raise ConfigError("no output directory: set --out or sweep.out")
            return cmd_generic_sweep(cfg, out)
    except ConfigError as e:
        print(f"nullwave {args.command}: {e}", file=sys.stderr)
        return 2
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
