import json
import math

import numpy as np
import pytest

from nullwave import cli
from nullwave.evolve import ConfigError, DataSpec, NullGridSpec, RunPlan, run

MINIMAL = """
[grid]
h = 0.1
u_max = 8
v_max = 16
V0 = 2.0
L_max = 0

[data.psi]
amplitude = 0.05
support = 0.5 2.0
"""


def write_config(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def evolve_dir(tmp_path, text=MINIMAL, name="r"):
    cfgp = write_config(tmp_path, text, name + ".ini")
    out = tmp_path / name
    assert cli.main(["evolve", "--config", cfgp, "--out", str(out)]) == 0
    return out


class TestConfigParsing:
    def test_defaults(self, tmp_path):
        cfg = cli.parse_run_config(write_config(tmp_path, MINIMAL))
        assert cfg.grid.h == 0.1
        assert cfg.grid.data_boundary == 2.0
        assert cfg.data_phi.amplitude == 0.0
        assert cfg.data_psi.amplitude == 0.05
        assert not cfg.linear
        assert cfg.threads == 1
        assert cfg.report_times == ()
        assert cfg.delta == 0.1

    def test_modes_syntax(self, tmp_path):
        text = MINIMAL + "\n[data.phi]\namplitude = 0.01\nmodes = 0,0:1.0 1,0:0.5\n"
        text = text.replace("L_max = 0", "L_max = 1")
        cfg = cli.parse_run_config(write_config(tmp_path, text))
        assert cfg.data_phi.modes == (((0, 0), 1.0), ((1, 0), 0.5))

    def test_unknown_key_has_field_path(self, tmp_path):
        bad = MINIMAL.replace("h = 0.1", "h = 0.1\nhh = 1")
        with pytest.raises(ConfigError, match="grid.hh"):
            cli.parse_run_config(write_config(tmp_path, bad))

    def test_unknown_section(self, tmp_path):
        with pytest.raises(ConfigError, match="gird"):
            cli.parse_run_config(
                write_config(tmp_path, MINIMAL + "\n[gird]\nh = 1\n"))

    def test_bad_value_named(self, tmp_path):
        bad = MINIMAL.replace("h = 0.1", "h = fast")
        with pytest.raises(ConfigError, match="grid.h"):
            cli.parse_run_config(write_config(tmp_path, bad))

    def test_report_time_past_half_vmax(self, tmp_path):
        cfgp = write_config(
            tmp_path, MINIMAL + "\n[analysis]\nreport_times = 9\n")
        rc = cli.main(["evolve", "--config", cfgp,
                       "--out", str(tmp_path / "r")])
        assert rc == 2

    def test_roundtrip_through_mapping(self, tmp_path):
        text = MINIMAL + ("\n[analysis]\nreport_times = 3 6\n"
                          "fit_window = 2 12\ndelta = 0.2\n"
                          "\n[run]\nthreads = 2\nseed = 7\nlinear = true\n")
        cfg = cli.parse_run_config(write_config(tmp_path, text))
        echo = json.loads(json.dumps(cli.config_mapping(cfg)))
        assert cli.config_from_mapping(echo) == cfg


class TestEvolveCommand:
    def test_zero_data_writes_zero_csvs(self, tmp_path):
        out = evolve_dir(tmp_path, MINIMAL.replace("amplitude = 0.05",
                                                   "amplitude = 0.0"))
        rec = cli.read_radiation(out / "radiation.csv", v_max=16.0)
        assert np.all(rec.psi == 0.0) and np.all(rec.phi == 0.0)
        meta = cli.read_meta(out)
        assert meta["status"] == "ok"
        assert meta["outputs"] == ["energies.csv", "radiation.csv",
                                   "slices.csv"]

    def test_schema_headers_pinned(self, tmp_path):
        out = evolve_dir(tmp_path, MINIMAL + "\n[analysis]\nreport_times = 4\n")
        heads = {
            "radiation.csv": "u,ell,m,Psi,UPsi,Phi,Phi_over_lnv",
            "slices.csv": "t,u,v,ell,m,Phi,Psi",
            "energies.csv":
                "t,L2_phi,L2_dphi,L2_psi,L2_dpsi,cascade_ratio,E_hyp_phi",
        }
        for name, head in heads.items():
            with open(out / name) as f:
                assert f.readline().strip() == head

    def test_radiation_roundtrip_is_bitwise(self, tmp_path):
        out = evolve_dir(tmp_path)
        cfg = cli.parse_run_config(str(tmp_path / "r.ini"))
        res = run(cfg.grid, cfg.data_phi, cfg.data_psi, cfg.plan())
        back = cli.read_radiation(out / "radiation.csv", cfg.grid.v_max)
        assert np.array_equal(back.u, res.record.u)
        assert np.array_equal(back.psi, res.record.psi)
        assert np.array_equal(back.upsi, res.record.upsi)
        assert np.array_equal(back.phi, res.record.phi)

    def test_slices_roundtrip_rebuilds_frames(self, tmp_path):
        out = evolve_dir(tmp_path, MINIMAL + "\n[analysis]\nreport_times = 4\n")
        cfg = cli.parse_run_config(str(tmp_path / "r.ini"))
        res = run(cfg.grid, cfg.data_phi, cfg.data_psi,
                  RunPlan(report_times=(4.0,)))
        bands = cli.read_slices(out / "slices.csv", cfg.grid.h)
        assert list(bands) == [40]
        mine = bands[40].frame()
        ref = res.slices[40].frame()
        assert np.array_equal(mine.r, ref.r)
        assert np.array_equal(mine.Phi, ref.Phi)
        assert np.array_equal(mine.dPsi_dt, ref.dPsi_dt)

    def test_meta_echo_reparses_to_same_config(self, tmp_path):
        out = evolve_dir(tmp_path)
        cfg = cli.parse_run_config(str(tmp_path / "r.ini"))
        meta = cli.read_meta(out)
        assert cli.config_from_mapping(meta["config"]) == cfg
        assert meta["format"] == cli.META_FORMAT
        assert meta["wall_time_s"] >= 0.0

    def test_divergence_flagged_in_meta(self, tmp_path):
        text = MINIMAL.replace("amplitude = 0.05", "amplitude = 2000.0")
        cfgp = write_config(tmp_path, text)
        out = tmp_path / "r"
        rc = cli.main(["evolve", "--config", cfgp, "--out", str(out)])
        assert rc == 1
        meta = cli.read_meta(out)
        assert meta["status"] == "diverged"
        assert "amplitude" in meta["error"]
        assert not (out / "radiation.csv").exists()


class TestConstantsCommand:
    def test_zero_run_gives_zeros(self, tmp_path):
        out = evolve_dir(tmp_path, MINIMAL.replace("amplitude = 0.05",
                                                   "amplitude = 0.0"))
        assert cli.main(["constants", str(out)]) == 0
        c = json.loads((out / "constants.json").read_text())
        assert c["c1"] == 0.0 and c["c2"] == 0.0 and c["c5"] == 0.0

    def test_missing_radiation_is_error(self, tmp_path):
        out = evolve_dir(tmp_path)
        (out / "radiation.csv").unlink()
        assert cli.main(["constants", str(out)]) == 2

    def test_identity_fields_present(self, tmp_path):
        out = evolve_dir(tmp_path)
        cli.main(["constants", str(out)])
        c = json.loads((out / "constants.json").read_text())
        assert c["c1"] > 0.0
        ids = c["identities"]
        for key in ("relation_sup", "plateau", "c4_gap", "c1_mean_gap"):
            assert key in ids

    def test_thread_count_does_not_change_bytes(self, tmp_path):
        text = MINIMAL.replace("L_max = 0", "L_max = 1") + \
            "\n[data.phi]\namplitude = 0.02\nmodes = 1,0:1.0\n"
        blobs = []
        for n, name in ((1, "a"), (4, "b")):
            cfgp = write_config(tmp_path, text, name + ".ini")
            out = tmp_path / name
            assert cli.main(["evolve", "--config", cfgp, "--out", str(out),
                             "--threads", str(n)]) == 0
            assert cli.main(["constants", str(out)]) == 0
            blobs.append((out / "constants.json").read_bytes())
        assert blobs[0] == blobs[1]


class TestAnalysisCommands:
    def test_residuals_rows_parse(self, tmp_path):
        out = evolve_dir(tmp_path, MINIMAL + "\n[analysis]\nreport_times = 4 6\n")
        assert cli.main(["residuals", str(out)]) == 0
        rows = cli._read_csv(out / "residuals.csv", cli.RESIDUAL_COLUMNS)
        assert rows
        for r in rows:
            assert r["region"] in ("I", "II", "neither")
            assert math.isfinite(float(r["rel_residual"]))
            assert float(r["u"]) > 0.0

    def test_energies_summary_with_fits(self, tmp_path):
        times = " ".join(str(t) for t in range(2, 21, 2))
        text = MINIMAL.replace("u_max = 8", "u_max = 22") \
                      .replace("v_max = 16", "v_max = 44") + \
            f"\n[analysis]\nreport_times = {times}\nfit_window = 2 20\n"
        out = evolve_dir(tmp_path, text)
        assert cli.main(["energies", str(out)]) == 0
        s = json.loads((out / "energies_summary.json").read_text())
        assert s["n_samples"] == 10
        p, a = s["fits"]["phi_power"]["params"]
        assert math.isfinite(p) and a > 0.0
        assert "params" in s["fits"]["dphi_log"]
        assert -1.0 <= s["cascade_rho"] <= 1.0

    def test_energies_hyperboloidal_entries(self, tmp_path):
        times = " ".join(str(t) for t in range(2, 21, 2))
        text = MINIMAL.replace("u_max = 8", "u_max = 22") \
                      .replace("v_max = 16", "v_max = 44") + \
            f"\n[analysis]\nreport_times = {times}\n" \
            "hyperboloidal_times = 3 100\n"
        out = evolve_dir(tmp_path, text)
        assert cli.main(["energies", str(out)]) == 0
        s = json.loads((out / "energies_summary.json").read_text())
        assert [entry["s"] for entry in s["hyperboloidal"]] == [3.0, 100.0]
        # s=100 has no slice coverage at all, so it must carry an error
        assert "error" in s["hyperboloidal"][1]


class TestConvergenceCommand:
    def ladder(self, tmp_path, amp="0.05"):
        dirs = []
        for i, h in enumerate(("0.2", "0.1", "0.05")):
            text = MINIMAL.replace("h = 0.1", f"h = {h}") \
                          .replace("amplitude = 0.05", f"amplitude = {amp}")
            dirs.append(str(evolve_dir(tmp_path, text, name=f"r{i}")))
        return dirs

    def test_orders_reported(self, tmp_path):
        out = tmp_path / "conv.json"
        rc = cli.main(["convergence", *self.ladder(tmp_path),
                       "--out", str(out)])
        assert rc == 0
        rep = json.loads(out.read_text())
        assert rep["hs"] == [0.2, 0.1, 0.05]
        for name in ("psi_extraction", "phi_extraction"):
            assert rep["flags"][name] == ""
            assert 1.0 < rep["orders"][name] < 3.0

    def test_identical_zero_runs_flagged_degenerate(self, tmp_path):
        out = tmp_path / "conv.json"
        rc = cli.main(["convergence", *self.ladder(tmp_path, amp="0.0"),
                       "--out", str(out)])
        assert rc == 0
        rep = json.loads(out.read_text())
        for name in ("psi_extraction", "phi_extraction"):
            assert rep["flags"][name] == "undefined"
            assert rep["orders"][name] is None

    def test_mismatched_grids_error(self, tmp_path):
        dirs = self.ladder(tmp_path)
        rc = cli.main(["convergence", dirs[0], dirs[0], dirs[1],
                       "--out", str(tmp_path / "conv.json")])
        assert rc == 2


SWEEP = """
[sweep]
samples = 3
eps_min = 0.01
eps_max = 0.05
tau = 1e-12

[grid]
h = 0.1
u_max = 6
v_max = 12
"""


class TestSweepCommand:
    def test_reproducible_bytes(self, tmp_path):
        cfgp = write_config(tmp_path, SWEEP, "sweep.ini")
        blobs = []
        for name, threads in (("a", "1"), ("b", "2")):
            out = tmp_path / name
            assert cli.main(["generic-sweep", "--config", cfgp,
                             "--out", str(out), "--threads", threads]) == 0
            blobs.append((out / "sweep.json").read_bytes())
        assert blobs[0] == blobs[1]

    def test_member_fields_and_fraction(self, tmp_path):
        cfgp = write_config(tmp_path, SWEEP, "sweep.ini")
        out = tmp_path / "sw"
        assert cli.main(["generic-sweep", "--config", cfgp,
                         "--out", str(out)]) == 0
        s = json.loads((out / "sweep.json").read_text())
        assert s["n_ok"] == 3
        assert s["fraction_c1_above"] == 1.0
        assert len(s["pairs_c1_c2"]) == 3
        for m in s["members"]:
            assert 0.01 <= m["eps"] <= 0.05
            assert m["c1"] > m["tau"]
            # radial members have direction-independent c3, equal to c1
            # up to the two integration orders' rounding
            assert m["c3_min"] <= m["c1"] * (1.0 + 1e-12)
            assert m["c1"] <= m["c3_max"] * (1.0 + 1e-12)

    def test_zero_samples_rejected(self, tmp_path):
        cfgp = write_config(tmp_path,
                            SWEEP.replace("samples = 3", "samples = 0"),
                            "sweep.ini")
        assert cli.main(["generic-sweep", "--config", cfgp,
                         "--out", str(tmp_path / "sw")]) == 2

    def test_seed_changes_draws(self, tmp_path):
        cfgp = write_config(tmp_path, SWEEP, "sweep.ini")
        epss = []
        for name, seed in (("a", "0"), ("b", "1")):
            out = tmp_path / ("s" + name)
            assert cli.main(["generic-sweep", "--config", cfgp,
                             "--out", str(out), "--seed", seed]) == 0
            s = json.loads((out / "sweep.json").read_text())
            epss.append([m["eps"] for m in s["members"]])
        assert epss[0] != epss[1]


class TestReportCommand:
    def test_full_pipeline(self, tmp_path):
        cfgp = write_config(
            tmp_path, MINIMAL + "\n[analysis]\nreport_times = 4 6\n")
        out = tmp_path / "rep"
        assert cli.main(["report", "--config", cfgp, "--out", str(out)]) == 0
        for name in ("radiation.csv", "slices.csv", "energies.csv",
                     "meta.json", "constants.json", "residuals.csv",
                     "energies_summary.json"):
            assert (out / name).exists(), name
