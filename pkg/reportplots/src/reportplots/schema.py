"""Readers for the run-directory file schemas.

Each reader validates the layout it needs and raises SchemaError naming
the missing columns or keys, so a drifted producer fails loudly here
instead of somewhere inside matplotlib.
"""

import csv
import json
import math
from pathlib import Path

import numpy as np

RESIDUAL_COLUMNS = ("u", "v", "region", "field", "leading", "measured",
                    "rel_residual")
ENERGY_COLUMNS = ("t", "L2_phi", "L2_dphi", "L2_psi", "L2_dpsi",
                  "cascade_ratio", "E_hyp_phi")
CONSTANTS_KEYS = ("c1", "c2", "c5", "c3", "c4", "v_max", "identities")
IDENTITY_KEYS = ("relation_sup", "relation_sup_rel", "c4_gap", "c4_gap_rel")


class SchemaError(ValueError):
    pass


def _read_csv(path, want):
    path = Path(path)
    if not path.is_file():
        raise SchemaError("%s not found" % path)
    with open(path, "r", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("%s has no header row" % path.name)
        missing = [c for c in want if c not in header]
        if missing:
            raise SchemaError("%s missing columns: %s"
                              % (path.name, ", ".join(missing)))
        idx = [header.index(c) for c in want]
        rows = [[row[i] for i in idx] for row in reader]
    return rows


def _floats(rows, j):
    # empty cells (optional columns) read as nan
    return np.array([float(r[j]) if r[j] != "" else math.nan for r in rows])


def read_residuals(path):
    rows = _read_csv(path, RESIDUAL_COLUMNS)
    return {
        "u": _floats(rows, 0),
        "v": _floats(rows, 1),
        "region": [r[2] for r in rows],
        "field": [r[3] for r in rows],
        "leading": _floats(rows, 4),
        "measured": _floats(rows, 5),
        "rel_residual": _floats(rows, 6),
    }


def read_energies(path):
    rows = _read_csv(path, ENERGY_COLUMNS)
    return {name: _floats(rows, j) for j, name in enumerate(ENERGY_COLUMNS)}


def _check_keys(path, mapping, want, where=None):
    missing = [k for k in want if k not in mapping]
    if missing:
        place = "%s[%s]" % (path.name, where) if where else path.name
        raise SchemaError("%s missing keys: %s" % (place, ", ".join(missing)))


def read_constants(path):
    path = Path(path)
    if not path.is_file():
        raise SchemaError("%s not found" % path)
    with open(path, "r") as f:
        data = json.load(f)
    _check_keys(path, data, CONSTANTS_KEYS)
    _check_keys(path, data["identities"], IDENTITY_KEYS, where="identities")
    return data


def read_energy_summary(path):
    path = Path(path)
    if not path.is_file():
        raise SchemaError("%s not found" % path)
    with open(path, "r") as f:
        data = json.load(f)
    _check_keys(path, data, ("fits",))
    return data


def sphere_layout(n_points):
    """Invert n = (b+1)(2b+1) for the collocation band b.

    The c3/c4 lists are collocation values on (b+1) Gauss-Legendre
    latitude nodes times (2b+1) uniform longitudes, latitude-major;
    that layout is part of the constants.json schema.
    """
    b = (-3.0 + math.sqrt(9.0 + 8.0 * (n_points - 1))) / 4.0
    bi = int(round(b))
    if bi < 0 or (bi + 1) * (2 * bi + 1) != n_points:
        raise SchemaError(
            "c3 length %d does not match any collocation band" % n_points)
    return bi + 1, 2 * bi + 1


def run_dirs(indir):
    """Run directories under indir: itself, or its direct children."""
    indir = Path(indir)
    if (indir / "constants.json").is_file():
        return [indir]
    if not indir.is_dir():
        raise SchemaError("%s is not a directory" % indir)
    subs = sorted(d for d in indir.iterdir()
                  if d.is_dir() and (d / "constants.json").is_file())
    if not subs:
        raise SchemaError("no constants.json under %s" % indir)
    return subs
