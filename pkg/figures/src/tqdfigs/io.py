"""Readers for the simulator's CSV/JSON output files.

Every reader validates the header against the documented schema and
names any missing columns; no simulator code is imported, only its
files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

SCHEMAS = {
    "trajectory": ("t", "rho_ll", "rho_cc", "rho_rr", "z", "i_t"),
    "jump": ("t", "rho_cc", "n_detected"),
    "ensemble": ("t", "mean_rho_cc", "err_rho_cc", "mean_i_t", "err_i_t",
                 "n_traj"),
    "sweep": ("delta", "gamma", "rho_cc_ss", "i_t_ss", "degenerate"),
    "correlation": ("gamma", "delta", "s_tq", "s_tq_err", "s_tt", "s_qq",
                    "pearson", "pearson_err", "noisy"),
}


class SchemaError(ValueError):
    """Input file does not carry the expected columns."""


def read_table(path, kind):
    """Parse one simulator CSV into a dict of float arrays."""
    expected = SCHEMAS[kind]
    lines = [ln for ln in Path(path).read_text().splitlines()
             if ln and not ln.startswith("#")]
    if not lines:
        raise SchemaError(f"{path}: empty table")
    header = tuple(lines[0].split(","))
    missing = [c for c in expected if c not in header]
    if missing:
        raise SchemaError(
            f"{path}: missing columns {', '.join(missing)} for a {kind} "
            f"table (found: {', '.join(header)})")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    if data.size == 0:
        raise SchemaError(f"{path}: no data rows")
    return {name: data[:, header.index(name)] for name in expected}


def read_manifest(csv_path):
    """Load the run manifest written alongside a CSV."""
    path = Path(str(csv_path) + ".manifest.json")
    if not path.exists():
        raise SchemaError(f"manifest {path} not found")
    manifest = json.loads(path.read_text())
    return {k: v for k, v in manifest.get("config", {}).items()}


def read_jump_sidecar(csv_path):
    """Load the detection-times sidecar of a detection-run CSV."""
    path = Path(str(csv_path) + ".jumps.json")
    if not path.exists():
        raise SchemaError(f"detection sidecar {path} not found")
    return json.loads(path.read_text())
