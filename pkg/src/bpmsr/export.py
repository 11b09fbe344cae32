"""Trajectory, summary and plot-data files.

All writers are deterministic: fixed column order, fixed float formatting
(17 significant digits, exact round-trip) and sorted JSON keys, so re-running
a scenario with the same seed reproduces the files byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Optional

import numpy as np

from .engine import ConsensusTrace
from .graph_core import RoleAssignment

TRAJECTORY_COLUMNS = ("t", "node", "role", "x", "q_final", "transmitted")


def fmt_float(v: float) -> str:
    return format(float(v), "#.17g")


def trajectory_text(trace: ConsensusTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRAJECTORY_COLUMNS)
    n, steps = trace.x.shape
    roles = [trace.roles.role_of(i) for i in range(n)]
    for t in range(steps):
        for i in range(n):
            w.writerow((t, i, roles[i], fmt_float(trace.x[i, t]),
                        int(trace.q_final[i, t]), int(trace.transmitted[i, t])))
    return buf.getvalue()


def write_trajectory(trace: ConsensusTrace, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(trajectory_text(trace))
    return path


def read_trajectory(path, roles: RoleAssignment, protocol: str = "unknown") -> ConsensusTrace:
    """Load a trajectory export back into a :class:`ConsensusTrace`."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: empty trajectory")
    if tuple(rows[0].keys()) != TRAJECTORY_COLUMNS:
        raise ValueError(f"{path}: unexpected header {tuple(rows[0].keys())}")
    n = roles.n
    steps = len(rows) // n
    if steps * n != len(rows):
        raise ValueError(f"{path}: row count {len(rows)} is not a multiple of n={n}")
    x = np.zeros((n, steps))
    q = np.zeros((n, steps), dtype=np.uint8)
    tx = np.zeros((n, steps), dtype=np.uint8)
    for row in rows:
        t, i = int(row["t"]), int(row["node"])
        x[i, t] = float(row["x"])
        q[i, t] = int(row["q_final"])
        tx[i, t] = int(row["transmitted"])
    return ConsensusTrace(x, q, tx, roles, protocol)


def dumps_json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def write_summary(data: dict, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_json(data))
    return path


def emit_plot_data(trace: ConsensusTrace, out_dir, converged: Optional[frozenset] = None) -> list[Path]:
    """One ``node_XX.csv`` series per node plus ``manifest.json``.

    The manifest records each node's role and, for normal followers, whether
    it is in ``converged`` (``None`` leaves the classification out).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n, steps = trace.x.shape
    width = max(2, len(str(n - 1)))
    written = []
    entries = []
    for i in range(n):
        name = f"node_{i:0{width}d}.csv"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("t", "x", "q_final", "transmitted"))
        for t in range(steps):
            w.writerow((t, fmt_float(trace.x[i, t]), int(trace.q_final[i, t]),
                        int(trace.transmitted[i, t])))
        (out / name).write_text(buf.getvalue())
        written.append(out / name)
        entry = {"node": i, "role": trace.roles.role_of(i), "file": name}
        if converged is not None and i in trace.roles.normal_followers:
            entry["classification"] = "convergent" if i in converged else "non-convergent"
        entries.append(entry)
    manifest = {"protocol": trace.protocol, "steps": steps, "nodes": entries}
    (out / "manifest.json").write_text(dumps_json(manifest))
    written.append(out / "manifest.json")
    return written
