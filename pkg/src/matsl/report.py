"""Deterministic CSV/JSON emission for the CLI.

Complex values are serialized as separate Re/Im columns with 17 significant
digits so a rerun byte-reproduces every artifact.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np


def fmt(v) -> str:
    return format(float(v), ".17g")


def write_csv(path, header, rows):
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) if isinstance(v, (int, float, np.floating))
                              else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def _json_default(o):
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.complexfloating):
        return {"re": float(o.real), "im": float(o.imag)}
    raise TypeError(f"not serializable: {type(o)}")


def write_json(path, payload):
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True,
                               default=_json_default) + "\n")
    return path


def weight_columns(m):
    cols = []
    for i in range(m):
        for j in range(m):
            cols += [f"w{i}{j}_re", f"w{i}{j}_im"]
    return cols


def spectral_rows(data, with_weights):
    """CSV rows for localized spectral data.

    One row per refined root: n, q, Re rho, Im rho, multiplicity, then the
    row-major Re/Im pairs of the contour's group weight when requested.
    """
    rows = []
    for d in data:
        n = -1 if d.n is None else d.n
        qrep = d.qs[0] if len(d.qs) == 1 else -1
        for rho_p, mult in d.roots:
            row = [n, qrep, rho_p.real, rho_p.imag, mult]
            if with_weights:
                gw = d.group_weight
                for i in range(gw.shape[0]):
                    for j in range(gw.shape[1]):
                        row += [gw[i, j].real, gw[i, j].imag]
            rows.append(row)
    return rows


def manifest_payload(command, config_path, problem, tolerances):
    import scipy

    from . import __version__
    return {
        "command": command,
        "config": str(config_path),
        "m": problem.order.m,
        "nu": problem.order.nu.tolist(),
        "beta_exp": problem.order.beta_exp,
        "T": problem.T,
        "tolerances": tolerances,
        "versions": {
            "matsl": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": ".".join(map(str, sys.version_info[:3])),
        },
    }
