"""Byte-stable CSV/JSON output.

Every CSV starts with one ``# {json}`` line carrying the resolved config,
the conventions in force and the package version. Floats are written with
17 significant digits, independent of locale. Files are written to a
temporary sibling and renamed into place.
"""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from . import __version__

CONVENTIONS = {
    "units": "axial COM frequency = mass = hbar = 1; lengths in Coulomb units",
    "covariance_ordering": "xxpp",
    "vacuum_symplectic_eigenvalue": 0.5,
    "site_indexing": "1-based from the left end of the chain",
    "qubit_basis": ["up-up", "up-down", "down-up", "down-down"],
    "entropy_units": "ebits (log base 2)",
}


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def header(config):
    return {"version": __version__, "conventions": CONVENTIONS, "config": _plain(config)}


def atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise
    return path


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def dumps_csv(config, columns, rows):
    lines = ["# " + json.dumps(header(config), sort_keys=True), ",".join(columns)]
    lines += [",".join(_cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def write_csv(path, config, columns, rows):
    return atomic_write(path, dumps_csv(config, columns, rows))


def dumps_json(config, payload):
    doc = {"header": header(config), "result": _plain(payload)}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_json(path, config, payload):
    return atomic_write(path, dumps_json(config, payload))


def write_table(path_stem, fmt, config, columns, rows):
    """Write ``rows`` as ``<stem>.csv`` or ``<stem>.json``."""
    if fmt == "json":
        records = [dict(zip(columns, row)) for row in rows]
        return write_json(f"{path_stem}.json", config, {"columns": columns, "rows": records})
    return write_csv(f"{path_stem}.csv", config, columns, rows)
