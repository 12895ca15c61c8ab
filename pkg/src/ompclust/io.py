"""CSV interchange formats: matrices (rows = ambient coordinates, columns
= points), label files (one integer per line), and result files (header
row plus `#`-prefixed metadata lines).

Float values are written with their shortest round-trip representation,
so identical runs produce byte-identical files.
"""

from __future__ import annotations

import numpy as np

from . import numerics


def _fmt(value):
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    if isinstance(value, (np.integer, int)):
        return str(int(value))
    if isinstance(value, (np.bool_, bool)):
        return "1" if value else "0"
    return str(value)


def write_matrix(path, a, header=True):
    """Write a matrix file: optional `# n=<rows> d=<cols>` line, then one
    CSV row per ambient coordinate."""
    a = numerics.check_matrix(a, "matrix")
    lines = []
    if header:
        lines.append(f"# n={a.shape[0]} d={a.shape[1]}")
    for row in a:
        lines.append(",".join(repr(float(v)) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_matrix(path):
    """Read a matrix file; tolerates a missing header line."""
    rows = []
    declared = None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if declared is None and "n=" in line and "d=" in line:
                    parts = dict(tok.split("=") for tok in line[1:].split() if "=" in tok)
                    declared = (int(parts["n"]), int(parts["d"]))
                continue
            rows.append([float(tok) for tok in line.split(",")])
    if not rows:
        raise ValueError(f"{path}: no data rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError(f"{path}: ragged rows (widths {sorted(widths)})")
    a = np.asarray(rows, dtype=float)
    if declared is not None and a.shape != declared:
        raise ValueError(f"{path}: header declares {declared}, file holds {a.shape}")
    return numerics.check_matrix(a, path)


def write_labels(path, labels):
    labels = np.asarray(labels)
    with open(path, "w") as fh:
        fh.write("\n".join(str(int(v)) for v in labels) + "\n")


def read_labels(path):
    labels = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            labels.append(int(line))
    if not labels:
        raise ValueError(f"{path}: no labels")
    values = np.asarray(labels, dtype=int)
    if np.any(values < 0):
        raise ValueError(f"{path}: labels must be nonnegative")
    return values


def write_result(path, metadata, header, rows):
    """Write a result file: `# key=value` metadata lines, a CSV header,
    then one CSV row per record."""
    lines = [f"# {key}={_fmt(value)}" for key, value in metadata]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_result(path):
    """Read a result file back as (metadata dict, header list, row lists)."""
    metadata = {}
    header = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, value = body.split("=", 1)
                    metadata[key.strip()] = value.strip()
                continue
            if header is None:
                header = line.split(",")
            else:
                rows.append(line.split(","))
    if header is None:
        raise ValueError(f"{path}: missing header row")
    return metadata, header, rows
