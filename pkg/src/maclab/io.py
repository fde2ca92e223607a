"""Deterministic CSV and JSON tables with a provenance header."""

import csv
import io
import json

import numpy as np

FORMATS = ("csv", "json")


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _plain(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    return v


def render_table(meta, columns, rows, fmt="csv"):
    """Text of a table.

    Parameters
    ----------
    meta : dict
        Provenance (configuration, seed, units). Written as ``# key: value``
        comment lines in CSV and as a ``meta`` object in JSON, sorted by key.
    columns : list of str
    rows : list of sequences
    fmt : {"csv", "json"}

    Floats are written with ``repr`` so values round-trip exactly and equal
    inputs give byte-identical files.
    """
    if fmt == "csv":
        buf = io.StringIO()
        for k in sorted(meta):
            buf.write(f"# {k}: {_cell(meta[k])}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        w.writerows([_cell(v) for v in r] for r in rows)
        return buf.getvalue()
    if fmt == "json":
        doc = {
            "meta": {k: _plain(meta[k]) for k in sorted(meta)},
            "columns": list(columns),
            "rows": [[_plain(v) for v in r] for r in rows],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def read_csv_table(text):
    """Parse the CSV form back into ``(meta, columns, rows)`` with strings."""
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition(": ")
            meta[k] = v
        elif line:
            body.append(line)
    rows = list(csv.reader(body))
    return meta, rows[0], rows[1:]
