"""Table writers: CSV with a ``#`` metadata block, and a JSON-lines mirror."""

from __future__ import annotations

import csv
import io
import json

from .sweep import LOCAL_LABELS, PAIR_LABELS


def columns(plan):
    """Column names in their fixed order, restricted to the plan's outputs."""
    want = set(plan.outputs)
    cols = ["sweep_value"]
    if "spectrum" in want:
        cols += [f"E{i}" for i in range(plan.solver.levels)]
    if "pauli" in want:
        cols += ["delta1", "delta2"]
        cols += [f"J_{lab}" for lab in PAIR_LABELS + LOCAL_LABELS]
        cols.append("offset")
    if "harmonic" in want:
        cols += ["h_gap", "h_overlap"]
    if "stoquastic" in want:
        cols.append("stoquastic")
    cols.append("flags")
    return cols


def row_record(row, plan):
    """Mapping column -> value (``None`` for empty cells)."""
    rec = dict.fromkeys(columns(plan))
    rec["sweep_value"] = row.sweep_value
    if row.energies is not None:
        for i, e in enumerate(row.energies):
            rec[f"E{i}"] = e
    if row.deltas is not None:
        rec["delta1"], rec["delta2"] = row.deltas
    if row.pauli is not None:
        for lab, c in row.pauli.items():
            rec[f"J_{lab}"] = c
        rec["offset"] = row.offset
    for name in ("h_gap", "h_overlap", "stoquastic"):
        if name in rec:
            rec[name] = getattr(row, name)
    rec["flags"] = ";".join(row.flags)
    return rec


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _metadata(plan, rows):
    lines = [
        f"# plan_sha256: {plan.digest()}",
        f"# seed: {plan.seed}",
        f"# sweep_path: {plan.sweep_path or ''}",
        "# cutoff_per_row: " + ",".join("" if r.cutoff is None else str(r.cutoff) for r in rows),
    ]
    return "\n".join(lines) + "\n"


def format_csv(rows, plan):
    buf = io.StringIO()
    buf.write(_metadata(plan, rows))
    writer = csv.writer(buf, lineterminator="\r\n")
    cols = columns(plan)
    writer.writerow(cols)
    for row in rows:
        rec = row_record(row, plan)
        writer.writerow([_cell(rec[c]) for c in cols])
    return buf.getvalue()


def format_jsonl(rows, plan):
    out = [json.dumps({"plan_sha256": plan.digest(), "seed": plan.seed, "sweep_path": plan.sweep_path})]
    for row in rows:
        rec = row_record(row, plan)
        rec["cutoff"] = row.cutoff
        out.append(json.dumps(rec))
    return "\n".join(out) + "\n"


def read_csv(text):
    """Parse a table written by :func:`format_csv` into ``(metadata, records)``."""
    meta, body = {}, []
    for line in text.splitlines(keepends=True):
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(": ")
            meta[key] = value
        else:
            body.append(line)
    records = list(csv.DictReader(io.StringIO("".join(body))))
    return meta, records
