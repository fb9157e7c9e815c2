"""Structured-text (JSON) and CSV encodings of inputs and reports.

Input records (grid functions, finite functions) are written with full
``repr`` precision so they round-trip exactly.  Reports print floats with
12 significant digits; parsing a report therefore reproduces the result up
to that precision.  Field order is fixed and labels are sorted, so equal
results always serialize to identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .extraction import ExtractionResult
from .hump import CertificateRow
from .selection import SelectionReport
from .spaces import FiniteFn, GridFunction

__all__ = [
    "report_float",
    "grid_to_record",
    "grid_from_record",
    "finite_fn_to_record",
    "finite_fn_from_record",
    "certificate_to_csv",
    "certificate_from_csv",
    "certificate_to_record",
    "certificate_from_record",
    "selection_to_record",
    "selection_from_record",
    "extraction_to_record",
    "extraction_from_record",
    "cauchy_to_csv",
    "dumps",
    "emit_report",
    "load_json",
]

SIG_DIGITS = 12


def report_float(x):
    """Round to 12 significant digits (non-finite values pass through)."""
    x = float(x)
    if not math.isfinite(x):
        return x
    return float(f"{x:.{SIG_DIGITS}g}")


def _fmt(x) -> str:
    return f"{float(x):.{SIG_DIGITS}g}"


def _is_flat(obj):
    return isinstance(obj, list) and not any(isinstance(v, (list, dict)) for v in obj)


def _format(obj, depth):
    pad = "  " * (depth + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_format(v, depth + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * depth + "}"
    if isinstance(obj, list) and not _is_flat(obj):
        items = [pad + _format(v, depth + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + "  " * depth + "]"
    return json.dumps(obj, ensure_ascii=False, separators=(", ", ": "))


def dumps(record) -> str:
    """Canonical JSON text: nested containers indented, flat lists on one line."""
    return _format(record, 0) + "\n"


def load_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# input records
# ---------------------------------------------------------------------------


def grid_to_record(g: GridFunction) -> dict:
    return {
        "dim": g.dim,
        "origin": list(g.origin),
        "spacing": list(g.spacing),
        "extent": list(g.extent),
        "values": [float(v) for v in g.values.ravel()],
    }


def grid_from_record(rec: dict) -> GridFunction:
    for key in ("dim", "origin", "spacing", "extent", "values"):
        if key not in rec:
            raise ValueError(f"grid record lacks {key!r}")
    g = GridFunction(rec["origin"], rec["spacing"], rec["extent"], np.asarray(rec["values"], dtype=float))
    if g.dim != int(rec["dim"]):
        raise ValueError("grid record dim disagrees with its extent")
    return g


def finite_fn_to_record(f: FiniteFn) -> dict:
    return {"pairs": [[lab, float(v)] for lab, v in f.pairs()]}


def finite_fn_from_record(rec) -> FiniteFn:
    pairs = rec["pairs"] if isinstance(rec, dict) else rec
    return FiniteFn.from_pairs((lab, float(v)) for lab, v in pairs)


# ---------------------------------------------------------------------------
# hump certificates
# ---------------------------------------------------------------------------

CERT_HEADER = ("n", "observed", "required", "pass")


def certificate_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CERT_HEADER)
    for r in rows:
        w.writerow([r.n, _fmt(r.observed), _fmt(r.required), "true" if r.passed else "false"])
    return buf.getvalue()


def certificate_from_csv(text: str) -> list:
    reader = csv.reader(io.StringIO(text))
    header = tuple(next(reader))
    if header != CERT_HEADER:
        raise ValueError(f"unexpected certificate header {header}")
    return [
        CertificateRow(int(n), float(o), float(q), p == "true") for n, o, q, p in reader
    ]


def certificate_to_record(rows, meta=None) -> dict:
    rec = dict(meta or {})
    rec["rows"] = [
        {"n": r.n, "observed": report_float(r.observed), "required": report_float(r.required),
         "pass": bool(r.passed)}
        for r in rows
    ]
    return rec


def certificate_from_record(rec) -> list:
    return [CertificateRow(int(r["n"]), float(r["observed"]), float(r["required"]), bool(r["pass"]))
            for r in rec["rows"]]


# ---------------------------------------------------------------------------
# selection reports
# ---------------------------------------------------------------------------


def selection_to_record(rep: SelectionReport) -> dict:
    rec = {
        "kind": rep.kind,
        "I": list(rep.indices),
        "M": {str(n): rep.sorted_subset(n) for n in rep.indices},
    }
    if rep.C is not None:
        rec["C"] = report_float(rep.C)
    if rep.lam is not None:
        rec["lambda"] = {str(n): report_float(v) for n, v in sorted(rep.lam.items())}
    rec["skipped"] = list(rep.skipped)
    return rec


def selection_from_record(rec) -> SelectionReport:
    lam = rec.get("lambda")
    return SelectionReport(
        indices=tuple(int(n) for n in rec["I"]),
        subsets={int(n): frozenset(labels) for n, labels in rec["M"].items()},
        C=rec.get("C"),
        lam=None if lam is None else {int(n): float(v) for n, v in lam.items()},
        kind=rec.get("kind", "finite"),
        skipped=tuple(rec.get("skipped", ())),
    )


def selection_to_csv(rep: SelectionReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("n", "size", "bound", "labels"))
    for n in rep.indices:
        labels = rep.sorted_subset(n)
        bound = "" if rep.C is None or rep.lam is None else _fmt(rep.C * rep.lam[n])
        w.writerow([n, len(labels), bound, " ".join(str(x) for x in labels)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# extraction results
# ---------------------------------------------------------------------------


def extraction_to_record(res: ExtractionResult) -> dict:
    return {
        "norm": res.norm,
        "epsilons": [report_float(e) for e in res.epsilons],
        "modulus": [[report_float(e), int(pos)] for e, pos in res.modulus.items()],
        "stages": [list(s) for s in res.stages],
        "diagonal": list(res.subsequence),
        "cauchy": [[i, j, report_float(d)] for i, j, d in res.cauchy],
    }


def extraction_from_record(rec) -> ExtractionResult:
    return ExtractionResult(
        subsequence=tuple(int(i) for i in rec["diagonal"]),
        stages=tuple(tuple(int(i) for i in s) for s in rec["stages"]),
        cauchy=tuple((int(i), int(j), float(d)) for i, j, d in rec["cauchy"]),
        epsilons=tuple(float(e) for e in rec["epsilons"]),
        modulus={float(e): int(pos) for e, pos in rec["modulus"]},
        norm=rec["norm"],
    )


def cauchy_to_csv(res: ExtractionResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("i", "j", "distance"))
    for i, j, d in res.cauchy:
        w.writerow([i, j, _fmt(d)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# writing
# ---------------------------------------------------------------------------


def emit_report(result, path, fmt="text", meta=None) -> Path:
    """Write ``result`` to ``path`` as CSV or structured text.

    ``result`` is a list of :class:`CertificateRow`, a
    :class:`SelectionReport`, an :class:`ExtractionResult` or a plain dict.
    ``meta`` entries are prepended to structured-text records.
    """
    if fmt not in ("csv", "text"):
        raise ValueError(f"unknown report format {fmt!r}")
    if isinstance(result, SelectionReport):
        text = selection_to_csv(result) if fmt == "csv" else dumps({**(meta or {}), **selection_to_record(result)})
    elif isinstance(result, ExtractionResult):
        text = cauchy_to_csv(result) if fmt == "csv" else dumps({**(meta or {}), **extraction_to_record(result)})
    elif isinstance(result, dict):
        text = dumps({**(meta or {}), **result})
    else:
        rows = list(result)
        text = certificate_to_csv(rows) if fmt == "csv" else dumps(certificate_to_record(rows, meta))
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path
