"""Flat CSV form of sweep results and metric reports.

Each ``(k, variant, path)`` record becomes three rows: one per group with the
metric columns filled, and an ``abs_diff`` row with the ``d_*`` disparity
columns filled. Undefined values are empty fields; floats carry 9
significant digits.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path

from ..exceptions import ConfigError
from ..metrics import GROUPS, METRICS, GroupMetrics, MetricReport
from .runner import SweepRecord, SweepResult

DISPARITY_COLUMNS = tuple(f"d_{m}" for m in METRICS)
HEADER = ("k", "delta_pi", "variant", "path", "group") + METRICS + DISPARITY_COLUMNS
REPORT_HEADER = ("variant", "group") + METRICS


def fmt(v):
    return "" if v is None else f"{v:.9g}"


def _parse(v):
    return None if v == "" else float(v)


def result_rows(result: SweepResult):
    blank = [""] * len(METRICS)
    for rec in result.records:
        head = [fmt(rec.k), fmt(rec.delta_pi), rec.variant, rec.path]
        for a in GROUPS:
            gm = rec.report.groups[a]
            yield head + [str(a)] + [fmt(getattr(gm, m)) for m in METRICS] + blank
        disp = rec.report.disparities
        yield head + ["abs_diff"] + blank + [fmt(disp[m]) for m in METRICS]


def write_csv(result: SweepResult, path):
    """Write ``result`` to ``path``; rows ordered by (k, variant, path, group)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    writer.writerows(result_rows(result))
    path = Path(path)
    try:
        path.write_text(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def read_csv(path) -> SweepResult:
    """Parse a file produced by :func:`write_csv` back into a :class:`SweepResult`."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != HEADER:
            raise ConfigError(f"{path}: not a sweep CSV (header {reader.fieldnames})", "csv")
        groups = {}
        meta = {}
        for row in reader:
            key = (float(row["k"]), row["variant"], row["path"])
            meta[key] = float(row["delta_pi"])
            if row["group"] == "abs_diff":
                continue
            gm = GroupMetrics(**{m: _parse(row[m]) for m in METRICS})
            groups.setdefault(key, {})[int(row["group"])] = gm
    records = [SweepRecord(k, meta[(k, v, p)], v, p, MetricReport(v, g)) for (k, v, p), g in groups.items()]
    return SweepResult(tuple(records))


def write_report_csv(report: MetricReport, path):
    """One row per group plus an ``abs_diff`` row, columns ``variant,group,<metrics>``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        for a in GROUPS:
            gm = report.groups[a]
            writer.writerow([report.variant, a] + [fmt(getattr(gm, m)) for m in METRICS])
        disp = report.disparities
        writer.writerow([report.variant, "abs_diff"] + [fmt(disp[m]) for m in METRICS])
