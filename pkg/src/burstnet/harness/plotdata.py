"""Columnar `x<TAB>y[<TAB>series]` projections of a run directory's logs."""

from __future__ import annotations

from pathlib import Path

from ..errors import UnknownSeries
from .logs import ENSEMBLES_FILE, METRICS_FILE, read_metrics, read_table

SERIES = ("burst_curve", "modulators", "ensembles")


def plot_rows(run_dir: str | Path, which: str) -> list[list[str]]:
    """Header plus rows for one series; ``run_dir`` may also be a metrics file."""
    p = Path(run_dir)
    metrics = p if p.is_file() else p / METRICS_FILE
    if which == "burst_curve":
        _, recs = read_metrics(metrics)
        return [["window", "bursting_count"], *([str(r.window), str(r.bursting_count)] for r in recs)]
    if which == "modulators":
        _, recs = read_metrics(metrics)
        rows = [["window", "da", "ht5", "na", "ach"]]
        for r in recs:
            rows.append([str(r.window), *(format(v, ".12g") for v in (r.da, r.ht5, r.na, r.ach))])
        return rows
    if which == "ensembles":
        header, rows = read_table(metrics.parent / ENSEMBLES_FILE)
        iw, isz, iid = header.index("window"), header.index("size"), header.index("ensemble_id")
        return [["window", "size", "ensemble_id"], *([r[iw], r[isz], r[iid]] for r in rows)]
    raise UnknownSeries(f"unknown series {which!r}; choose from {', '.join(SERIES)}")


def emit_plotdata(run_dir: str | Path, which: str, out: str | Path | None = None) -> Path:
    rows = plot_rows(run_dir, which)
    p = Path(run_dir)
    target = Path(out) if out else (p.parent if p.is_file() else p) / f"plot_{which}.tsv"
    target.write_text("\n".join("\t".join(r) for r in rows) + "\n")
    return target
