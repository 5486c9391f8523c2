"""Tab-separated run logs with a fixed header and per-record schema checks."""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields
from pathlib import Path

from ..errors import BurstnetError

METRICS_FILE = "metrics.tsv"
ENSEMBLES_FILE = "ensembles.tsv"
NEUROMOD_FILE = "neuromod.tsv"


class SchemaError(BurstnetError, ValueError):
    pass


def _num(x: float) -> str:
    return format(x, ".12g")


def _opt(x) -> str:
    return "-" if x is None else str(x)


@dataclass(frozen=True)
class MetricsRecord:
    window: int
    bursting_count: int
    tonic_count: int
    ensemble_count: int
    dominant_id: int | None
    action: int | None
    delta: float
    da: float
    ht5: float
    na: float
    ach: float
    scenario: str | None
    reward: float
    active_key: str | None

    def validate(self) -> None:
        for name in ("window", "bursting_count", "tonic_count", "ensemble_count"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise SchemaError(f"{name} must be a nonnegative integer, got {v!r}")
        for name in ("da", "ht5", "na", "ach"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise SchemaError(f"{name} = {v} outside [0, 1]")
        if not math.isfinite(self.delta) or not math.isfinite(self.reward):
            raise SchemaError("delta and reward must be finite")
        if (self.dominant_id is None) != (self.ensemble_count == 0):
            raise SchemaError("dominant_id must be present exactly when ensembles exist")

    def row(self) -> str:
        return "\t".join(
            [
                str(self.window),
                str(self.bursting_count),
                str(self.tonic_count),
                str(self.ensemble_count),
                _opt(self.dominant_id),
                _opt(self.action),
                _num(self.delta),
                _num(self.da),
                _num(self.ht5),
                _num(self.na),
                _num(self.ach),
                _opt(self.scenario),
                _num(self.reward),
                _opt(self.active_key),
            ]
        )

    @classmethod
    def parse(cls, row: str) -> MetricsRecord:
        cols = row.rstrip("\n").split("\t")
        if len(cols) != len(METRICS_COLUMNS):
            raise SchemaError(f"expected {len(METRICS_COLUMNS)} columns, got {len(cols)}")

        def opt(s, cast):
            return None if s == "-" else cast(s)

        try:
            rec = cls(
                int(cols[0]),
                int(cols[1]),
                int(cols[2]),
                int(cols[3]),
                opt(cols[4], int),
                opt(cols[5], int),
                float(cols[6]),
                float(cols[7]),
                float(cols[8]),
                float(cols[9]),
                float(cols[10]),
                opt(cols[11], str),
                float(cols[12]),
                opt(cols[13], str),
            )
        except ValueError as exc:
            raise SchemaError(str(exc)) from None
        rec.validate()
        return rec


METRICS_COLUMNS = tuple(f.name for f in fields(MetricsRecord))


@dataclass(frozen=True)
class EnsembleRow:
    window: int
    ensemble_id: int
    size: int
    support_size: int
    rate_hz: float
    phase_slot: int
    score: float
    dominant: bool

    def row(self) -> str:
        w, e, s, ss, r, p, sc, d = astuple(self)
        return f"{w}\t{e}\t{s}\t{ss}\t{_num(r)}\t{p}\t{_num(sc)}\t{int(d)}"


ENSEMBLE_COLUMNS = ("window", "ensemble_id", "size", "support_size", "rate_hz", "phase_slot", "score", "dominant")


@dataclass(frozen=True)
class NeuromodRow:
    window: int
    delta: float
    da: float
    ht5: float
    na: float
    ach: float
    scenario: str | None
    valence: float

    def row(self) -> str:
        vals = [_num(x) for x in (self.delta, self.da, self.ht5, self.na, self.ach)]
        return "\t".join([str(self.window), *vals, _opt(self.scenario), _num(self.valence)])


NEUROMOD_COLUMNS = ("window", "delta", "da", "ht5", "na", "ach", "scenario", "valence")


def metrics_text(records, seed: int) -> str:
    lines = [f"# seed={seed}", "\t".join(METRICS_COLUMNS)]
    for expected, rec in enumerate(records):
        if rec.window != expected:
            raise SchemaError(f"metrics windows must be contiguous from 0; got {rec.window} at {expected}")
        rec.validate()
        lines.append(rec.row())
    return "\n".join(lines) + "\n"


def table_text(columns, rows) -> str:
    return "\n".join(["\t".join(columns), *(r.row() for r in rows)]) + "\n"


def read_metrics(path: str | Path) -> tuple[int | None, list[MetricsRecord]]:
    """Parse a metrics file; returns (seed, records)."""
    lines = Path(path).read_text().splitlines()
    seed = None
    if lines and lines[0].startswith("# seed="):
        seed = int(lines.pop(0).split("=", 1)[1])
    if not lines or tuple(lines[0].split("\t")) != METRICS_COLUMNS:
        raise SchemaError(f"{path}: bad or missing header")
    records = [MetricsRecord.parse(r) for r in lines[1:] if r]
    for expected, rec in enumerate(records):
        if rec.window != expected:
            raise SchemaError(f"{path}: window {rec.window} out of sequence")
    return seed, records


def read_table(path: str | Path) -> tuple[list[str], list[list[str]]]:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise SchemaError(f"{path}: empty")
    return lines[0].split("\t"), [ln.split("\t") for ln in lines[1:] if ln]
