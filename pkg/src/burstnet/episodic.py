"""Hippocampal store of cue-recall sequences on the theta clock."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EmptyCue


@dataclass(frozen=True)
class MemoryItem:
    neurons: frozenset[int]
    salience: float = 0.0

    def __post_init__(self):
        if not self.neurons:
            raise ValueError("a memory item needs at least one neuron")
        if self.salience < 0:
            raise ValueError(f"salience must be >= 0, got {self.salience}")


@dataclass
class EpisodicTrace:
    trace_id: int
    items: list[MemoryItem] = field(default_factory=list)
    # non-decreasing: several items may share a theta cycle
    theta_indices: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class RecallHit:
    trace_id: int
    position: int  # position of the recalled (successor) item
    recalled: frozenset[int]


@dataclass(frozen=True)
class RecallResult:
    hit: RecallHit | None
    similarity: float


@dataclass
class EpisodicStore:
    capacity_per_cycle: int = 9
    theta_recall: float = 0.6
    ach_suppress: float = 0.7
    traces: list[EpisodicTrace] = field(default_factory=list)

    def __post_init__(self):
        if not (5 <= self.capacity_per_cycle <= 9):
            raise ValueError(f"capacity_per_cycle must lie in [5, 9], got {self.capacity_per_cycle}")
        if not (0.0 < self.theta_recall <= 1.0):
            raise ValueError(f"theta_recall must lie in (0, 1], got {self.theta_recall}")

    def __len__(self) -> int:
        return sum(len(t.items) for t in self.traces)

    def items_in_cycle(self, theta_index: int) -> list[tuple[EpisodicTrace, int]]:
        return [
            (t, k) for t in self.traces for k, th in enumerate(t.theta_indices) if th == theta_index
        ]

    def records(self):
        """Rows of (trace_id, position, theta_index, salience, neurons)."""
        for t in self.traces:
            for k, (item, th) in enumerate(zip(t.items, t.theta_indices)):
                yield t.trace_id, k, th, item.salience, item.neurons

    def dumps(self) -> str:
        lines = ["trace_id\tposition\ttheta_index\tsalience\tneuron_ids"]
        for tid, k, th, sal, neurons in self.records():
            ids = ";".join(str(n) for n in sorted(neurons))
            lines.append(f"{tid}\t{k}\t{th}\t{sal!r}\t{ids}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str, **kwargs) -> EpisodicStore:
        store = cls(**kwargs)
        by_id: dict[int, EpisodicTrace] = {}
        for row in text.splitlines()[1:]:
            if not row.strip():
                continue
            tid, _k, th, sal, ids = row.split("\t")
            trace = by_id.get(int(tid))
            if trace is None:
                trace = by_id[int(tid)] = EpisodicTrace(int(tid))
                store.traces.append(trace)
            trace.items.append(MemoryItem(frozenset(int(x) for x in ids.split(";")), float(sal)))
            trace.theta_indices.append(int(th))
        return store

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())


def encode(
    members: Iterable[int], store: EpisodicStore, theta_index: int, na_level: float
) -> EpisodicStore:
    """Append the dominant ensemble's members to the open trace.

    A new trace opens unless ``theta_index`` continues the last one (same or
    next cycle).  When a cycle exceeds capacity, its lowest-salience item is
    evicted, oldest first on ties.  The store is updated in place.
    """
    if na_level < 0:
        raise ValueError(f"na_level must be >= 0, got {na_level}")
    item = MemoryItem(frozenset(members), float(na_level))
    last = store.traces[-1] if store.traces else None
    if last is None or not last.theta_indices or theta_index - last.theta_indices[-1] not in (0, 1):
        last = EpisodicTrace(trace_id=store.traces[-1].trace_id + 1 if store.traces else 0)
        store.traces.append(last)
    last.items.append(item)
    last.theta_indices.append(theta_index)

    in_cycle = store.items_in_cycle(theta_index)
    if len(in_cycle) > store.capacity_per_cycle:
        trace, k = min(in_cycle, key=lambda tk: tk[0].items[tk[1]].salience)
        del trace.items[k]
        del trace.theta_indices[k]
        if not trace.items:
            store.traces.remove(trace)
    return store


def jaccard(a: frozenset[int], b: frozenset[int]) -> float:
    union = len(a | b)
    return len(a & b) / union if union else 0.0


def recall(cue: Iterable[int], store: EpisodicStore, ach_level: float = 0.0) -> RecallResult:
    """Best cue match among items that have a successor.

    Suppressed entirely when ACh is at or above ``store.ach_suppress``.
    Ties prefer the most recent trace, then the earliest position.
    """
    cue = frozenset(cue)
    if not cue:
        raise EmptyCue("recall needs a non-empty cue")
    if ach_level >= store.ach_suppress:
        return RecallResult(None, 0.0)
    best = None
    best_key = None
    for t in store.traces:
        for k in range(len(t.items) - 1):
            sim = jaccard(cue, t.items[k].neurons)
            key = (sim, t.trace_id, -k)
            if best_key is None or key > best_key:
                best_key, best = key, (t, k)
    if best is None:
        return RecallResult(None, 0.0)
    sim = best_key[0]
    if sim < store.theta_recall:
        return RecallResult(None, sim)
    t, k = best
    return RecallResult(RecallHit(t.trace_id, k + 1, t.items[k + 1].neurons), sim)
