"""Synchrony ensembles over bursting neurons and attention selection."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

from .dynamics import FiringMode
from .netcore import ModulatorKind, Network, SynapseKind

RATE_MIN_HZ = 40.0
RATE_MAX_HZ = 60.0


@dataclass(frozen=True)
class Ensemble:
    id: int
    members: frozenset[int]
    support: frozenset[int]
    rate_hz: float
    phase_slot: int


@dataclass(frozen=True)
class AttentionState:
    dominant: int | None
    scores: Mapping[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ScoreWeights:
    alpha: float = 1.0  # per member
    beta: float = 0.05  # per Hz
    gamma: float = 1.0  # neuromodulatory gain


class UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the smaller id as root so component ids are stable
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra

    def groups(self) -> list[frozenset]:
        out: dict = {}
        for x in self.parent:
            out.setdefault(self.find(x), set()).add(x)
        return [frozenset(g) for g in out.values()]


def tonic_support(modes: Mapping[int, FiringMode], net: Network) -> dict[int, frozenset[int]]:
    """Tonic ancestors of each bursting neuron along active Driving edges."""
    active = {n for n, m in modes.items() if m is not FiringMode.SILENT}
    support = {}
    for b, m in modes.items():
        if m is not FiringMode.BURSTING:
            continue
        seen = {b}
        stack = [b]
        while stack:
            x = stack.pop()
            for i in net.in_index[x]:
                s = net.synapses[i]
                if s.kind is SynapseKind.DRIVING and s.pre in active and s.pre not in seen:
                    seen.add(s.pre)
                    stack.append(s.pre)
        support[b] = frozenset(n for n in seen if modes[n] is FiringMode.TONIC)
    return support


def form_ensembles(modes: Mapping[int, FiringMode], net: Network, theta_bind: float = 0.5) -> list[Ensemble]:
    """Connected components of bursting neurons under shared support or relay links.

    Two bursting neurons bind when their tonic supports intersect, or when a
    Relay synapse of weight >= theta_bind joins one's support-or-self to the
    other's.  Components are found by union over owner lists, never by
    comparing pairs.
    """
    if not (0.0 < theta_bind <= 1.0):
        raise ValueError(f"theta_bind must lie in (0, 1], got {theta_bind}")
    support = tonic_support(modes, net)
    if not support:
        return []
    uf = UnionFind(support)
    # owner lists: every neuron -> bursting neurons whose support-or-self holds it
    owners: dict[int, list[int]] = {}
    for b, sup in support.items():
        owners.setdefault(b, []).append(b)
        for s in sup:
            owners.setdefault(s, []).append(b)
    for group in owners.values():
        for b in group[1:]:
            uf.union(group[0], b)
    for s in net.synapses:
        if s.kind is SynapseKind.RELAY and s.weight >= theta_bind:
            a, c = owners.get(s.pre), owners.get(s.post)
            if a and c:
                uf.union(a[0], c[0])

    n_tonic = sum(1 for m in modes.values() if m is FiringMode.TONIC)
    comps = sorted(uf.groups(), key=min)
    out = []
    for slot, members in enumerate(comps):
        sup = frozenset().union(*(support[b] for b in members))
        raw = len(sup) / n_tonic if n_tonic else 0.0
        rate = min(RATE_MAX_HZ, max(RATE_MIN_HZ, RATE_MIN_HZ + 20.0 * raw))
        out.append(Ensemble(min(members), members, sup, rate, slot))
    return out


def phase_map(ensembles: Sequence[Ensemble]) -> dict[int, int]:
    return {n: e.phase_slot for e in ensembles for n in e.members}


def select_dominant(
    ensembles: Sequence[Ensemble],
    mods=None,
    weights: ScoreWeights = ScoreWeights(),
    valence_of=None,
) -> AttentionState:
    """Score ensembles by size, rate and NA-weighted amygdala valence.

    ``valence_of`` maps an ensemble to its conditioned valence (0 when
    unconditioned); the gain is ``NA * |valence|``.  Ties go to the lowest id.
    """
    na = mods.level[ModulatorKind.NA] if mods is not None else 0.0
    scores = {}
    for e in ensembles:
        gain = na * abs(valence_of(e)) if valence_of is not None else 0.0
        scores[e.id] = weights.alpha * len(e.members) + weights.beta * e.rate_hz + weights.gamma * gain
    if not scores:
        return AttentionState(None, {})
    dominant = min(scores, key=lambda i: (-scores[i], i))
    return AttentionState(dominant, scores)
