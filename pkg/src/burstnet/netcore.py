"""Network substrate: regions, neurons, synapses and derived graph views.

Networks are immutable.  Plasticity produces a new ``Network`` through
``with_weights``; the adjacency index is keyed by synapse position, so it is
shared between the old and the new instance.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DanglingEndpoint,
    DuplicateSynapse,
    InvalidWeight,
    MissingRegion,
    NetworkError,
    SpecSyntaxError,
)
from .textformat import fmt_float, key_values, parse_sections, records


class NeuronKind(enum.Enum):
    EXCITATORY = "E"
    INHIBITORY = "I"


class SynapseKind(enum.Enum):
    DRIVING = "driving"
    APICAL_INHIBITORY = "apical"
    RELAY = "relay"


class ModulatorKind(enum.Enum):
    DA = "DA"
    HT5 = "HT5"
    NA = "NA"
    ACH = "ACh"


class RegionTag(enum.Enum):
    SENSORY_CORTEX = "sensory"
    MOTOR_CORTEX = "motor"
    THALAMUS_RELAY = "thalamus"
    HIPPOCAMPUS = "hippocampus"
    AMYGDALA = "amygdala"
    MIDBRAIN_NUCLEUS = "midbrain"


@dataclass(frozen=True)
class Region:
    name: str
    tag: RegionTag
    channel: int | None = None
    modulator: ModulatorKind | None = None

    def spec_line(self) -> str:
        parts = [self.name, self.tag.value]
        if self.tag is RegionTag.SENSORY_CORTEX:
            parts.append(str(self.channel))
        elif self.tag is RegionTag.MIDBRAIN_NUCLEUS:
            parts.append(self.modulator.value)
        return " ".join(parts)


@dataclass(frozen=True)
class Neuron:
    id: int
    kind: NeuronKind
    region: Region
    apical_sources: frozenset[int] = frozenset()

    @property
    def excitatory(self) -> bool:
        return self.kind is NeuronKind.EXCITATORY


@dataclass(frozen=True)
class Synapse:
    pre: int
    post: int
    weight: float
    kind: SynapseKind


@dataclass(frozen=True)
class RandomWiring:
    """Bernoulli wiring between two regions, drawn from the spec seed."""

    src: str
    dst: str
    p: float
    w_lo: float
    w_hi: float
    kind: SynapseKind


@dataclass
class NetworkSpec:
    regions: list[Region] = field(default_factory=list)
    # (region name, count, kind); ids are assigned densely in this order
    neurons: list[tuple[str, int, NeuronKind]] = field(default_factory=list)
    synapses: list[tuple[int, int, float, SynapseKind]] = field(default_factory=list)
    random_wiring: list[RandomWiring] = field(default_factory=list)
    seed: int = 0


class DirectedGraph:
    """Minimal immutable digraph over integer nodes."""

    __slots__ = ("nodes", "edges", "_succ", "_pred")

    def __init__(self, nodes: Iterable[int], edges: Iterable[tuple[int, int]]):
        self.nodes = frozenset(nodes)
        self.edges = frozenset(edges)
        succ: dict[int, set[int]] = {n: set() for n in self.nodes}
        pred: dict[int, set[int]] = {n: set() for n in self.nodes}
        for a, b in self.edges:
            if a not in succ or b not in succ:
                raise ValueError(f"edge {(a, b)} has an endpoint outside the node set")
            succ[a].add(b)
            pred[b].add(a)
        self._succ = {n: frozenset(s) for n, s in succ.items()}
        self._pred = {n: frozenset(s) for n, s in pred.items()}

    def successors(self, n: int) -> frozenset[int]:
        return self._succ.get(n, frozenset())

    def predecessors(self, n: int) -> frozenset[int]:
        return self._pred.get(n, frozenset())

    def with_edge(self, a: int, b: int) -> DirectedGraph:
        return DirectedGraph(self.nodes | {a, b}, self.edges | {(a, b)})

    def is_subgraph_of(self, other: DirectedGraph) -> bool:
        return self.nodes <= other.nodes and self.edges <= other.edges

    def __len__(self) -> int:
        return len(self.edges)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges

    def __repr__(self) -> str:
        return f"DirectedGraph({len(self.nodes)} nodes, {len(self.edges)} edges)"


@dataclass(frozen=True)
class ApicalView:
    """Which neurons are interneurons and which interneurons gate whom."""

    inhibitory: frozenset[int]
    sources: Mapping[int, frozenset[int]]


_SINGLETONS = (
    Region("hippocampus", RegionTag.HIPPOCAMPUS),
    Region("amygdala", RegionTag.AMYGDALA),
    *(Region(f"midbrain_{m.value}", RegionTag.MIDBRAIN_NUCLEUS, modulator=m) for m in ModulatorKind),
)


def _singleton_slot(region: Region):
    if region.tag in (RegionTag.HIPPOCAMPUS, RegionTag.AMYGDALA):
        return region.tag
    if region.tag is RegionTag.MIDBRAIN_NUCLEUS:
        return (region.tag, region.modulator)
    return None


def _adjacency(synapses: tuple[Synapse, ...], n: int):
    out_idx: list[list[int]] = [[] for _ in range(n)]
    in_idx: list[list[int]] = [[] for _ in range(n)]
    for i, s in enumerate(synapses):
        out_idx[s.pre].append(i)
        in_idx[s.post].append(i)
    return tuple(map(tuple, out_idx)), tuple(map(tuple, in_idx))


class Network:
    """Validated network.  Construct through :func:`build_network`."""

    def __init__(
        self,
        regions: Iterable[Region],
        neurons: Iterable[Neuron],
        synapses: Iterable[Synapse],
        seed: int = 0,
        _adjacency_index=None,
    ):
        self.regions = tuple(regions)
        self.neurons = tuple(neurons)
        self.synapses = tuple(synapses)
        self.seed = int(seed)
        self._validate()
        if _adjacency_index is None:
            _adjacency_index = _adjacency(self.synapses, len(self.neurons))
        self.out_index, self.in_index = _adjacency_index
        self._by_triple = {(s.pre, s.post, s.kind): i for i, s in enumerate(self.synapses)}
        self.excitatory = frozenset(n.id for n in self.neurons if n.excitatory)
        self.inhibitory = frozenset(n.id for n in self.neurons if not n.excitatory)

    def _validate(self) -> None:
        n = len(self.neurons)
        for i, neuron in enumerate(self.neurons):
            if neuron.id != i:
                raise NetworkError(f"neuron ids must be dense 0..N-1; got {neuron.id} at {i}")
        seen = set()
        for s in self.synapses:
            if not (0 <= s.pre < n and 0 <= s.post < n):
                raise DanglingEndpoint(f"synapse {s.pre}->{s.post} references a missing neuron")
            if s.pre == s.post:
                raise NetworkError(f"self-loop on neuron {s.pre}")
            if not (0.0 <= s.weight <= 1.0) or s.weight != s.weight:
                raise InvalidWeight(f"weight {s.weight} of {s.pre}->{s.post} outside [0, 1]")
            triple = (s.pre, s.post, s.kind)
            if triple in seen:
                raise DuplicateSynapse(f"duplicate {s.kind.value} synapse {s.pre}->{s.post}")
            seen.add(triple)
            if s.kind is SynapseKind.APICAL_INHIBITORY:
                if self.neurons[s.pre].excitatory:
                    raise NetworkError(f"apical synapse {s.pre}->{s.post} needs an inhibitory pre")
                if not self.neurons[s.post].excitatory:
                    raise NetworkError(f"apical synapse {s.pre}->{s.post} targets an interneuron")
        for neuron in self.neurons:
            for src in neuron.apical_sources:
                if self.neurons[src].excitatory:
                    raise NetworkError(f"apical source {src} of {neuron.id} is excitatory")

    # views

    def __len__(self) -> int:
        return len(self.neurons)

    def synapse(self, pre: int, post: int, kind: SynapseKind = SynapseKind.DRIVING) -> Synapse | None:
        i = self._by_triple.get((pre, post, kind))
        return None if i is None else self.synapses[i]

    def synapse_index(self, pre: int, post: int, kind: SynapseKind = SynapseKind.DRIVING) -> int | None:
        return self._by_triple.get((pre, post, kind))

    def in_synapses(self, post: int, kind: SynapseKind | None = None) -> list[Synapse]:
        return [self.synapses[i] for i in self.in_index[post] if kind is None or self.synapses[i].kind is kind]

    def out_synapses(self, pre: int, kind: SynapseKind | None = None) -> list[Synapse]:
        return [self.synapses[i] for i in self.out_index[pre] if kind is None or self.synapses[i].kind is kind]

    def region_neurons(self, name: str) -> list[int]:
        return [n.id for n in self.neurons if n.region.name == name]

    def is_sensory(self, n: int) -> bool:
        return self.neurons[n].region.tag is RegionTag.SENSORY_CORTEX

    def apical_view(self) -> ApicalView:
        return ApicalView(
            inhibitory=self.inhibitory,
            sources={n.id: n.apical_sources for n in self.neurons if n.apical_sources},
        )

    def driving_graph(self) -> DirectedGraph:
        """All Driving synapses between excitatory neurons."""
        return _driving_subgraph(self, 0.0)

    def rebuild_adjacency(self):
        return _adjacency(self.synapses, len(self.neurons))

    def weights(self) -> np.ndarray:
        return np.array([s.weight for s in self.synapses], dtype=float)

    def with_weights(self, updates: Mapping[int, float]) -> Network:
        """New network with synapse weights replaced by index."""
        if not updates:
            return self
        syn = list(self.synapses)
        for i, w in updates.items():
            s = syn[i]
            syn[i] = Synapse(s.pre, s.post, float(w), s.kind)
        return Network(self.regions, self.neurons, syn, self.seed, (self.out_index, self.in_index))

    # serialization

    def to_text(self) -> str:
        lines = ["[regions]"]
        lines += [r.spec_line() for r in self.regions]
        lines.append("[neurons]")
        run_start = 0
        for i in range(1, len(self.neurons) + 1):
            prev = self.neurons[i - 1]
            if i == len(self.neurons) or (
                self.neurons[i].region != prev.region or self.neurons[i].kind != prev.kind
            ):
                lines.append(f"{prev.region.name} {i - run_start} {prev.kind.value}")
                run_start = i
        lines.append("[synapses]")
        lines += [f"{s.pre} {s.post} {fmt_float(s.weight)} {s.kind.value}" for s in self.synapses]
        lines.append("[params]")
        lines.append(f"seed = {self.seed}")
        return "\n".join(lines) + "\n"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self.regions == other.regions
            and self.neurons == other.neurons
            and self.synapses == other.synapses
            and self.seed == other.seed
        )

    def __repr__(self) -> str:
        return f"Network({len(self.neurons)} neurons, {len(self.synapses)} synapses)"


def build_network(spec: NetworkSpec) -> Network:
    regions: dict[str, Region] = {}
    slots = set()
    for r in spec.regions:
        if r.name in regions:
            raise SpecSyntaxError(f"region {r.name!r} declared twice")
        slot = _singleton_slot(r)
        if slot is not None:
            if slot in slots:
                raise SpecSyntaxError(f"second {r.tag.value} region {r.name!r}")
            slots.add(slot)
        if r.tag is RegionTag.SENSORY_CORTEX and r.channel is None:
            raise SpecSyntaxError(f"sensory region {r.name!r} needs a channel")
        regions[r.name] = r
    for r in _SINGLETONS:
        if _singleton_slot(r) not in slots:
            if r.name in regions:
                raise SpecSyntaxError(f"region name {r.name!r} is reserved")
            regions[r.name] = r

    layout: list[tuple[Region, NeuronKind]] = []
    for name, count, kind in spec.neurons:
        if name not in regions:
            raise MissingRegion(f"neurons reference undeclared region {name!r}")
        if count < 0:
            raise SpecSyntaxError(f"negative neuron count for {name!r}")
        layout += [(regions[name], kind)] * count

    synapses = [Synapse(int(a), int(b), float(w), k) for a, b, w, k in spec.synapses]
    for s in synapses:
        if not (0.0 <= s.weight <= 1.0):
            raise InvalidWeight(f"weight {s.weight} of {s.pre}->{s.post} outside [0, 1]")
    rng = np.random.default_rng(spec.seed)
    for rw in spec.random_wiring:
        for name in (rw.src, rw.dst):
            if name not in regions:
                raise MissingRegion(f"random wiring references undeclared region {name!r}")
        if not (0.0 <= rw.w_lo <= rw.w_hi <= 1.0):
            raise InvalidWeight(f"random weight range [{rw.w_lo}, {rw.w_hi}] outside [0, 1]")
        src = [i for i, (r, _) in enumerate(layout) if r.name == rw.src]
        dst = [i for i, (r, _) in enumerate(layout) if r.name == rw.dst]
        for a in src:
            for b in dst:
                if a == b:
                    continue
                if rw.kind is SynapseKind.APICAL_INHIBITORY and (
                    layout[a][1] is not NeuronKind.INHIBITORY or layout[b][1] is not NeuronKind.EXCITATORY
                ):
                    continue
                draw_p, draw_w = rng.random(), rng.random()
                if draw_p < rw.p:
                    w = rw.w_lo + (rw.w_hi - rw.w_lo) * draw_w
                    synapses.append(Synapse(a, b, float(w), rw.kind))

    n = len(layout)
    for s in synapses:
        if not (0 <= s.pre < n and 0 <= s.post < n):
            raise DanglingEndpoint(f"synapse {s.pre}->{s.post} references a missing neuron (N={n})")
    apical: dict[int, set[int]] = {}
    for s in synapses:
        if s.kind is SynapseKind.APICAL_INHIBITORY:
            apical.setdefault(s.post, set()).add(s.pre)
    neurons = [
        Neuron(i, kind, region, frozenset(apical.get(i, ()))) for i, (region, kind) in enumerate(layout)
    ]
    return Network(regions.values(), neurons, synapses, spec.seed)


def strong_subgraph(net: Network, theta_explain: float) -> DirectedGraph:
    """Driving synapses with weight >= theta_explain, excitatory endpoints only.

    The node set is every excitatory neuron, so an isolated neuron is still
    recognised as excitatory by ``assign_modes``.
    """
    if not (0.0 < theta_explain <= 1.0):
        raise ValueError(f"theta_explain must lie in (0, 1], got {theta_explain}")
    return _driving_subgraph(net, theta_explain)


def _driving_subgraph(net: Network, min_weight: float) -> DirectedGraph:
    exc = net.excitatory
    edges = [
        (s.pre, s.post)
        for s in net.synapses
        if s.kind is SynapseKind.DRIVING and s.weight >= min_weight and s.pre in exc and s.post in exc
    ]
    return DirectedGraph(exc, edges)


# text format

_REGION_TAGS = {t.value: t for t in RegionTag}
_KINDS = {k.value: k for k in NeuronKind}
_SYN_KINDS = {k.value: k for k in SynapseKind}
_MODULATORS = {m.value: m for m in ModulatorKind}


def _num(tok: str, lineno: int, cast=float):
    try:
        return cast(tok)
    except ValueError:
        raise SpecSyntaxError(f"line {lineno}: expected a number, got {tok!r}") from None


def parse_network_spec(text: str) -> NetworkSpec:
    sections = parse_sections(text, allowed={"regions", "neurons", "synapses", "params"})
    spec = NetworkSpec()
    for line in records(sections.get("regions", []), "regions"):
        t = line.tokens
        if len(t) < 2 or t[1] not in _REGION_TAGS:
            raise SpecSyntaxError(f"line {line.lineno}: expected '<name> <tag> [arg]'")
        tag = _REGION_TAGS[t[1]]
        if tag is RegionTag.SENSORY_CORTEX:
            if len(t) != 3:
                raise SpecSyntaxError(f"line {line.lineno}: sensory region needs a channel")
            spec.regions.append(Region(t[0], tag, channel=_num(t[2], line.lineno, int)))
        elif tag is RegionTag.MIDBRAIN_NUCLEUS:
            if len(t) != 3 or t[2] not in _MODULATORS:
                raise SpecSyntaxError(f"line {line.lineno}: midbrain region needs DA|HT5|NA|ACh")
            spec.regions.append(Region(t[0], tag, modulator=_MODULATORS[t[2]]))
        else:
            if len(t) != 2:
                raise SpecSyntaxError(f"line {line.lineno}: unexpected argument for {t[1]} region")
            spec.regions.append(Region(t[0], tag))
    for line in records(sections.get("neurons", []), "neurons"):
        t = line.tokens
        if len(t) != 3 or t[2] not in _KINDS:
            raise SpecSyntaxError(f"line {line.lineno}: expected '<region> <count> E|I'")
        spec.neurons.append((t[0], _num(t[1], line.lineno, int), _KINDS[t[2]]))
    for line in records(sections.get("synapses", []), "synapses"):
        t = line.tokens
        if t[0] == "random":
            if len(t) != 7 or t[6] not in _SYN_KINDS:
                raise SpecSyntaxError(
                    f"line {line.lineno}: expected 'random <src> <dst> <p> <w_lo> <w_hi> <kind>'"
                )
            spec.random_wiring.append(
                RandomWiring(
                    t[1], t[2], *(_num(x, line.lineno) for x in t[3:6]), _SYN_KINDS[t[6]]
                )
            )
            continue
        if len(t) != 4 or t[3] not in _SYN_KINDS:
            raise SpecSyntaxError(f"line {line.lineno}: expected '<pre> <post> <weight> <kind>'")
        spec.synapses.append(
            (_num(t[0], line.lineno, int), _num(t[1], line.lineno, int), _num(t[2], line.lineno), _SYN_KINDS[t[3]])
        )
    params = key_values(sections.get("params", []), {"seed"}, "params")
    if "seed" in params:
        lineno, value = params["seed"]
        spec.seed = _num(value, lineno, int)
    return spec


def load_network(path: str | Path) -> Network:
    return build_network(parse_network_spec(Path(path).read_text()))
