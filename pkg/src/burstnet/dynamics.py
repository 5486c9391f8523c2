"""Per-window forward pass, firing-mode assignment and spike emission."""

from __future__ import annotations

import enum
import math
from collections.abc import Collection, Iterable, Mapping
from dataclasses import dataclass, field

from .errors import InvalidStimulus, PhaseMissing, PhaseOverflow
from .netcore import ApicalView, DirectedGraph, Network, SynapseKind


class FiringMode(enum.Enum):
    SILENT = "silent"
    TONIC = "tonic"
    BURSTING = "bursting"


@dataclass(frozen=True)
class Stimulus:
    """External drive per window; only sensory-cortex neurons may be driven."""

    drive: Mapping[int, float] = field(default_factory=dict)

    def validate(self, net: Network) -> None:
        for n, d in self.drive.items():
            if not (0 <= n < len(net)) or not net.is_sensory(n):
                raise InvalidStimulus(f"neuron {n} is not in a sensory-cortex region")
            if not (0.0 <= d <= 1.0):
                raise InvalidStimulus(f"drive {d} on neuron {n} outside [0, 1]")

    @classmethod
    def pattern(cls, neurons: Iterable[int], drive: float = 1.0) -> Stimulus:
        return cls({n: drive for n in neurons})


EMPTY_STIMULUS = Stimulus()


@dataclass(frozen=True, order=True)
class SpikeEvent:
    t: int
    neuron: int


@dataclass(frozen=True)
class WindowState:
    window_index: int
    active: frozenset[int]
    modes: Mapping[int, FiringMode]
    spikes: tuple[SpikeEvent, ...]

    def bursting(self) -> frozenset[int]:
        return frozenset(n for n, m in self.modes.items() if m is FiringMode.BURSTING)


@dataclass(frozen=True)
class ClockParams:
    window_ms: int = 100
    theta_hz: float = 5.0
    gamma_hz: float = 40.0
    burst_spike_count: int = 3
    burst_isi_ms: int = 5

    def __post_init__(self):
        if not (50 <= self.window_ms <= 250):
            raise ValueError(f"window_ms must lie in [50, 250], got {self.window_ms}")
        if not (4.0 <= self.theta_hz <= 7.0):
            raise ValueError(f"theta_hz must lie in [4, 7], got {self.theta_hz}")
        if self.gamma_hz <= 0 or self.burst_spike_count < 1 or self.burst_isi_ms < 1:
            raise ValueError("gamma_hz, burst_spike_count and burst_isi_ms must be positive")
        if self.burst_span_ms + self.max_phase_slots - 1 >= self.gamma_cycle_ms:
            raise ValueError("a burst plus the phase slots must fit inside one gamma cycle")

    @property
    def gamma_cycle_ms(self) -> float:
        return 1000.0 / self.gamma_hz

    @property
    def theta_cycle_ms(self) -> float:
        return 1000.0 / self.theta_hz

    @property
    def burst_span_ms(self) -> int:
        return (self.burst_spike_count - 1) * self.burst_isi_ms

    @property
    def max_phase_slots(self) -> int:
        # slots sit 1 ms apart; past burst_isi_ms they would land on another
        # ensemble's intra-burst spike
        return self.burst_isi_ms if self.burst_spike_count > 1 else int(self.gamma_cycle_ms)

    def window_start(self, window_index: int) -> int:
        return window_index * self.window_ms


def forward_pass(
    net: Network,
    stim: Stimulus,
    threshold: float = 0.5,
    seeds: Collection[int] = (),
    burst_gain: float = 1.0,
) -> frozenset[int]:
    """Fixpoint of threshold activation along Driving synapses.

    A neuron is active when its external drive reaches ``threshold`` or when
    the summed weight of Driving synapses from active neurons does.  ``seeds``
    are neurons forced active from outside the stimulus (hippocampal recall,
    chosen actions); their outgoing weights are multiplied by ``burst_gain``.
    """
    if not (0.0 < threshold <= 1.0):
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    seeds = frozenset(seeds)
    active = set(seeds)
    active.update(n for n, d in stim.drive.items() if d >= threshold)
    contribs: dict[int, list[float]] = {}
    frontier = list(active)
    while frontier:
        pre = frontier.pop()
        gain = burst_gain if pre in seeds else 1.0
        for i in net.out_index[pre]:
            s = net.synapses[i]
            if s.kind is not SynapseKind.DRIVING or s.post in active:
                continue
            acc = contribs.setdefault(s.post, [])
            acc.append(s.weight * gain)
            # fsum is exactly rounded, so the outcome is independent of visit order
            if math.fsum(acc) >= threshold:
                active.add(s.post)
                frontier.append(s.post)
    return frozenset(active)


def merge_step(recalled: Iterable[int], stimulus_bursting: Iterable[int]) -> frozenset[int]:
    return frozenset(recalled) | frozenset(stimulus_bursting)


def assign_modes(
    active: Collection[int],
    strong: DirectedGraph,
    apical: ApicalView | None = None,
    forced: Collection[int] = (),
) -> dict[int, FiringMode]:
    """Bursting-inhibition rule.

    An active excitatory neuron bursts unless one of its strong successors is
    active, in which case it is explained and fires tonically.  Interneurons
    are always tonic.  ``forced`` neurons (replayed by the hippocampus) burst
    for this window regardless of inhibition.  Neurons outside ``active`` are
    not listed; callers treat a missing key as Silent.
    """
    active = frozenset(active)
    inhibitory = apical.inhibitory if apical is not None else frozenset()
    excitatory = (active & strong.nodes) - inhibitory
    unexplained = {n for n in excitatory if not (strong.successors(n) & active)}
    bursting = merge_step(frozenset(forced) & excitatory, unexplained)
    return {n: FiringMode.BURSTING if n in bursting else FiringMode.TONIC for n in active}


def mode_of(modes: Mapping[int, FiringMode], n: int) -> FiringMode:
    return modes.get(n, FiringMode.SILENT)


def emit_spikes(
    modes: Mapping[int, FiringMode],
    phase_of: Mapping[int, int],
    clock: ClockParams,
    window_index: int,
    interneurons: Collection[int] = (),
) -> list[SpikeEvent]:
    """Spike trains for one window.

    Each gamma cycle, a tonic neuron fires once and a bursting neuron fires
    ``burst_spike_count`` spikes ``burst_isi_ms`` apart, both offset by the
    neuron's phase slot (1 ms per slot).  Interneuron spikes lag by one ISI.
    """
    start = clock.window_start(window_index)
    cycle = clock.gamma_cycle_ms
    cycle_starts = []
    c = 0
    while math.floor(c * cycle) < clock.window_ms:
        cycle_starts.append(math.floor(c * cycle))
        c += 1
    interneurons = frozenset(interneurons)
    spikes = []
    for n, mode in modes.items():
        if mode is FiringMode.SILENT:
            continue
        if mode is FiringMode.BURSTING:
            if n not in phase_of:
                raise PhaseMissing(f"bursting neuron {n} has no phase slot")
            offsets = [i * clock.burst_isi_ms for i in range(clock.burst_spike_count)]
        else:
            offsets = [clock.burst_isi_ms if n in interneurons else 0]
        slot = phase_of.get(n, 0)
        if not (0 <= slot < clock.max_phase_slots):
            raise PhaseOverflow(f"phase slot {slot} of neuron {n} exceeds {clock.max_phase_slots} slots")
        for c0 in cycle_starts:
            for off in offsets:
                t = c0 + slot + off
                if t < clock.window_ms:
                    spikes.append(SpikeEvent(start + t, n))
    spikes.sort()
    return spikes
