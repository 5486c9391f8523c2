"""Pair-based STDP, neuromodulator gating, NA-gated consolidation and REM replay."""

from __future__ import annotations

import bisect
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .binding import form_ensembles, phase_map
from .dynamics import (
    EMPTY_STIMULUS,
    ClockParams,
    FiringMode,
    SpikeEvent,
    Stimulus,
    assign_modes,
    emit_spikes,
    forward_pass,
)
from .episodic import EpisodicStore
from .errors import EmptyStore
from .netcore import Network, SynapseKind, strong_subgraph
from .neuromod import ACH, DA, NA, GateSet, ModulatorState, state_key

W_MIN, W_MAX = 0.0, 1.0


@dataclass(frozen=True)
class StdpParams:
    a_plus: float = 0.05
    a_minus: float = 0.055
    tau_plus_ms: float = 20.0
    tau_minus_ms: float = 20.0

    def __post_init__(self):
        if min(self.a_plus, self.a_minus, self.tau_plus_ms, self.tau_minus_ms) <= 0:
            raise ValueError("STDP amplitudes and time constants must be positive")


@dataclass(frozen=True)
class GateThresholds:
    ach_ltd: float = 0.7
    da_flip: float = 0.6
    na_consolidate: float = 0.5


def stdp_delta(dt_ms: float, p: StdpParams = StdpParams()) -> float:
    """Weight change for one spike pair, dt = t_post - t_pre."""
    if not math.isfinite(dt_ms):
        raise ValueError("dt_ms must be finite")
    if dt_ms > 0:
        return p.a_plus * math.exp(-dt_ms / p.tau_plus_ms)
    if dt_ms < 0:
        return -p.a_minus * math.exp(dt_ms / p.tau_minus_ms)
    return 0.0


def apply_gates(
    raw_dw: float,
    gates: GateSet,
    mods: ModulatorState,
    thresholds: GateThresholds = GateThresholds(),
) -> float:
    """Neuromodulator gating of a raw STDP change.

    High ACh forces LTD whatever the spike order; otherwise high DA turns
    LTD into LTP.  The result is then scaled by the memory gates
    (1 + learn - unlearn), floored at 0.
    """
    if mods.level[ACH] >= thresholds.ach_ltd:
        dw = -abs(raw_dw)
    elif raw_dw < 0 and mods.level[DA] >= thresholds.da_flip:
        dw = abs(raw_dw)
    else:
        dw = raw_dw
    return dw * max(0.0, 1.0 + gates.memory_learn - gates.memory_unlearn)


@dataclass
class EligibilityTrace:
    ttl_windows: int = 20
    pending: dict[tuple[int, int], float] = field(default_factory=dict)
    age_windows: dict[tuple[int, int], int] = field(default_factory=dict)

    def add(self, pre: int, post: int, dw: float) -> None:
        key = (pre, post)
        self.pending[key] = self.pending.get(key, 0.0) + dw
        self.age_windows[key] = 0

    def clear(self) -> None:
        self.pending.clear()
        self.age_windows.clear()

    def __len__(self) -> int:
        return len(self.pending)


def _nearest_pairs(pre_times: Sequence[int], post_times: Sequence[int]) -> list[float]:
    """dt values under symmetric nearest-neighbour pairing.

    Each post spike pairs with the latest strictly earlier pre spike (LTP
    side) and each pre spike with the latest strictly earlier post spike
    (LTD side).
    """
    dts = []
    for tp in post_times:
        i = bisect.bisect_left(pre_times, tp)
        if i:
            dts.append(tp - pre_times[i - 1])
    for tq in pre_times:
        i = bisect.bisect_left(post_times, tq)
        if i:
            dts.append(post_times[i - 1] - tq)
    return dts


def accumulate(
    spikes: Iterable[SpikeEvent],
    net: Network,
    p: StdpParams,
    gates: GateSet,
    mods: ModulatorState,
    trace: EligibilityTrace,
    thresholds: GateThresholds = GateThresholds(),
) -> EligibilityTrace:
    """Add this window's gated STDP changes to the eligibility trace (in place)."""
    times: dict[int, list[int]] = {}
    for ev in spikes:
        times.setdefault(ev.neuron, []).append(ev.t)
    if not times:
        return trace
    for ts in times.values():
        ts.sort()
    for s in net.synapses:
        if s.kind is not SynapseKind.DRIVING or s.pre not in times or s.post not in times:
            continue
        total = 0.0
        for dt in _nearest_pairs(times[s.pre], times[s.post]):
            total += apply_gates(stdp_delta(dt, p), gates, mods, thresholds)
        trace.add(s.pre, s.post, total)
    return trace


def consolidate(
    trace: EligibilityTrace,
    na_level: float,
    net: Network,
    threshold: float = 0.5,
) -> Network:
    """Commit pending changes when NA is high enough, otherwise age them.

    Entries that reach ``trace.ttl_windows`` unconsolidated windows expire.
    """
    if na_level >= threshold:
        updates = {}
        for (pre, post), dw in trace.pending.items():
            i = net.synapse_index(pre, post, SynapseKind.DRIVING)
            if i is None:
                continue
            w = net.synapses[i].weight
            updates[i] = min(W_MAX, max(W_MIN, w + dw))
        trace.clear()
        return net.with_weights(updates)
    for key in list(trace.age_windows):
        trace.age_windows[key] += 1
        if trace.age_windows[key] >= trace.ttl_windows:
            del trace.age_windows[key]
            del trace.pending[key]
    return net


@dataclass(frozen=True)
class ConsolidationReport:
    pattern_key: str
    synapses_changed: int
    bursting_before: int
    bursting_after: int

    def line(self) -> str:
        return f"{self.pattern_key}, {self.synapses_changed}, {self.bursting_before}, {self.bursting_after}"


@dataclass(frozen=True)
class ReplaySettings:
    clock: ClockParams = ClockParams()
    stdp: StdpParams = StdpParams()
    thresholds: GateThresholds = GateThresholds()
    forward_threshold: float = 0.5
    theta_explain: float = 0.5
    theta_bind: float = 0.5
    na_clamp: float = 0.9
    ach_clamp: float = 0.1
    # replayed neurons drive their targets with a full burst; None -> burst_spike_count
    burst_gain: float | None = None
    ttl_windows: int = 20


def probe_bursting(net: Network, probe: Stimulus, settings: ReplaySettings = ReplaySettings()) -> frozenset[int]:
    active = forward_pass(net, probe, settings.forward_threshold)
    modes = assign_modes(active, strong_subgraph(net, settings.theta_explain), net.apical_view())
    return frozenset(n for n, m in modes.items() if m is FiringMode.BURSTING)


def rem_replay(
    store: EpisodicStore,
    net: Network,
    probe: Stimulus,
    cycles: int,
    mods: ModulatorState | None = None,
    settings: ReplaySettings = ReplaySettings(),
) -> tuple[Network, ConsolidationReport]:
    """Replay every stored trace ``cycles`` times under the REM regime.

    Each item is one replay window: its neurons are forced to burst, STDP
    accumulates with NA clamped high and ACh clamped low, and the trace is
    consolidated at the end of each cycle.
    """
    if cycles < 1:
        raise ValueError(f"cycles must be >= 1, got {cycles}")
    if len(store) == 0:
        raise EmptyStore("nothing stored to replay")
    mods = (mods or ModulatorState.at_baseline()).with_levels(NA=settings.na_clamp, ACh=settings.ach_clamp)
    gates = GateSet(memory_learn=settings.na_clamp)
    gain = settings.clock.burst_spike_count if settings.burst_gain is None else settings.burst_gain
    before = probe_bursting(net, probe, settings)
    start_weights = net.weights()
    trace = EligibilityTrace(ttl_windows=settings.ttl_windows)
    apical = net.apical_view()
    for _ in range(cycles):
        strong = strong_subgraph(net, settings.theta_explain)
        window = 0
        for t in store.traces:
            for item in t.items:
                active = forward_pass(net, EMPTY_STIMULUS, settings.forward_threshold, item.neurons, gain)
                modes = assign_modes(active, strong, apical, forced=item.neurons)
                ensembles = form_ensembles(modes, net, settings.theta_bind)
                spikes = emit_spikes(modes, phase_map(ensembles), settings.clock, window, net.inhibitory)
                accumulate(spikes, net, settings.stdp, gates, mods, trace, settings.thresholds)
                window += 1
        net = consolidate(trace, mods.level[NA], net, settings.thresholds.na_consolidate)
    after = probe_bursting(net, probe, settings)
    changed = int((net.weights() != start_weights).sum())
    report = ConsolidationReport(state_key(probe.drive), changed, len(before), len(after))
    return net, report

