"""Deterministic per-window loop tying every module together."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..binding import AttentionState, Ensemble, form_ensembles, phase_map, select_dominant
from ..dynamics import FiringMode, Stimulus, WindowState, assign_modes, emit_spikes, forward_pass
from ..episodic import EpisodicStore, RecallResult, encode, recall
from ..errors import Divergence, SnapshotMissing
from ..netcore import Network, RegionTag, load_network, strong_subgraph
from ..neuromod import (
    ACH,
    DA,
    HT5,
    NA,
    NO_GATES,
    AmygdalaStore,
    GateSet,
    ModulatorState,
    Scenario,
    ValueTable,
    amygdala_react,
    classify_scenario,
    compute_pe,
    condition,
    state_key,
    update_modulators,
)
from ..plasticity import ConsolidationReport, EligibilityTrace, accumulate, consolidate, rem_replay
from .config import RunConfig, load_config
from .logs import (
    ENSEMBLE_COLUMNS,
    ENSEMBLES_FILE,
    METRICS_FILE,
    NEUROMOD_COLUMNS,
    NEUROMOD_FILE,
    EnsembleRow,
    MetricsRecord,
    NeuromodRow,
    metrics_text,
    table_text,
)
from .tasks import Task, TaskStep, make_task

log = logging.getLogger("burstnet")

CONFIG_FILE = "config.txt"
NETWORK_FILE = "network.txt"
FINAL_NETWORK_FILE = "final_network.txt"
STORE_FILE = "store.tsv"


@dataclass(frozen=True)
class WindowResult:
    record: MetricsRecord
    state: WindowState
    ensembles: list[Ensemble]
    attention: AttentionState
    recall: RecallResult | None
    mods: ModulatorState
    gates: GateSet
    valence: float


@dataclass
class RunResult:
    config: RunConfig
    initial_network: Network
    network: Network
    store: EpisodicStore
    records: list[MetricsRecord] = field(default_factory=list)
    ensembles: list[EnsembleRow] = field(default_factory=list)
    neuromod: list[NeuromodRow] = field(default_factory=list)
    rem_reports: list[ConsolidationReport] = field(default_factory=list)

    def metrics_text(self) -> str:
        return metrics_text(self.records, self.config.seed)


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


class Simulation:
    """Mutable run state; ``step`` advances exactly one integration window."""

    def __init__(self, config: RunConfig, net: Network | None = None):
        self.config = config
        self.net = net if net is not None else load_network(config.network_path)
        self.store = EpisodicStore(
            config.memory.capacity_per_cycle, config.memory.theta_recall, config.memory.ach_suppress
        )
        self.mods = ModulatorState.at_baseline(config.baselines)
        self.values = ValueTable(config.learning_rate)
        self.amygdala = AmygdalaStore()
        self.trace = EligibilityTrace(config.ttl_windows)
        self.rng = np.random.default_rng(config.seed)
        self.window = 0
        self.prev_key: str | None = None
        self.recalled: frozenset[int] = frozenset()
        self.motor = frozenset(n.id for n in self.net.neurons if n.region.tag is RegionTag.MOTOR_CORTEX)
        self._apical = self.net.apical_view()
        self._strong_for = None
        self._strong = None

    def strong(self):
        if self._strong_for is not self.net:
            self._strong = strong_subgraph(self.net, self.config.thresholds.theta_explain)
            self._strong_for = self.net
        return self._strong

    def step(self, task_step: TaskStep = TaskStep()) -> WindowResult:
        cfg = self.config
        net = self.net
        w = self.window
        stim = task_step.stimulus
        stim.validate(net)

        forced = frozenset(task_step.forced) | self.recalled
        active = forward_pass(net, stim, cfg.thresholds.forward, forced)
        modes = assign_modes(active, self.strong(), self._apical, forced)
        ensembles = form_ensembles(modes, net, cfg.thresholds.theta_bind)
        attention = select_dominant(
            ensembles, self.mods, cfg.score_weights, lambda e: self.amygdala.valence(state_key(e.members))
        )
        dominant = next((e for e in ensembles if e.id == attention.dominant), None)

        key = None
        action = None
        recall_result = None
        recalled = frozenset()
        if dominant is not None:
            key = state_key(dominant.members)
            encode(dominant.members, self.store, w, self.mods[NA])
            recall_result = recall(dominant.members, self.store, self.mods[ACH])
            # a self-transition (same set recalled) carries nothing new to replay
            if recall_result.hit is not None and recall_result.hit.recalled != dominant.members:
                recalled = recall_result.hit.recalled
            motors = dominant.members & self.motor
            action = min(motors) if motors else None

        # reward and TD(0) prediction error over successive attended states
        reward = task_step.reward
        prev = None if task_step.boundary else self.prev_key
        credited = prev if prev is not None else key
        if reward != 0 and credited is not None:
            condition(credited, max(-1.0, min(1.0, reward)), self.amygdala)
        target = reward + (self.values[key] if key is not None else 0.0)
        delta = compute_pe(target, prev, self.values) if prev is not None else target

        valence = amygdala_react((state_key(e.members) for e in ensembles), self.amygdala)
        n_bursting = sum(1 for m in modes.values() if m is FiringMode.BURSTING)
        n_tonic = sum(1 for m in modes.values() if m is FiringMode.TONIC)
        self.mods = update_modulators(delta, n_bursting, valence, self.mods, len(net.excitatory), cfg.gains)

        scenario: Scenario | None = None
        gates = NO_GATES
        if delta != 0:
            if credited is not None and credited in self.amygdala:
                vsign = _sign(self.amygdala.valence(credited))
            else:
                vsign = _sign(reward)
            if vsign:
                # the table is read in terms of outcome vs expectation for that valence:
                # a worse-than-expected punishment counts as a positive surprise
                table_pe = delta if vsign > 0 else -delta
                scenario, gates = classify_scenario(table_pe, vsign, self.mods)

        spikes = emit_spikes(modes, phase_map(ensembles), cfg.clock, w, net.inhibitory)
        accumulate(spikes, net, cfg.stdp, gates, self.mods, self.trace, cfg.gates)
        if cfg.awake_consolidation:
            self.net = consolidate(self.trace, self.mods[NA], net, cfg.gates.na_consolidate)

        lv = self.mods.level
        record = MetricsRecord(
            window=w,
            bursting_count=n_bursting,
            tonic_count=n_tonic,
            ensemble_count=len(ensembles),
            dominant_id=attention.dominant,
            action=action,
            delta=delta,
            da=lv[DA],
            ht5=lv[HT5],
            na=lv[NA],
            ach=lv[ACH],
            scenario=scenario.value if scenario else None,
            reward=reward,
            active_key=key,
        )
        state = WindowState(w, active, modes, tuple(spikes))
        self.prev_key = key
        self.recalled = recalled
        self.window += 1
        return WindowResult(record, state, ensembles, attention, recall_result, self.mods, gates, valence)

    def rem(self, probe: Stimulus, cycles: int = 1) -> ConsolidationReport:
        self.net, report = rem_replay(
            self.store, self.net, probe, cycles, self.mods, self.config.replay_settings()
        )
        return report


def run(
    config: RunConfig, net: Network | None = None, task: Task | None = None, sim: Simulation | None = None
) -> RunResult:
    sim = sim or Simulation(config, net)
    task = task or make_task(config.task)
    result = RunResult(config, sim.net, sim.net, sim.store)
    for w in range(config.windows):
        ts = task.step(w, sim.rng)
        out = sim.step(ts)
        task.learn(w, out.record.action, Scenario(out.record.scenario) if out.record.scenario else None, out.gates)
        result.records.append(out.record)
        for e in out.ensembles:
            result.ensembles.append(
                EnsembleRow(
                    w, e.id, len(e.members), len(e.support), e.rate_hz, e.phase_slot,
                    out.attention.scores[e.id], e.id == out.attention.dominant,
                )
            )
        r = out.record
        result.neuromod.append(NeuromodRow(w, r.delta, r.da, r.ht5, r.na, r.ach, r.scenario, out.valence))
        log.debug("window %d: %d bursting, dominant %s, delta %.4f", w, r.bursting_count, r.dominant_id, r.delta)
        n = config.rem_every_n_windows
        if n and (w + 1) % n == 0 and len(sim.store):
            report = sim.rem(task.probe())
            result.rem_reports.append(report)
            log.info("rem after window %d: %s", w, report.line())
    result.network = sim.net
    return result


def write_run(result: RunResult, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / CONFIG_FILE).write_text(result.config.to_text(network_path=NETWORK_FILE))
    (out / NETWORK_FILE).write_text(result.initial_network.to_text())
    (out / METRICS_FILE).write_text(result.metrics_text())
    (out / ENSEMBLES_FILE).write_text(table_text(ENSEMBLE_COLUMNS, result.ensembles))
    (out / NEUROMOD_FILE).write_text(table_text(NEUROMOD_COLUMNS, result.neuromod))
    (out / STORE_FILE).write_text(result.store.dumps())
    (out / FINAL_NETWORK_FILE).write_text(result.network.to_text())
    return out


def run_to_dir(config: RunConfig, out_dir: str | Path) -> RunResult:
    result = run(config)
    write_run(result, out_dir)
    log.info("wrote %d windows to %s", len(result.records), out_dir)
    return result


def replay(run_dir: str | Path) -> list[MetricsRecord]:
    """Re-run a saved run and require byte-identical metrics."""
    d = Path(run_dir)
    for name in (CONFIG_FILE, NETWORK_FILE, METRICS_FILE):
        if not (d / name).exists():
            raise SnapshotMissing(f"{d / name} is missing")
    config = load_config(d / CONFIG_FILE)
    result = run(config)
    fresh = result.metrics_text().splitlines()
    saved = (d / METRICS_FILE).read_text().splitlines()
    # line 0 is the seed header, line 1 the column header
    for i in range(max(len(fresh), len(saved))):
        a = fresh[i] if i < len(fresh) else None
        b = saved[i] if i < len(saved) else None
        if a != b:
            window = max(0, i - 2)
            raise Divergence(window, f"expected {b!r}, got {a!r}")
    return result.records
