"""Acceptance gate: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``.
The lines are also repeated in the pytest terminal summary.
"""

from __future__ import annotations

import math
import shutil
import statistics
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from burstnet import fixture_path  # noqa: E402
from burstnet.binding import form_ensembles  # noqa: E402
from burstnet.dynamics import FiringMode, SpikeEvent, assign_modes, forward_pass  # noqa: E402
from burstnet.harness import Simulation, load_config, make_task, replay, run, run_to_dir  # noqa: E402
from burstnet.netcore import (  # noqa: E402
    NetworkSpec,
    NeuronKind,
    Region,
    RegionTag,
    SynapseKind,
    build_network,
    strong_subgraph,
)
from burstnet.neuromod import (  # noqa: E402
    ACH,
    DA,
    DEFAULT_BASELINES,
    HT5,
    NA,
    NO_GATES,
    GateSet,
    ModulatorState,
    Scenario,
    classify_scenario,
)
from burstnet.plasticity import (  # noqa: E402
    EligibilityTrace,
    StdpParams,
    accumulate,
    apply_gates,
    probe_bursting,
    rem_replay,
    stdp_delta,
)
from netgen import random_network, random_stimulus  # noqa: E402
from oracles import components_oracle  # noqa: E402

RESULTS: list[str] = []


def report(n: int, name: str, ok: bool, detail: str, elapsed: float, budget: float | None = None) -> None:
    within = budget is None or elapsed < budget
    status = "PASS" if ok and within else "FAIL"
    limit = f" (limit {budget:g} s)" if budget is not None else ""
    line = f"[{status}] criterion {n:2d} {name}: {detail}; {elapsed:.2f} s{limit}"
    RESULTS.append(line)
    print(line)
    assert ok, line
    assert within, line


def cfg(name):
    return load_config(fixture_path(name))


def test_c01_explanation_root():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240101)
    violations = 0
    for _ in range(1000):
        net = random_network(rng)
        active = forward_pass(net, random_stimulus(rng, len(net), p=float(rng.uniform(0.1, 0.6))))
        strong = strong_subgraph(net, 0.5)
        modes = assign_modes(active, strong, net.apical_view())
        for n in active & net.excitatory:
            explained = bool(strong.successors(n) & active)
            if (modes[n] is FiringMode.BURSTING) == explained:
                violations += 1
    report(1, "explanation root", violations == 0, f"{violations} violations in 1000 networks", time.perf_counter() - t0, 10)


def test_c02_ensemble_partition():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    mismatches = 0
    multi = 0
    for _ in range(500):
        net = random_network(rng, p_relay=0.08)
        active = forward_pass(net, random_stimulus(rng, len(net), p=0.4))
        modes = assign_modes(active, strong_subgraph(net, float(rng.uniform(0.2, 0.9))), net.apical_view())
        theta_bind = float(rng.uniform(0.1, 1.0))
        got = [e.members for e in form_ensembles(modes, net, theta_bind)]
        expected, _ = components_oracle(modes, net, theta_bind)
        mismatches += got != expected
        multi += len(got) > 1
    report(
        2,
        "ensemble partition",
        mismatches == 0,
        f"{mismatches} mismatches in 500 windows ({multi} with several ensembles)",
        time.perf_counter() - t0,
        10,
    )


def test_c03_schultz():
    t0 = time.perf_counter()
    c = cfg("trace_conditioning.cfg")
    task = make_task(c.task)
    res = run(c)
    base = c.baselines[DA]
    cs, us, om = [], [], []
    for r in res.records:
        trial, _ = task.locate(r.window)
        phase = task.step(r.window, None).phase
        if phase == "cs" and trial >= 10:
            cs.append(r.da - base)
        elif phase == "us" and trial >= 10:
            us.append(r.da - base)
        elif phase == "omission":
            om.append(base - r.da)
    ok = len(om) == 5 and min(cs) >= 0.1 and max(abs(x) for x in us) <= 0.05 and min(om) >= 0.1
    detail = f"CS margin {min(cs):.3f}, US |dev| {max(abs(x) for x in us):.3f}, omission dip {min(om):.3f}"
    report(3, "Schultz DA profile", ok, detail, time.perf_counter() - t0, 5)


def test_c04_stream_of_thoughts():
    t0 = time.perf_counter()
    c = cfg("sequence_recall.cfg")
    sim, task = Simulation(c), make_task(c.task)
    items = [frozenset(g) for g in c.task["items"]]
    doms, achs, stims = [], [], []
    for w in range(c.windows):
        step = task.step(w, sim.rng)
        out = sim.step(step)
        doms.append(next((e.members for e in out.ensembles if e.id == out.attention.dominant), None))
        achs.append(out.mods[ACH])
        stims.append(bool(step.stimulus.drive))
    cue = task.cue_window
    replayed = doms[cue + 1 : cue + 5]
    ok = (
        doms[cue] == items[0]
        and replayed == items[1:]
        and not any(stims[cue + 1 : cue + 5])
        and max(achs[cue : cue + 4]) < c.memory.ach_suppress
    )
    report(4, "stream of thoughts", ok, f"replayed {len(replayed)} items after cue, exact match {replayed == items[1:]}", time.perf_counter() - t0, 1)


def test_c05_abstraction_climb():
    t0 = time.perf_counter()
    c = cfg("habituation.cfg").with_(rem_every_n_windows=0)
    res = run(c)
    settings = c.replay_settings()
    probe = make_task(c.task).probe()
    net = res.network
    counts = [len(probe_bursting(net, probe, settings))]
    for _ in range(10):
        net, rep = rem_replay(res.store, net, probe, 1, settings=settings)
        assert rep.bursting_before == counts[-1]
        counts.append(rep.bursting_after)
    monotone = all(a >= b for a, b in zip(counts, counts[1:]))
    ok = counts[0] == 3 and 1 in counts and monotone and counts[-1] == 1
    report(5, "abstraction climb", ok, f"probe bursting per cycle {counts}", time.perf_counter() - t0, 5)


def test_c06_stdp_golden():
    t0 = time.perf_counter()
    p = StdpParams()
    worst = 0.0
    for dt in (5.0, 20.0, 50.0, -5.0, -20.0, -50.0):
        closed = 0.05 * math.exp(-dt / 20.0) if dt > 0 else -0.055 * math.exp(dt / 20.0)
        worst = max(worst, abs(stdp_delta(dt, p) - closed) / abs(closed))
    net = build_network(
        NetworkSpec(
            regions=[Region("ctx", RegionTag.SENSORY_CORTEX, channel=0)],
            neurons=[("ctx", 2, NeuronKind.EXCITATORY)],
            synapses=[(0, 1, 0.5, SynapseKind.DRIVING)],
        )
    )
    sym = StdpParams(a_plus=0.05, a_minus=0.05)
    spikes = sorted([SpikeEvent(t, 0) for t in (0, 20, 40, 60, 80)] + [SpikeEvent(t, 1) for t in (10, 30, 50, 70)])
    trace = EligibilityTrace()
    accumulate(spikes, net, sym, NO_GATES, ModulatorState.at_baseline(), trace)
    net_dw = abs(trace.pending[(0, 1)])
    ok = worst <= 1e-12 and net_dw < 1e-12
    report(6, "STDP golden values", ok, f"max rel err {worst:.1e}, antiphase |dw| {net_dw:.1e}", time.perf_counter() - t0)


GATE_SIGNS = {
    # (raw sign, DA high, ACh high) -> sign of the gated change
    (+1, True, True): -1,
    (+1, True, False): +1,
    (+1, False, True): -1,
    (+1, False, False): +1,
    (-1, True, True): -1,
    (-1, True, False): +1,
    (-1, False, True): -1,
    (-1, False, False): -1,
}


def test_c07_gating_truth_table():
    t0 = time.perf_counter()
    wrong = 0
    for (sign, da_high, ach_high), expected in GATE_SIGNS.items():
        mods = ModulatorState(
            {DA: 0.9 if da_high else 0.1, HT5: 0.2, NA: 0.1, ACH: 0.9 if ach_high else 0.1}, DEFAULT_BASELINES
        )
        wrong += apply_gates(sign * 0.02, NO_GATES, mods) != expected * 0.02
    report(7, "gating truth table", wrong == 0, f"{8 - wrong}/8 combinations exact", time.perf_counter() - t0)


def test_c08_quadrants():
    t0 = time.perf_counter()
    mods = ModulatorState({DA: 0.61, HT5: 0.47, NA: 0.53, ACH: 0.29}, DEFAULT_BASELINES)
    table = {
        (1, 1): (Scenario.REINFORCE_REWARD, GateSet(memory_learn=0.53, action_reinforce=0.61)),
        (1, -1): (Scenario.AVOID_PUNISHMENT, GateSet(memory_learn=0.53, action_avert=0.47)),
        (-1, 1): (Scenario.UNLEARN_REWARD_PATH, GateSet(memory_unlearn=0.29, action_avert=0.47)),
        (-1, -1): (Scenario.REINFORCE_NON_PUNISHMENT, GateSet(memory_unlearn=0.29, action_reinforce=0.61)),
    }
    hits = sum(classify_scenario(0.5 * s, v, mods) == table[(s, v)] for s, v in table)
    report(8, "quadrant coverage", hits == 4, f"{hits}/4 cells exact", time.perf_counter() - t0)


def test_c09_bandit():
    t0 = time.perf_counter()
    c = cfg("bandit.cfg")
    arm_a = c.task["arms"][0]
    fracs = []
    for seed in range(20):
        res = run(c.with_(seed=seed))
        acts = [r.action for r in res.records[-50:] if r.action is not None]
        fracs.append(acts.count(arm_a) / len(acts))
    med = statistics.median(fracs)
    report(9, "bandit competence", med >= 0.8 and c.windows == 200, f"median reward-arm share {med:.2f} over 20 seeds", time.perf_counter() - t0, 30)


def test_c10_determinism():
    t0 = time.perf_counter()
    tmp = Path(tempfile.mkdtemp())
    try:
        ok = True
        for name in ("habituation.cfg", "trace_conditioning.cfg", "bandit.cfg", "sequence_recall.cfg"):
            d = tmp / name
            res = run_to_dir(cfg(name), d)
            again = replay(d)
            ok &= again == res.records
            ok &= run(cfg(name)).metrics_text().encode() == (d / "metrics.tsv").read_bytes()
        counts = [r.bursting_count for r in run(cfg("habituation.cfg")).records]
        non_increasing = all(a >= b for a, b in zip(counts, counts[1:]))
    finally:
        shutil.rmtree(tmp)
    report(
        10,
        "determinism + habituation",
        ok and non_increasing,
        f"4 runs replay byte-identical: {ok}; bursting {counts[0]} -> {counts[-1]} non-increasing: {non_increasing}",
        time.perf_counter() - t0,
    )


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_c") and callable(fn):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
