import shutil

import numpy as np
import pytest

from burstnet.errors import ConfigInvalid, Divergence, SnapshotMissing, UnknownSeries
from burstnet.harness import Simulation, TaskKind, emit_plotdata, load_config, read_metrics, replay, run, run_to_dir
from burstnet.harness import runner as runner_mod
from burstnet.harness.config import parse_config
from burstnet.harness.logs import MetricsRecord, SchemaError, metrics_text
from burstnet.harness.tasks import Bandit, TraceConditioning, make_task
from burstnet.neuromod import ACH, DA, HT5, NA


@pytest.fixture
def hab(fixtures_dir):
    return load_config(fixtures_dir / "habituation.cfg")


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


# config


def test_fixture_configs_load(fixtures_dir):
    kinds = {load_config(p).task.kind for p in fixtures_dir.glob("*.cfg")}
    assert kinds == set(TaskKind)


def test_config_round_trip(hab, tmp_path):
    shutil.copy(hab.network_path, tmp_path / "net.txt")
    again = load_config(write(tmp_path, "c.cfg", hab.to_text(network_path="net.txt")))
    assert again.with_(network_path=hab.network_path) == hab


@pytest.mark.parametrize(
    "patch",
    [
        "[run]\nwindows = 5\n",  # missing network
        "[run]\nnetwork = missing.net\n[task]\nkind = habituation\npattern = 0\n",
        "[run]\nnetwork = n.net\n[task]\nkind = habituation\n",  # missing pattern
        "[run]\nnetwork = n.net\n[task]\nkind = dancing\n",
        "[run]\nnetwork = n.net\ncolour = red\n[task]\nkind = habituation\npattern = 0\n",
        "[run]\nnetwork = n.net\n[extra]\n[task]\nkind = habituation\npattern = 0\n",
        "[run]\nnetwork = n.net\n[clock]\nwindow_ms = 400\n[task]\nkind = habituation\npattern = 0\n",
        "[run]\nnetwork = n.net\n[clock]\ntheta_hz = 9\n[task]\nkind = habituation\npattern = 0\n",
        "[run]\nnetwork = n.net\n[memory]\ncapacity_per_cycle = 12\n[task]\nkind = habituation\npattern = 0\n",
        "[run]\nnetwork = n.net\n[thresholds]\ntheta_explain = 1.5\n[task]\nkind = habituation\npattern = 0\n",
        "[run]\nnetwork = n.net\nseed = -1\n[task]\nkind = habituation\npattern = 0\n",
        "[run]\nnetwork = n.net\nwindows = many\n[task]\nkind = habituation\npattern = 0\n",
        "[run]\nnetwork = n.net\n[gains]\nht_mode = both\n[task]\nkind = habituation\npattern = 0\n",
        "[run]\nnetwork = n.net\n[task]\nkind = bandit\ncontext = 0\narms = 1 2\nreward_probs = 0.9\npunish_probs = 0 0.9\n",
        "[run]\nnetwork = n.net\n[task]\nkind = trace_conditioning\ncs = 0\nus = 1\nlag = 0\n",
    ],
)
def test_invalid_configs(tmp_path, patch, net931):
    (tmp_path / "n.net").write_text(net931.to_text())
    with pytest.raises(ConfigInvalid):
        load_config(write(tmp_path, "bad.cfg", patch))


def test_paths_resolve_relative_to_config(tmp_path, net931):
    (tmp_path / "sub").mkdir()
    (tmp_path / "sub" / "n.net").write_text(net931.to_text())
    cfg = load_config(write(tmp_path, "c.cfg", "[run]\nnetwork = sub/n.net\n[task]\nkind = habituation\npattern = 0\n"))
    assert cfg.network_path == tmp_path / "sub" / "n.net"
    assert cfg.windows == 0 and cfg.seed == 0 and cfg.rem_every_n_windows == 0


def test_task_defaults_filled(fixtures_dir):
    cfg = load_config(fixtures_dir / "bandit.cfg")
    assert cfg.task["epsilon"] == 0.1 and cfg.task["arms"] == (2, 3)
    with pytest.raises(ConfigInvalid):
        load_config(fixtures_dir / "nope.cfg")


# run


def test_zero_windows(hab):
    res = run(hab.with_(windows=0))
    assert res.records == [] and res.network == res.initial_network
    assert res.metrics_text().splitlines() == ["# seed=7", "\t".join(MetricsRecord.__dataclass_fields__)]


def test_same_seed_byte_identical(fixtures_dir, tmp_path):
    cfg = load_config(fixtures_dir / "bandit.cfg").with_(windows=60)
    run_to_dir(cfg, tmp_path / "a")
    run_to_dir(cfg, tmp_path / "b")
    for name in ("metrics.tsv", "ensembles.tsv", "neuromod.tsv", "store.tsv", "final_network.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    other = run(cfg.with_(seed=1))
    assert other.metrics_text() != (tmp_path / "a" / "metrics.tsv").read_text()


def test_habituation_bursting_non_increasing(hab):
    counts = [r.bursting_count for r in run(hab).records]
    assert len(counts) == 50
    assert all(a >= b for a, b in zip(counts, counts[1:]))
    assert counts[0] == 3 and counts[-1] == 1


def test_habituation_without_rem_is_flat(hab):
    counts = [r.bursting_count for r in run(hab.with_(rem_every_n_windows=0)).records]
    assert counts == [3] * 50


def test_log_completeness(fixtures_dir):
    cfg = load_config(fixtures_dir / "trace_conditioning.cfg")
    res = run(cfg)
    assert [r.window for r in res.records] == list(range(cfg.windows))
    for r in res.records:
        r.validate()
    assert len(res.neuromod) == cfg.windows
    per_window = {}
    for e in res.ensembles:
        per_window[e.window] = per_window.get(e.window, 0) + 1
    assert all(per_window.get(r.window, 0) == r.ensemble_count for r in res.records)


def test_schema_rejects_bad_records():
    good = MetricsRecord(0, 1, 0, 1, 3, None, 0.0, 0.3, 0.2, 0.1, 0.2, None, 0.0, "k")
    with pytest.raises(SchemaError):
        MetricsRecord(0, 1, 0, 1, 3, None, 0.0, 1.3, 0.2, 0.1, 0.2, None, 0.0, "k").validate()
    with pytest.raises(SchemaError):
        MetricsRecord(0, 1, 0, 0, 3, None, 0.0, 0.3, 0.2, 0.1, 0.2, None, 0.0, "k").validate()
    with pytest.raises(SchemaError):
        metrics_text([good, good], 0)
    assert MetricsRecord.parse(good.row()) == good


def test_loop_order_gates_use_same_window_levels(fixtures_dir, monkeypatch):
    cfg = load_config(fixtures_dir / "trace_conditioning.cfg").with_(windows=30)
    seen = []
    real = runner_mod.accumulate

    def spy(spikes, net, p, gates, mods, trace, thresholds):
        seen.append((mods, gates))
        return real(spikes, net, p, gates, mods, trace, thresholds)

    monkeypatch.setattr(runner_mod, "accumulate", spy)
    res = run(cfg)
    assert len(seen) == len(res.records)
    for (mods, gates), rec in zip(seen, res.records):
        assert (mods[DA], mods[HT5], mods[NA], mods[ACH]) == (rec.da, rec.ht5, rec.na, rec.ach)
        if rec.scenario == "reinforce_reward":
            assert gates.action_reinforce == rec.da and gates.memory_learn == rec.na
        if rec.scenario is None:
            assert gates == type(gates)()


# replay


def test_replay_untouched(hab, tmp_path):
    run_to_dir(hab, tmp_path)
    assert len(replay(tmp_path)) == 50


def test_replay_corrupted_seed(hab, tmp_path):
    run_to_dir(hab, tmp_path)
    cfg = tmp_path / "config.txt"
    cfg.write_text(cfg.read_text().replace("seed = 7", "seed = 8"))
    with pytest.raises(Divergence) as exc:
        replay(tmp_path)
    assert exc.value.window == 0


def test_replay_missing_snapshot(hab, tmp_path):
    run_to_dir(hab, tmp_path)
    (tmp_path / "network.txt").unlink()
    with pytest.raises(SnapshotMissing):
        replay(tmp_path)


SEQ_NET = """[regions]
scene sensory 0
[neurons]
scene 11 E
[synapses]
0 1 0.8 relay
2 3 0.8 relay
4 5 0.8 relay
6 7 0.8 relay
8 9 0.8 relay
8 10 0.3 driving
[params]
seed = 0
"""


def _first_active_divergence(cfg_a, cfg_b):
    """Binary search for the first window whose active set differs."""

    def actives(cfg, n):
        sim, task = Simulation(cfg), make_task(cfg.task)
        return [sim.step(task.step(w, sim.rng)).state.active for w in range(n)]

    lo, hi = 0, cfg_a.windows
    if actives(cfg_a, hi) == actives(cfg_b, hi):
        return None
    while lo < hi:
        mid = (lo + hi) // 2
        if actives(cfg_a, mid + 1) == actives(cfg_b, mid + 1):
            lo = mid + 1
        else:
            hi = mid
    return lo


def test_replay_edited_weight_reports_first_changed_window(tmp_path, fixtures_dir):
    (tmp_path / "seq.net").write_text(SEQ_NET)
    base = load_config(fixtures_dir / "sequence_recall.cfg")
    cfg = base.with_(network_path=tmp_path / "seq.net")
    run_to_dir(cfg, tmp_path / "run")
    snap = tmp_path / "run" / "network.txt"
    snap.write_text(snap.read_text().replace("8 10 0.3 driving", "8 10 0.9 driving"))
    edited = load_config(tmp_path / "run" / "config.txt")
    expected = _first_active_divergence(cfg, edited)
    assert expected == 4
    with pytest.raises(Divergence) as exc:
        replay(tmp_path / "run")
    assert exc.value.window == expected


# plot data


def test_plotdata_projections(hab, tmp_path):
    run_to_dir(hab, tmp_path)
    _, recs = read_metrics(tmp_path / "metrics.tsv")
    rows = [ln.split("\t") for ln in emit_plotdata(tmp_path, "burst_curve").read_text().splitlines()]
    assert rows[0] == ["window", "bursting_count"]
    assert rows[1:] == [[str(r.window), str(r.bursting_count)] for r in recs]
    rows = [ln.split("\t") for ln in emit_plotdata(tmp_path, "modulators").read_text().splitlines()]
    assert rows[0] == ["window", "da", "ht5", "na", "ach"] and len(rows) == 51
    assert float(rows[1][1]) == recs[0].da
    with pytest.raises(UnknownSeries):
        emit_plotdata(tmp_path, "spikes")


def test_plotdata_ensembles_rows_match_count(tmp_path, fixtures_dir):
    text = (fixtures_dir / "habituation.cfg").read_text()
    text = text.replace("canonical_931.net", str(fixtures_dir / "sequence.net"))
    text = text.replace("pattern = 0 1 2 3 4 5 6 7 8", "pattern = 0 2 4")
    cfg = parse_config(text, fixtures_dir).with_(windows=5)
    run_to_dir(cfg, tmp_path)
    _, recs = read_metrics(tmp_path / "metrics.tsv")
    assert all(r.ensemble_count == 3 for r in recs)
    rows = emit_plotdata(tmp_path, "ensembles").read_text().splitlines()[1:]
    for r in recs:
        assert sum(row.split("\t")[0] == str(r.window) for row in rows) == r.ensemble_count


# tasks


def test_trace_conditioning_schedule():
    t = TraceConditioning(cs=[0], us=[1], lag=2, iti=2, pairings=2, omissions=1)
    phases = [t.step(w, None).phase for w in range(t.total_windows + 1)]
    assert phases == ["cs", "cs", "us", "iti", "iti"] * 2 + ["cs", "cs", "omission", "iti", "iti", "after"]
    assert t.step(0, None).boundary and not t.step(1, None).boundary
    assert t.step(2, None).reward == 1.0 and t.step(12, None).reward == 0.0


def test_schultz_profile(fixtures_dir):
    cfg = load_config(fixtures_dir / "trace_conditioning.cfg")
    t = make_task(cfg.task)
    res = run(cfg)
    base = cfg.baselines[DA]
    for r in res.records:
        trial, _ = t.locate(r.window)
        phase = t.step(r.window, None).phase
        if phase == "cs" and (trial >= 10):
            assert r.da >= base + 0.1
        if phase == "us" and trial >= 10:
            assert abs(r.da - base) <= 0.05
        if phase == "omission":
            assert r.da <= base - 0.1
            assert r.scenario == "unlearn_reward_path"


def test_sequence_replays_after_cue(fixtures_dir):
    cfg = load_config(fixtures_dir / "sequence_recall.cfg")
    sim, task = Simulation(cfg), make_task(cfg.task)
    dominants = []
    for w in range(cfg.windows):
        out = sim.step(task.step(w, sim.rng))
        dom = next((e.members for e in out.ensembles if e.id == out.attention.dominant), None)
        dominants.append(dom)
    items = [frozenset(g) for g in cfg.task["items"]]
    cue = task.cue_window
    assert dominants[:5] == items
    assert dominants[cue : cue + 5] == items
    assert dominants[cue + 5] is None


def _tabular_oracle(seed, trials=100, last=25, eps=0.1, rate=0.2):
    """Plain epsilon-greedy Q-learning on raw +-1 outcomes."""
    rng = np.random.default_rng(seed)
    q = [0.0, 0.0]
    picks = []
    for _ in range(trials):
        if rng.random() < eps:
            a = int(rng.integers(2))
        else:
            a = int(np.argmax(q)) if q[0] != q[1] else int(rng.integers(2))
        u = rng.random()
        r = (1.0 if u < 0.9 else 0.0) if a == 0 else (-1.0 if u < 0.9 else 0.0)
        q[a] += rate * (r - q[a])
        picks.append(a)
    return picks[-last:].count(0) / last


def test_tabular_oracle_supports_threshold():
    assert np.median([_tabular_oracle(s) for s in range(20)]) >= 0.8


def test_bandit_learns_reward_arm(fixtures_dir):
    cfg = load_config(fixtures_dir / "bandit.cfg")
    fracs = []
    for seed in range(5):
        res = run(cfg.with_(seed=seed))
        acts = [r.action for r in res.records[-50:] if r.action is not None]
        assert len(acts) == 25
        fracs.append(acts.count(2) / 25)
    assert np.median(fracs) >= 0.8


def test_bandit_q_update_from_gates():
    from burstnet.neuromod import GateSet, Scenario

    b = Bandit(context=[0], arms=[2, 3], reward_probs=[0.9, 0], punish_probs=[0, 0.9], q_rate=0.5)
    b.learn(0, 2, None, GateSet())
    b.learn(1, None, Scenario.REINFORCE_REWARD, GateSet(action_reinforce=0.8))
    assert b.q == {2: 0.4, 3: 0.0}
    b.learn(2, 3, None, GateSet())
    b.learn(3, None, Scenario.AVOID_PUNISHMENT, GateSet(action_avert=0.6))
    assert b.q == {2: 0.4, 3: -0.3}


def test_rem_interleaving_reports(hab):
    res = run(hab)
    assert len(res.rem_reports) == 5
    assert res.rem_reports[0].bursting_before == 3 and res.rem_reports[0].bursting_after == 1
