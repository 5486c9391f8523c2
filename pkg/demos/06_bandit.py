"""Action values built from the neuromodulator gates steer choice toward the rewarded arm."""

import statistics

from burstnet import fixture_path
from burstnet.harness import load_config, run

cfg = load_config(fixture_path("bandit.cfg"))
shares = []
for seed in range(20):
    res = run(cfg.with_(seed=seed))
    acts = [r.action for r in res.records[-50:] if r.action is not None]
    shares.append(acts.count(2) / len(acts))
    if seed == 0:
        scen = [r.scenario for r in res.records if r.scenario]
        print("seed 0 scenarios:", {s: scen.count(s) for s in sorted(set(scen))})
print("reward-arm share per seed:", shares)
print("median:", statistics.median(shares))
