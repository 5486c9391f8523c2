"""Replaying the day's episodes under REM clamps moves bursting up the hierarchy."""

from burstnet import fixture_path
from burstnet.harness import load_config, make_task, run
from burstnet.plasticity import rem_replay

cfg = load_config(fixture_path("habituation.cfg")).with_(rem_every_n_windows=0)
awake = run(cfg)
print("awake bursting counts:", sorted({r.bursting_count for r in awake.records}))

probe = make_task(cfg.task).probe()
net = awake.network
for cycle in range(1, 4):
    net, rep = rem_replay(awake.store, net, probe, 1, settings=cfg.replay_settings())
    print(f"cycle {cycle}: {rep.line()}")
print("part -> object weights:", [round(net.synapse(m, 12).weight, 3) for m in (9, 10, 11)])
