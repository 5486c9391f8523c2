"""A sequence seen once replays from its first item with the stimulus off."""

from burstnet import fixture_path
from burstnet.neuromod import ACH
from burstnet.harness import Simulation, load_config, make_task

cfg = load_config(fixture_path("sequence_recall.cfg"))
sim, task = Simulation(cfg), make_task(cfg.task)
for w in range(cfg.windows):
    step = task.step(w, sim.rng)
    out = sim.step(step)
    dom = next((sorted(e.members) for e in out.ensembles if e.id == out.attention.dominant), None)
    shown = sorted(step.stimulus.drive) or "-"
    print(f"window {w:2d} {step.phase:8s} stimulus {str(shown):8s} dominant {dom}  ACh {out.mods[ACH]:.2f}")
