"""Dopamine moves from the reward to the cue that predicts it, and dips when the reward is withheld."""

from burstnet import fixture_path
from burstnet.neuromod import DA
from burstnet.harness import load_config, make_task, run

cfg = load_config(fixture_path("trace_conditioning.cfg"))
task = make_task(cfg.task)
res = run(cfg)

print("trial   DA@CS   DA@US/omission")
rows = {}
for r in res.records:
    trial, _ = task.locate(r.window)
    phase = task.step(r.window, None).phase
    if phase in ("cs", "us", "omission"):
        rows.setdefault(trial, {})[phase] = r.da
for trial, d in rows.items():
    tail = d.get("us", d.get("omission"))
    tag = " (omission)" if "omission" in d else ""
    print(f"{trial:5d}   {d['cs']:.3f}   {tail:.3f}{tag}")
print(f"baseline DA {cfg.baselines[DA]:.2f}")
