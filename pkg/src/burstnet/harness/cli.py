"""``burstnet`` command line.

Exit codes: 0 success, 2 configuration error, 3 replay divergence,
4 any other module error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from ..episodic import EpisodicStore
from ..errors import BurstnetError, ConfigInvalid, Divergence, NetworkError, SnapshotMissing
from .config import load_config
from .plotdata import SERIES, emit_plotdata
from .runner import STORE_FILE, Simulation, replay, run, run_to_dir
from .tasks import make_task

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_MODULE = 0, 2, 3, 4

log = logging.getLogger("burstnet")


def _setup_logging() -> None:
    level = os.environ.get("BURSTNET_LOG_LEVEL", "error").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    result = run_to_dir(cfg, args.out)
    print(f"{len(result.records)} windows -> {args.out}")
    return EXIT_OK


def cmd_replay(args) -> int:
    records = replay(args.run_dir)
    print(f"identical: {len(records)} windows")
    return EXIT_OK


def cmd_inspect(args) -> int:
    path = Path(args.store)
    if path.is_dir():
        path = path / STORE_FILE
    if not path.exists():
        raise SnapshotMissing(f"{path} is missing")
    store = EpisodicStore.loads(path.read_text())
    print(f"{len(store.traces)} traces, {len(store)} items")
    for tid, k, th, sal, neurons in store.records():
        print(f"trace {tid} pos {k} theta {th} salience {sal:.3f} neurons {sorted(neurons)}")
    return EXIT_OK


def cmd_rem(args) -> int:
    cfg = load_config(args.config)
    sim = Simulation(cfg)
    task = make_task(cfg.task)
    run(cfg, task=task, sim=sim)
    probe = task.probe()
    print("pattern_key, synapses_changed, bursting_before, bursting_after")
    for _ in range(args.cycles):
        print(sim.rem(probe).line())
    return EXIT_OK


def cmd_plot(args) -> int:
    out = emit_plotdata(args.run_dir, args.which, args.output)
    print(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="burstnet", description="Bursting-inhibition network simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a configured experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("replay", help="re-run a run directory and compare metrics")
    p.add_argument("run_dir")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("inspect", help="list the episodic store of a run")
    p.add_argument("--store", required=True, help="run directory or store.tsv")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("rem", help="run the task, then REM-replay its store")
    p.add_argument("--config", required=True)
    p.add_argument("--cycles", type=int, default=1)
    p.set_defaults(func=cmd_rem)

    p = sub.add_parser("plot", help="write columnar plot data")
    p.add_argument("run_dir")
    p.add_argument("--which", required=True, help=f"one of {', '.join(SERIES)}")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "cycles", 1) < 1:
            raise ConfigInvalid("--cycles must be >= 1")
        return args.func(args)
    except (ConfigInvalid, NetworkError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Divergence as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_DIVERGENCE
    except BurstnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODULE


if __name__ == "__main__":
    sys.exit(main())
