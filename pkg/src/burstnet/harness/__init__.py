from .config import RunConfig, TaskKind, TaskSpec, load_config, parse_config
from .logs import MetricsRecord, read_metrics
from .plotdata import emit_plotdata
from .runner import RunResult, Simulation, replay, run, run_to_dir, write_run
from .tasks import Bandit, Habituation, SequenceRecall, TaskStep, TraceConditioning, make_task

__all__ = [
    "Bandit",
    "Habituation",
    "MetricsRecord",
    "RunConfig",
    "RunResult",
    "SequenceRecall",
    "Simulation",
    "TaskKind",
    "TaskSpec",
    "TaskStep",
    "TraceConditioning",
    "emit_plotdata",
    "load_config",
    "make_task",
    "parse_config",
    "read_metrics",
    "replay",
    "run",
    "run_to_dir",
    "write_run",
]
