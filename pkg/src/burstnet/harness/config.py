"""Run configuration: parsing, validation and round-trip serialization.

Config files use the same sectioned grammar as network specs::

    [run]
    network = canonical_931.net
    seed = 7
    windows = 50
    [task]
    kind = habituation
    pattern = 0 1 2 3 4 5 6 7 8

Every section other than ``[run]`` and ``[task]`` is optional and falls back
to the defaults below.  Relative paths resolve against the config file.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from ..binding import ScoreWeights
from ..dynamics import ClockParams
from ..errors import ConfigInvalid, SpecSyntaxError
from ..neuromod import DEFAULT_BASELINES, ModulatorGains, ModulatorKind
from ..plasticity import GateThresholds, ReplaySettings, StdpParams
from ..textformat import fmt_float, key_values, parse_sections


class TaskKind(enum.Enum):
    HABITUATION = "habituation"
    TRACE_CONDITIONING = "trace_conditioning"
    BANDIT = "bandit"
    SEQUENCE_RECALL = "sequence_recall"


# required and optional keys per task kind, with parsers
_IDS = "ids"
_ID_GROUPS = "id_groups"
_TASK_KEYS: dict[TaskKind, dict[str, tuple[str, object]]] = {
    TaskKind.HABITUATION: {
        "pattern": (_IDS, None),
        "drive": ("float", 1.0),
    },
    TaskKind.TRACE_CONDITIONING: {
        "cs": (_IDS, None),
        "us": (_IDS, None),
        "lag": ("int", 1),
        "iti": ("int", 2),
        "pairings": ("int", 20),
        "omissions": ("int", 5),
        "reward": ("float", 1.0),
    },
    TaskKind.BANDIT: {
        "context": (_IDS, None),
        "arms": (_IDS, None),
        "reward_probs": ("floats", None),
        "punish_probs": ("floats", None),
        "epsilon": ("float", 0.1),
        "q_rate": ("float", 0.2),
    },
    TaskKind.SEQUENCE_RECALL: {
        "items": (_ID_GROUPS, None),
        "gap": ("int", 2),
    },
}


@dataclass(frozen=True)
class TaskSpec:
    kind: TaskKind
    params: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.params[key]


@dataclass(frozen=True)
class Thresholds:
    forward: float = 0.5
    theta_explain: float = 0.5
    theta_bind: float = 0.5


@dataclass(frozen=True)
class MemoryParams:
    capacity_per_cycle: int = 9
    theta_recall: float = 0.6
    ach_suppress: float = 0.7


@dataclass(frozen=True)
class RemParams:
    na_clamp: float = 0.9
    ach_clamp: float = 0.1
    burst_gain: float | None = None


@dataclass(frozen=True)
class RunConfig:
    network_path: Path
    task: TaskSpec
    seed: int = 0
    windows: int = 0
    awake_consolidation: bool = True
    rem_every_n_windows: int = 0
    clock: ClockParams = ClockParams()
    thresholds: Thresholds = Thresholds()
    gates: GateThresholds = GateThresholds()
    memory: MemoryParams = MemoryParams()
    gains: ModulatorGains = ModulatorGains()
    baselines: dict = field(default_factory=lambda: dict(DEFAULT_BASELINES))
    learning_rate: float = 0.25
    score_weights: ScoreWeights = ScoreWeights()
    stdp: StdpParams = StdpParams()
    ttl_windows: int = 20
    rem: RemParams = RemParams()

    def replay_settings(self) -> ReplaySettings:
        return ReplaySettings(
            clock=self.clock,
            stdp=self.stdp,
            thresholds=self.gates,
            forward_threshold=self.thresholds.forward,
            theta_explain=self.thresholds.theta_explain,
            theta_bind=self.thresholds.theta_bind,
            na_clamp=self.rem.na_clamp,
            ach_clamp=self.rem.ach_clamp,
            burst_gain=self.rem.burst_gain,
            ttl_windows=self.ttl_windows,
        )

    def with_(self, **changes) -> RunConfig:
        return replace(self, **changes)

    def to_text(self, network_path: str | None = None) -> str:
        out = ["[run]"]
        out.append(f"network = {network_path or self.network_path}")
        out.append(f"seed = {self.seed}")
        out.append(f"windows = {self.windows}")
        out.append(f"awake_consolidation = {str(self.awake_consolidation).lower()}")
        out.append(f"rem_every_n_windows = {self.rem_every_n_windows}")
        for section, obj in (
            ("clock", self.clock),
            ("thresholds", self.thresholds),
            ("memory", self.memory),
            ("stdp", self.stdp),
            ("rem", self.rem),
        ):
            out.append(f"[{section}]")
            out += [f"{f.name} = {_fmt(getattr(obj, f.name))}" for f in fields(obj)]
            if section == "thresholds":
                out += [f"{f.name} = {_fmt(getattr(self.gates, f.name))}" for f in fields(self.gates)]
            if section == "stdp":
                out.append(f"ttl_windows = {self.ttl_windows}")
        out.append("[gains]")
        out += [f"{f.name} = {_fmt(getattr(self.gains, f.name))}" for f in fields(self.gains)]
        out += [f"{f.name} = {_fmt(getattr(self.score_weights, f.name))}" for f in fields(self.score_weights)]
        out.append(f"learning_rate = {_fmt(self.learning_rate)}")
        out += [f"baseline_{k.value.lower()} = {_fmt(v)}" for k, v in self.baselines.items()]
        out.append("[task]")
        out.append(f"kind = {self.task.kind.value}")
        for key, value in self.task.params.items():
            out.append(f"{key} = {_fmt_task(value)}")
        return "\n".join(out) + "\n"


def _fmt(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return fmt_float(v)
    return str(v)


def _fmt_task(v) -> str:
    if isinstance(v, tuple) and v and isinstance(v[0], tuple):
        return " | ".join(" ".join(str(x) for x in g) for g in v)
    if isinstance(v, tuple):
        return " ".join(_fmt(x) for x in v)
    return _fmt(v)


def _parse_value(kind: str, raw: str, lineno: int):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "optfloat":
            return None if raw.lower() == "none" else float(raw)
        if kind == "bool":
            if raw.lower() not in ("true", "false"):
                raise ValueError(raw)
            return raw.lower() == "true"
        if kind == "str":
            return raw
        if kind == "floats":
            return tuple(float(x) for x in raw.split())
        if kind == _IDS:
            return tuple(int(x) for x in raw.split())
        if kind == _ID_GROUPS:
            return tuple(tuple(int(x) for x in g.split()) for g in raw.split("|"))
    except ValueError:
        raise ConfigInvalid(f"line {lineno}: cannot read {raw!r} as {kind}") from None
    raise AssertionError(kind)


def _section(sections, name, spec: dict[str, str], required=()):
    kv = key_values(sections.get(name, []), set(spec), name)
    for key in required:
        if key not in kv:
            raise ConfigInvalid(f"[{name}] is missing {key!r}")
    return {k: _parse_value(spec[k], raw, lineno) for k, (lineno, raw) in kv.items()}


def _build(cls, values: dict, what: str):
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"[{what}] {exc}") from None


def parse_config(text: str, base_dir: str | Path = ".") -> RunConfig:
    try:
        sections = parse_sections(
            text, allowed={"run", "clock", "thresholds", "memory", "gains", "stdp", "rem", "task"}
        )
        run = _section(
            sections,
            "run",
            {
                "network": "str",
                "seed": "int",
                "windows": "int",
                "awake_consolidation": "bool",
                "rem_every_n_windows": "int",
            },
            required=("network",),
        )
        clock = _section(
            sections,
            "clock",
            {"window_ms": "int", "theta_hz": "float", "gamma_hz": "float", "burst_spike_count": "int", "burst_isi_ms": "int"},
        )
        thr = _section(
            sections,
            "thresholds",
            {
                "forward": "float",
                "theta_explain": "float",
                "theta_bind": "float",
                "ach_ltd": "float",
                "da_flip": "float",
                "na_consolidate": "float",
            },
        )
        memory = _section(
            sections, "memory", {"capacity_per_cycle": "int", "theta_recall": "float", "ach_suppress": "float"}
        )
        gains = _section(
            sections,
            "gains",
            {
                "k_da": "float",
                "k_ht": "float",
                "k_na": "float",
                "k_ach": "float",
                "h_ht": "float",
                "ht_mode": "str",
                "alpha": "float",
                "beta": "float",
                "gamma": "float",
                "learning_rate": "float",
                **{f"baseline_{k.value.lower()}": "float" for k in ModulatorKind},
            },
        )
        stdp = _section(
            sections,
            "stdp",
            {"a_plus": "float", "a_minus": "float", "tau_plus_ms": "float", "tau_minus_ms": "float", "ttl_windows": "int"},
        )
        rem = _section(sections, "rem", {"na_clamp": "float", "ach_clamp": "float", "burst_gain": "optfloat"})
        task = _parse_task(sections)
    except SpecSyntaxError as exc:
        raise ConfigInvalid(str(exc)) from None

    network_path = Path(run.pop("network"))
    if not network_path.is_absolute():
        network_path = Path(base_dir) / network_path
    if not network_path.exists():
        raise ConfigInvalid(f"network spec {network_path} does not exist")

    baselines = dict(DEFAULT_BASELINES)
    for k in ModulatorKind:
        v = gains.pop(f"baseline_{k.value.lower()}", None)
        if v is not None:
            baselines[k] = v
    learning_rate = gains.pop("learning_rate", 0.25)
    weights = {k: gains.pop(k) for k in ("alpha", "beta", "gamma") if k in gains}
    gate_keys = {k: thr.pop(k) for k in ("ach_ltd", "da_flip", "na_consolidate") if k in thr}
    ttl = stdp.pop("ttl_windows", 20)

    cfg = RunConfig(
        network_path=network_path,
        task=task,
        clock=_build(ClockParams, clock, "clock"),
        thresholds=_build(Thresholds, thr, "thresholds"),
        gates=_build(GateThresholds, gate_keys, "thresholds"),
        memory=_build(MemoryParams, memory, "memory"),
        gains=_build(ModulatorGains, gains, "gains"),
        baselines=baselines,
        learning_rate=learning_rate,
        score_weights=_build(ScoreWeights, weights, "gains"),
        stdp=_build(StdpParams, stdp, "stdp"),
        ttl_windows=ttl,
        rem=_build(RemParams, rem, "rem"),
        **run,
    )
    validate_config(cfg)
    return cfg


def _parse_task(sections) -> TaskSpec:
    lines = sections.get("task")
    if not lines:
        raise ConfigInvalid("missing [task] section")
    kinds = [ln for ln in lines if ln.key == "kind"]
    if not kinds:
        raise ConfigInvalid("[task] needs kind = ...")
    try:
        kind = TaskKind(kinds[0].value)
    except ValueError:
        raise ConfigInvalid(f"unknown task kind {kinds[0].value!r}") from None
    spec = _TASK_KEYS[kind]
    kv = key_values([ln for ln in lines if ln.key != "kind"], set(spec), "task")
    params = {}
    for key, (ptype, default) in spec.items():
        if key in kv:
            lineno, raw = kv[key]
            params[key] = _parse_value(ptype, raw, lineno)
        elif default is None:
            raise ConfigInvalid(f"{kind.value} task requires {key!r}")
        else:
            params[key] = default
    return TaskSpec(kind, params)


def validate_config(cfg: RunConfig) -> None:
    t = cfg.thresholds
    for name in ("forward", "theta_explain", "theta_bind"):
        v = getattr(t, name)
        if not (0.0 < v <= 1.0):
            raise ConfigInvalid(f"{name} = {v} outside (0, 1]")
    if not (5 <= cfg.memory.capacity_per_cycle <= 9):
        raise ConfigInvalid("capacity_per_cycle outside [5, 9]")
    if not (0.0 < cfg.memory.theta_recall <= 1.0):
        raise ConfigInvalid("theta_recall outside (0, 1]")
    if not (0.0 < cfg.learning_rate <= 1.0):
        raise ConfigInvalid("learning_rate outside (0, 1]")
    for v in cfg.baselines.values():
        if not (0.0 <= v <= 1.0):
            raise ConfigInvalid("modulator baselines must lie in [0, 1]")
    for name in ("ach_ltd", "da_flip", "na_consolidate"):
        if not (0.0 <= getattr(cfg.gates, name) <= 1.0):
            raise ConfigInvalid(f"{name} outside [0, 1]")
    if cfg.windows < 0 or cfg.rem_every_n_windows < 0 or cfg.ttl_windows < 1:
        raise ConfigInvalid("windows, rem_every_n_windows must be >= 0 and ttl_windows >= 1")
    if not (0 <= cfg.seed < 2**64):
        raise ConfigInvalid("seed must be a 64-bit unsigned integer")
    p = cfg.task.params
    if cfg.task.kind is TaskKind.BANDIT:
        n = len(p["arms"])
        if n < 2 or len(p["reward_probs"]) != n or len(p["punish_probs"]) != n:
            raise ConfigInvalid("bandit needs >= 2 arms and one reward/punish probability per arm")
        for a, b in zip(p["reward_probs"], p["punish_probs"]):
            if a < 0 or b < 0 or a + b > 1:
                raise ConfigInvalid("per-arm reward + punish probability must lie in [0, 1]")
        if not (0.0 <= p["epsilon"] <= 1.0) or not (0.0 < p["q_rate"] <= 1.0):
            raise ConfigInvalid("epsilon must lie in [0, 1] and q_rate in (0, 1]")
    if cfg.task.kind is TaskKind.TRACE_CONDITIONING:
        if p["lag"] < 1 or p["iti"] < 1 or p["pairings"] < 0 or p["omissions"] < 0:
            raise ConfigInvalid("trace conditioning needs lag >= 1, iti >= 1")
        if not (-1.0 <= p["reward"] <= 1.0) or p["reward"] == 0:
            raise ConfigInvalid("US reward must be nonzero and within [-1, 1]")
    if cfg.task.kind is TaskKind.SEQUENCE_RECALL:
        if len(p["items"]) < 2 or any(not g for g in p["items"]):
            raise ConfigInvalid("sequence recall needs >= 2 non-empty items")


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigInvalid(f"config {path} does not exist")
    return parse_config(path.read_text(), path.parent)
