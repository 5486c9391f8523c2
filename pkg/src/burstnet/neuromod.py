"""Prediction error, modulator levels, amygdala conditioning and learning gates.

Levels live on a [0, 1] scale.  Each window the harness applies, in order,
``compute_pe`` -> ``update_modulators`` -> ``classify_scenario``.
"""

from __future__ import annotations

import enum
import hashlib
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace

from .errors import ZeroDelta, ZeroValence
from .netcore import ModulatorKind

DA, HT5, NA, ACH = ModulatorKind.DA, ModulatorKind.HT5, ModulatorKind.NA, ModulatorKind.ACH

DEFAULT_BASELINES = {DA: 0.3, HT5: 0.2, NA: 0.1, ACH: 0.2}


def clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def state_key(members: Iterable[int]) -> str:
    """Canonical hash of a neuron set; stable across processes."""
    ids = ",".join(str(n) for n in sorted(set(members)))
    return hashlib.blake2b(ids.encode(), digest_size=8).hexdigest()


@dataclass(frozen=True)
class ModulatorState:
    level: Mapping[ModulatorKind, float]
    baseline: Mapping[ModulatorKind, float]

    def __post_init__(self):
        for name, m in (("level", self.level), ("baseline", self.baseline)):
            if set(m) != set(ModulatorKind):
                raise ValueError(f"{name} must cover every modulator")
            for k, v in m.items():
                if not (0.0 <= v <= 1.0):
                    raise ValueError(f"{name}[{k.value}] = {v} outside [0, 1]")

    @classmethod
    def at_baseline(cls, baseline: Mapping[ModulatorKind, float] | None = None) -> ModulatorState:
        b = dict(DEFAULT_BASELINES if baseline is None else baseline)
        return cls(dict(b), b)

    def with_levels(self, **levels: float) -> ModulatorState:
        """Copy with some levels overridden, e.g. ``with_levels(NA=0.9, ACh=0.1)``."""
        new = dict(self.level)
        for name, v in levels.items():
            new[ModulatorKind(name)] = v
        return replace(self, level=new)

    def __getitem__(self, k: ModulatorKind) -> float:
        return self.level[k]


@dataclass(frozen=True)
class ModulatorGains:
    k_da: float = 0.5
    k_ht: float = 0.4
    k_na: float = 0.6
    k_ach: float = 0.5
    h_ht: float = 3.0  # 5-HT excess half-life, in windows
    ht_mode: str = "unsigned"  # or "opponent": 5-HT tracks negative PE only

    def __post_init__(self):
        if self.ht_mode not in ("unsigned", "opponent"):
            raise ValueError(f"ht_mode must be 'unsigned' or 'opponent', got {self.ht_mode!r}")
        if self.h_ht <= 0:
            raise ValueError("h_ht must be positive")


@dataclass
class ValueTable:
    learning_rate: float = 0.25
    v: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not (0.0 < self.learning_rate <= 1.0):
            raise ValueError(f"learning_rate must lie in (0, 1], got {self.learning_rate}")

    def __getitem__(self, key: str) -> float:
        return self.v.get(key, 0.0)


def compute_pe(reward: float, key: str, vt: ValueTable) -> float:
    """delta = reward - V[key]; then V[key] moves toward reward, clamped to [-1, 1]."""
    delta = reward - vt[key]
    vt.v[key] = min(1.0, max(-1.0, vt[key] + vt.learning_rate * delta))
    return delta


def update_modulators(
    delta: float,
    novelty_count: int,
    amygdala_valence: float,
    mods: ModulatorState,
    n_excitatory: int,
    gains: ModulatorGains = ModulatorGains(),
) -> ModulatorState:
    if novelty_count < 0:
        raise ValueError("novelty_count must be >= 0")
    b = mods.baseline
    novelty = novelty_count / n_excitatory if n_excitatory else 0.0
    ht_drive = abs(delta) if gains.ht_mode == "unsigned" else max(0.0, -delta)
    prev_excess = max(0.0, mods.level[HT5] - b[HT5])
    decayed = prev_excess * 0.5 ** (1.0 / gains.h_ht)
    level = {
        DA: clamp01(b[DA] + gains.k_da * delta),
        HT5: clamp01(b[HT5] + max(decayed, gains.k_ht * ht_drive)),
        NA: clamp01(b[NA] + gains.k_na * (abs(delta) + abs(amygdala_valence))),
        ACH: clamp01(
            b[ACH] + gains.k_ach * (novelty + max(0.0, -delta) + max(0.0, -amygdala_valence))
        ),
    }
    return ModulatorState(level, b)


class Scenario(enum.Enum):
    REINFORCE_REWARD = "reinforce_reward"
    AVOID_PUNISHMENT = "avoid_punishment"
    UNLEARN_REWARD_PATH = "unlearn_reward_path"
    REINFORCE_NON_PUNISHMENT = "reinforce_non_punishment"


@dataclass(frozen=True)
class GateSet:
    memory_learn: float = 0.0  # NA
    memory_unlearn: float = 0.0  # ACh
    action_reinforce: float = 0.0  # DA
    action_avert: float = 0.0  # 5-HT

    def __post_init__(self):
        if min(self.memory_learn, self.memory_unlearn, self.action_reinforce, self.action_avert) < 0:
            raise ValueError("gates must be nonnegative")


NO_GATES = GateSet()


def classify_scenario(delta: float, valence_sign: int, mods: ModulatorState) -> tuple[Scenario, GateSet]:
    """Map (PE sign, valence sign) to the reinforcement scenario and its gates.

    Memory gates come from NA (learn) or ACh (unlearn); action gates from DA
    (reinforce) or 5-HT (avert).  Gate magnitudes are the current levels.
    """
    if delta == 0:
        raise ZeroDelta("zero prediction error: no learning event")
    if valence_sign not in (1, -1):
        raise ValueError(f"valence_sign must be +1 or -1, got {valence_sign}")
    lv = mods.level
    if delta > 0 and valence_sign > 0:
        return Scenario.REINFORCE_REWARD, GateSet(memory_learn=lv[NA], action_reinforce=lv[DA])
    if delta > 0:
        return Scenario.AVOID_PUNISHMENT, GateSet(memory_learn=lv[NA], action_avert=lv[HT5])
    if valence_sign > 0:
        return Scenario.UNLEARN_REWARD_PATH, GateSet(memory_unlearn=lv[ACH], action_avert=lv[HT5])
    return Scenario.REINFORCE_NON_PUNISHMENT, GateSet(memory_unlearn=lv[ACH], action_reinforce=lv[DA])


@dataclass
class AmygdalaStore:
    associations: dict[str, float] = field(default_factory=dict)

    def valence(self, key: str) -> float:
        return self.associations.get(key, 0.0)

    def __contains__(self, key: str) -> bool:
        return key in self.associations


def condition(key: str, us_valence: float, store: AmygdalaStore) -> AmygdalaStore:
    """Pavlovian association; the latest pairing overwrites earlier ones."""
    if us_valence == 0:
        raise ZeroValence("conditioning needs a nonzero valence")
    if not (-1.0 <= us_valence <= 1.0):
        raise ValueError(f"valence {us_valence} outside [-1, 1]")
    store.associations[key] = float(us_valence)
    return store


def amygdala_react(active_keys: Iterable[str], store: AmygdalaStore) -> float:
    """Largest-magnitude stored valence among the active keys (0 if none)."""
    best = 0.0
    for k in active_keys:
        v = store.valence(k)
        if abs(v) > abs(best):
            best = v
    return best
