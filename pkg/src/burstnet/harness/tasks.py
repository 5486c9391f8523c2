"""Task environments.

A task decides, per window, what the network sees (stimulus), which neurons
it forces (chosen actions), the scalar reward, and whether the window opens a
new trial.  Tasks that learn (the bandit) also get the window's outcome back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dynamics import EMPTY_STIMULUS, Stimulus
from ..neuromod import GateSet, Scenario
from .config import TaskKind, TaskSpec


@dataclass(frozen=True)
class TaskStep:
    stimulus: Stimulus = EMPTY_STIMULUS
    forced: frozenset[int] = frozenset()
    reward: float = 0.0
    boundary: bool = False
    phase: str = ""


class Task:
    kind: TaskKind

    def step(self, window: int, rng: np.random.Generator) -> TaskStep:
        raise NotImplementedError

    def learn(self, window: int, action: int | None, scenario: Scenario | None, gates: GateSet) -> None:
        pass

    def probe(self) -> Stimulus:
        raise NotImplementedError


class Habituation(Task):
    kind = TaskKind.HABITUATION

    def __init__(self, pattern, drive: float = 1.0):
        self.stimulus = Stimulus.pattern(pattern, drive)

    def step(self, window, rng):
        return TaskStep(self.stimulus, phase="pattern")

    def probe(self):
        return self.stimulus


class TraceConditioning(Task):
    """CS held for ``lag`` windows, then the US with reward, then an ITI.

    The first ``pairings`` trials deliver the US; the next ``omissions``
    trials withhold it (and its reward).  After that the schedule repeats
    blank windows.
    """

    kind = TaskKind.TRACE_CONDITIONING

    def __init__(self, cs, us, lag=1, iti=2, pairings=20, omissions=5, reward=1.0):
        self.cs = Stimulus.pattern(cs)
        self.us = Stimulus.pattern(us)
        self.lag, self.iti = lag, iti
        self.pairings, self.omissions = pairings, omissions
        self.reward = reward

    @property
    def trial_length(self) -> int:
        return self.lag + 1 + self.iti

    @property
    def total_windows(self) -> int:
        return self.trial_length * (self.pairings + self.omissions)

    def locate(self, window: int) -> tuple[int, int]:
        return divmod(window, self.trial_length)

    def is_omission(self, trial: int) -> bool:
        return self.pairings <= trial < self.pairings + self.omissions

    def step(self, window, rng):
        trial, pos = self.locate(window)
        if trial >= self.pairings + self.omissions:
            return TaskStep(phase="after")
        if pos < self.lag:
            return TaskStep(self.cs, boundary=pos == 0, phase="cs")
        if pos == self.lag:
            if self.is_omission(trial):
                return TaskStep(phase="omission")
            return TaskStep(self.us, reward=self.reward, phase="us")
        return TaskStep(phase="iti")

    def probe(self):
        return self.cs


class Bandit(Task):
    """Two-window trials: a choice window then an outcome window.

    In the choice window the context is shown and the chosen arm's motor
    neuron is forced to burst.  The outcome window is blank and carries the
    reward of the arm that was actually executed.  Action values are updated
    on outcome windows from the Table-style action gates:
    ``Q[a] += q_rate * (reinforce - avert - Q[a])``.
    """

    kind = TaskKind.BANDIT

    def __init__(self, context, arms, reward_probs, punish_probs, epsilon=0.1, q_rate=0.2):
        self.context = Stimulus.pattern(context)
        self.arms = tuple(arms)
        self.reward_probs = tuple(reward_probs)
        self.punish_probs = tuple(punish_probs)
        self.epsilon = epsilon
        self.q_rate = q_rate
        self.q = {a: 0.0 for a in self.arms}
        self.executed: int | None = None

    def choose(self, rng: np.random.Generator) -> int:
        if rng.random() < self.epsilon:
            return self.arms[int(rng.integers(len(self.arms)))]
        best = max(self.q.values())
        ties = [a for a in self.arms if self.q[a] == best]
        return ties[int(rng.integers(len(ties)))] if len(ties) > 1 else ties[0]

    def step(self, window, rng):
        if window % 2 == 0:
            arm = self.choose(rng)
            return TaskStep(self.context, frozenset({arm}), boundary=True, phase="choice")
        reward = 0.0
        if self.executed is not None:
            k = self.arms.index(self.executed)
            u = rng.random()
            if u < self.reward_probs[k]:
                reward = 1.0
            elif u < self.reward_probs[k] + self.punish_probs[k]:
                reward = -1.0
        return TaskStep(reward=reward, phase="outcome")

    def learn(self, window, action, scenario, gates):
        if window % 2 == 0:
            self.executed = action if action in self.q else None
            return
        if self.executed is not None and scenario is not None:
            g = gates.action_reinforce - gates.action_avert
            self.q[self.executed] += self.q_rate * (g - self.q[self.executed])
        self.executed = None

    def probe(self):
        return self.context


class SequenceRecall(Task):
    """Present items in consecutive windows, wait ``gap`` blank windows, cue item 0, then go silent."""

    kind = TaskKind.SEQUENCE_RECALL

    def __init__(self, items, gap=2):
        self.items = [Stimulus.pattern(g) for g in items]
        self.gap = gap

    @property
    def cue_window(self) -> int:
        return len(self.items) + self.gap

    def step(self, window, rng):
        n = len(self.items)
        if window < n:
            return TaskStep(self.items[window], boundary=window == 0, phase="present")
        if window == self.cue_window:
            return TaskStep(self.items[0], boundary=True, phase="cue")
        return TaskStep(phase="gap" if window < self.cue_window else "free")

    def probe(self):
        return self.items[0]


_TASKS = {
    TaskKind.HABITUATION: Habituation,
    TaskKind.TRACE_CONDITIONING: TraceConditioning,
    TaskKind.BANDIT: Bandit,
    TaskKind.SEQUENCE_RECALL: SequenceRecall,
}


def make_task(spec: TaskSpec) -> Task:
    return _TASKS[spec.kind](**spec.params)
