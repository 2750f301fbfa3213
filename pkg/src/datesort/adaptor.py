"""Tabular Q-learning controller for runtime brightness/threshold correction.

The controller never touches model weights. It adjusts three live knobs
used by prediction: an image calibration gain, the spoilage decision
threshold, and the spectral reference (re-measured by ``RECALIBRATE``).

State: 5 brightness buckets (mean foreground luminance, edges
0.2/0.4/0.6/0.8) x 4 audit-accuracy buckets (rolling accuracy over the
last W audited items, edges 0.75/0.85/0.95). An audited item counts as
correct when both the variety bin and the edible/spoiled call are right.
"""

from __future__ import annotations

import csv
import json
from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

import numpy as np

from .seeding import derive_seed

BRIGHTNESS_EDGES = (0.2, 0.4, 0.6, 0.8)
ACCURACY_EDGES = (0.75, 0.85, 0.95)
N_BRIGHTNESS = len(BRIGHTNESS_EDGES) + 1
N_ACCURACY = len(ACCURACY_EDGES) + 1
N_STATES = N_BRIGHTNESS * N_ACCURACY

GAIN_RANGE = (0.5, 1.5)
THRESHOLD_RANGE = (0.05, 0.95)
GAIN_STEP = 0.05
THRESHOLD_STEP = 0.05
REWARD_BOUND = 2.0
DEFAULT_THRESHOLD = 0.5


class Action(IntEnum):
    GAIN_DOWN = 0
    GAIN_HOLD = 1
    GAIN_UP = 2
    THRESH_DOWN = 3
    THRESH_UP = 4
    RECALIBRATE = 5
    NOOP = 6


N_ACTIONS = len(Action)
ZERO_MAGNITUDE = (Action.GAIN_HOLD, Action.NOOP)


@dataclass(frozen=True)
class AdaptState:
    brightness_bucket: int
    accuracy_bucket: int

    @property
    def code(self) -> int:
        return self.brightness_bucket * N_ACCURACY + self.accuracy_bucket


@dataclass
class RLConfig:
    alpha: float = 0.1
    gamma: float = 0.9
    eps_start: float = 0.3
    eps_end: float = 0.02
    eps_decay_steps: int | None = None    # None: decay over all pre-training steps
    audit_prob: float = 0.2
    window: int = 20
    steps: int = 3000
    idle_prior: float = 0.0
    move_cost: float = 0.0                # charged per gain/threshold move
    episodes: int = 0                     # pre-training episodes before the scored run
    seed: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    def epsilon(self, step: int) -> float:
        horizon = self.eps_decay_steps or max(1, self.episodes) * self.steps
        frac = min(1.0, step / max(1, horizon - 1))
        return self.eps_start + (self.eps_end - self.eps_start) * frac


@dataclass
class QTable:
    values: np.ndarray = field(default_factory=lambda: np.zeros((N_STATES, N_ACTIONS)))
    alpha: float = 0.1
    gamma: float = 0.9

    def copy(self) -> "QTable":
        return QTable(self.values.copy(), self.alpha, self.gamma)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "gamma": self.gamma, "states": N_STATES,
                "actions": [a.name for a in Action], "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "QTable":
        return cls(np.array(d["values"], dtype=float), d["alpha"], d["gamma"])


def bucket(value: float, edges) -> int:
    return int(np.searchsorted(np.asarray(edges), value, side="right"))


class AuditWindow:
    """Rolling accuracy over the last ``size`` audited decisions."""

    def __init__(self, size: int = 20):
        self.hits: deque[bool] = deque(maxlen=size)

    def add(self, correct: bool) -> None:
        self.hits.append(bool(correct))

    @property
    def accuracy(self) -> float | None:
        return sum(self.hits) / len(self.hits) if self.hits else None


def observe(brightness: float, window: AuditWindow, correct: bool | None = None) -> AdaptState:
    """Record an audit outcome (``None`` when not audited) and discretise the state.

    With no audits yet the accuracy bucket is the top one.
    """
    if correct is not None:
        window.add(correct)
    acc = window.accuracy
    acc_bucket = N_ACCURACY - 1 if acc is None else bucket(acc, ACCURACY_EDGES)
    return AdaptState(bucket(brightness, BRIGHTNESS_EDGES), acc_bucket)


def select_action(q: QTable, state: AdaptState, epsilon: float, seed: int, step: int) -> Action:
    """Epsilon-greedy; greedy ties go to the lowest action code."""
    rng = np.random.default_rng(derive_seed(seed, "action", step))
    explore = rng.uniform() < epsilon
    pick = int(rng.integers(N_ACTIONS))
    if explore:
        return Action(pick)
    return Action(int(np.argmax(q.values[state.code])))


KNOB_MOVES = (Action.GAIN_DOWN, Action.GAIN_UP, Action.THRESH_DOWN, Action.THRESH_UP)


def reward(action: Action | None, audited: bool, correct: bool, truly_spoiled: bool,
           called_spoiled: bool, move_cost: float = 0.0) -> float:
    """+1 correct audited decision, -2 shipped spoilage, -0.5 discarded edible fruit,
    -0.1 for recalibrating, -``move_cost`` per knob move; clipped to [-2, 2]."""
    r = 0.0
    if audited:
        if truly_spoiled and not called_spoiled:
            r = -2.0
        elif called_spoiled and not truly_spoiled:
            r = -0.5
        elif correct:
            r = 1.0
    if action == Action.RECALIBRATE:
        r -= 0.1
    elif action in KNOB_MOVES:
        r -= move_cost
    return float(np.clip(r, -REWARD_BOUND, REWARD_BOUND))


def q_update(q: QTable, s: AdaptState, a: Action, r: float, s_next: AdaptState) -> QTable:
    """One Q-learning backup, in place; returns ``q``."""
    if not np.isfinite(r):
        raise ValueError("non-finite reward")
    row = q.values[s.code]
    target = r + q.gamma * q.values[s_next.code].max()
    new = row[a] + q.alpha * (target - row[a])
    if not np.isfinite(new):
        raise ValueError("non-finite Q update")
    row[a] = new
    return q


@dataclass
class Knobs:
    gain: float = 1.0
    threshold: float = DEFAULT_THRESHOLD
    spectral_offset_correction: np.ndarray = field(default_factory=lambda: np.zeros(18))


def apply_action(knobs: Knobs, action: Action, drift) -> Knobs:
    """Apply an action with safety clamps.

    ``RECALIBRATE`` re-measures the white tile under the current drift
    state: the spectral baseline is re-zeroed, the camera gain is reset to
    cancel the lighting drift and the threshold returns to its default.
    """
    g, t = knobs.gain, knobs.threshold
    off = knobs.spectral_offset_correction
    if action == Action.GAIN_DOWN:
        g -= GAIN_STEP
    elif action == Action.GAIN_UP:
        g += GAIN_STEP
    elif action == Action.THRESH_DOWN:
        t -= THRESHOLD_STEP
    elif action == Action.THRESH_UP:
        t += THRESHOLD_STEP
    elif action == Action.RECALIBRATE:
        off = np.array(drift.spectral_offset, dtype=float)
        g = 1.0 / drift.lighting_gain
        t = DEFAULT_THRESHOLD
    g = float(np.clip(round(g, 10), *GAIN_RANGE))
    t = float(np.clip(round(t, 10), *THRESHOLD_RANGE))
    return Knobs(g, t, off)


@dataclass
class StepLog:
    step: int
    state: int
    action: int
    reward: float
    gain: float
    threshold: float
    audited: bool
    correct: bool | None
    running_accuracy: float


@dataclass
class AdaptationResult:
    q: QTable
    log: list[StepLog]

    def audited_accuracy(self, start: int = 0, stop: int | None = None) -> float:
        hits = [e.correct for e in self.log[start:stop] if e.audited]
        return float(np.mean(hits)) if hits else float("nan")


def run_adaptation(model, stream, config: RLConfig, reference, params=None,
                   learn: bool = True, q: QTable | None = None, step_offset: int = 0) -> AdaptationResult:
    """Run observe -> reward -> update -> select -> apply over a conveyor stream.

    ``stream`` yields ``(sample, DriftState)``. With ``learn=False`` the
    controller is frozen: no updates and every action is ``NOOP``, which is
    the baseline for A/B comparisons. Audit draws come from their own seeded
    stream, so paired runs audit the same items.
    """
    from .pipeline import LiveSettings, predict_sample

    if q is None:
        q = QTable(alpha=config.alpha, gamma=config.gamma)
        q.values[:, list(ZERO_MAGNITUDE)] += config.idle_prior
    window = AuditWindow(config.window)
    audit_rng = np.random.default_rng(derive_seed(config.seed, "audit"))
    knobs = Knobs()
    log: list[StepLog] = []
    prev_state: AdaptState | None = None
    prev_action: Action | None = None
    n_audited = n_correct = 0
    span = reference.white - reference.dark
    for step, (sample, drift) in enumerate(stream):
        audited = bool(audit_rng.uniform() < config.audit_prob)
        ref = reference.shifted(knobs.spectral_offset_correction * span)
        pred, brightness = predict_sample(model, sample, LiveSettings(knobs.gain, knobs.threshold, ref), params)
        truly_spoiled = bool(sample.attrs.spoiled)
        if pred is None:
            # unmeasurable item: rejected, so it counts as a spoiled call with no variety
            called_spoiled, correct = True, False
        else:
            called_spoiled = pred.spoiled
            correct = pred.variety == int(sample.variety) and called_spoiled == truly_spoiled
        state = observe(brightness, window, correct if audited else None)
        if audited:
            n_audited += 1
            n_correct += correct
        r = reward(prev_action, audited, correct, truly_spoiled, called_spoiled, config.move_cost)
        if learn and prev_state is not None:
            q_update(q, prev_state, prev_action, r, state)
        if learn:
            t = step_offset + step
            action = select_action(q, state, config.epsilon(t), config.seed, t)
        else:
            action = Action.NOOP
        log.append(StepLog(step, state.code, int(action), r, knobs.gain, knobs.threshold, audited,
                           bool(correct) if audited else None,
                           n_correct / n_audited if n_audited else float("nan")))
        knobs = apply_action(knobs, action, drift)
        prev_state, prev_action = state, action
    return AdaptationResult(q, log)


def write_log_csv(result: AdaptationResult, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "state", "action", "reward", "gain", "threshold", "running_accuracy"])
        for e in result.log:
            w.writerow([e.step, e.state, e.action, repr(e.reward), repr(e.gain), repr(e.threshold),
                        repr(e.running_accuracy)])
    return path


def write_qtable_json(q: QTable, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(q.to_dict(), indent=1) + "\n")
    return path


@dataclass
class ABResult:
    adaptive: AdaptationResult
    frozen: AdaptationResult
    final_window: int
    pretrain_logs: list[AdaptationResult] = field(default_factory=list)

    @property
    def adaptive_accuracy(self) -> float:
        return self.adaptive.audited_accuracy(-self.final_window)

    @property
    def baseline_accuracy(self) -> float:
        return self.frozen.audited_accuracy(-self.final_window)

    @property
    def gap(self) -> float:
        return self.adaptive_accuracy - self.baseline_accuracy

    def summary(self) -> dict:
        return {"final_window": self.final_window,
                "baseline_accuracy": self.baseline_accuracy,
                "adaptive_accuracy": self.adaptive_accuracy,
                "gap": self.gap,
                "baseline_accuracy_all": self.frozen.audited_accuracy(),
                "adaptive_accuracy_all": self.adaptive.audited_accuracy()}


def ab_experiment(model, samples, drift, config: RLConfig, reference, conveyor_seed: int,
                  params=None, final_window: int = 1000) -> ABResult:
    """Pre-train the Q-table, then score adaptive against frozen on one shared stream.

    Pre-training episode ``e`` runs on the conveyor seeded with
    ``derive_seed(conveyor_seed, "episode", e)``; the scored episode uses
    ``conveyor_seed`` itself for both arms, so they see identical items,
    drift and audits. Knobs start nominal in every episode.
    """
    from .synthcrop import conveyor_stream

    q = None
    logs = []
    for e in range(config.episodes):
        stream = conveyor_stream(samples, drift, derive_seed(conveyor_seed, "episode", e), config.steps, reference)
        res = run_adaptation(model, stream, config, reference, params, q=q, step_offset=e * config.steps)
        q = res.q
        logs.append(res)
    offset = config.episodes * config.steps
    adaptive = run_adaptation(model, conveyor_stream(samples, drift, conveyor_seed, config.steps, reference),
                              config, reference, params, q=q, step_offset=offset)
    frozen = run_adaptation(model, conveyor_stream(samples, drift, conveyor_seed, config.steps, reference),
                            config, reference, params, learn=False)
    return ABResult(adaptive, frozen, final_window, logs)
