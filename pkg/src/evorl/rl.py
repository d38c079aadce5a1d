"""Tabular Q-learning.

The update is kept in its convex-combination form,
``Q(s,a) <- (1 - alpha) Q(s,a) + alpha (R + gamma max_a' Q(s', a'))``,
with the max term taken as 0 on terminal transitions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .core import DomainError


@dataclass(frozen=True)
class LearningParams:
    alpha: float = 0.1
    gamma: float = 0.9
    epsilon: float = 0.1

    def __post_init__(self):
        for name in ("alpha", "gamma", "epsilon"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        # alpha = 0 is admitted so a frozen table can be replayed
        if not 0 <= self.alpha <= 1:
            raise DomainError("alpha must lie in [0, 1]")
        if not 0 <= self.gamma < 1:
            raise DomainError("gamma must lie in [0, 1)")
        if not 0 <= self.epsilon <= 1:
            raise DomainError("epsilon must lie in [0, 1]")


@dataclass(eq=False)
class QTable:
    state_count: int
    action_count: int
    values: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.state_count < 1 or self.action_count < 1:
            raise DomainError("state_count and action_count must be positive")
        shape = (self.state_count, self.action_count)
        if self.values is None:
            self.values = np.zeros(shape)
        else:
            self.values = np.array(self.values, dtype=float)
            if self.values.shape != shape:
                raise DomainError(f"values must have shape {shape}, got {self.values.shape}")
            if not np.all(np.isfinite(self.values)):
                raise DomainError("Q values must be finite")

    def copy(self) -> QTable:
        return QTable(self.state_count, self.action_count, self.values.copy())

    def __eq__(self, other):
        return (
            isinstance(other, QTable)
            and self.values.shape == other.values.shape
            and np.array_equal(self.values, other.values)
        )

    def _check(self, s: int, a: int | None = None):
        if not 0 <= s < self.state_count:
            raise DomainError(f"state {s} out of range [0, {self.state_count})")
        if a is not None and not 0 <= a < self.action_count:
            raise DomainError(f"action {a} out of range [0, {self.action_count})")

    def update(self, s: int, a: int, reward: float, s_next: int, params: LearningParams, terminal: bool = False):
        """In-place Q-update of entry ``(s, a)``."""
        self._check(s, a)
        self._check(s_next)
        if not math.isfinite(reward):
            raise DomainError("reward must be finite")
        future = 0.0 if terminal else self.values[s_next].max()
        alpha = params.alpha
        self.values[s, a] = (1 - alpha) * self.values[s, a] + alpha * (reward + params.gamma * future)


def q_update(
    q: QTable, s: int, a: int, R: float, s_next: int, params: LearningParams, terminal: bool = False
) -> QTable:
    """Return a copy of ``q`` with entry ``(s, a)`` updated; every other entry is untouched."""
    out = q.copy()
    out.update(s, a, R, s_next, params, terminal)
    return out


def greedy_action(q: QTable, s: int) -> int:
    q._check(s)
    # argmax returns the first maximum, i.e. the lowest index on ties
    return int(np.argmax(q.values[s]))


def epsilon_greedy_action(q: QTable, s: int, params: LearningParams, rng_stream: np.random.Generator) -> int:
    # both uniforms are always consumed so the stream position does not depend on Q
    branch, pick = rng_stream.random(2)
    if branch < params.epsilon:
        return min(int(pick * q.action_count), q.action_count - 1)
    return greedy_action(q, s)


class Environment(Protocol):
    state_count: int
    action_count: int

    def reset(self, rng_stream: np.random.Generator) -> int: ...

    def transition(self, state: int, action: int, rng_stream: np.random.Generator) -> tuple[int, float, bool]: ...


class EnvironmentFault(RuntimeError):
    pass


@dataclass(frozen=True)
class TabularMDP:
    """Deterministic finite MDP given by next-state, reward, and terminal tables.

    ``start_states`` empty means episodes start uniformly over all states,
    which keeps every state-action pair visitable.
    """

    next_state: np.ndarray
    reward: np.ndarray
    terminal: np.ndarray | None = None
    start_states: tuple[int, ...] = ()

    def __post_init__(self):
        nxt = np.asarray(self.next_state, dtype=np.int64)
        rew = np.asarray(self.reward, dtype=float)
        term = np.zeros(nxt.shape, dtype=bool) if self.terminal is None else np.asarray(self.terminal, dtype=bool)
        if nxt.ndim != 2 or rew.shape != nxt.shape or term.shape != nxt.shape:
            raise DomainError("next_state, reward and terminal must share one (S, A) shape")
        if (nxt < 0).any() or (nxt >= nxt.shape[0]).any():
            raise DomainError("next states out of range")
        if not np.all(np.isfinite(rew)):
            raise DomainError("rewards must be finite")
        object.__setattr__(self, "next_state", nxt)
        object.__setattr__(self, "reward", rew)
        object.__setattr__(self, "terminal", term)
        object.__setattr__(self, "start_states", tuple(int(s) for s in self.start_states))

    @property
    def state_count(self) -> int:
        return self.next_state.shape[0]

    @property
    def action_count(self) -> int:
        return self.next_state.shape[1]

    def reset(self, rng_stream: np.random.Generator) -> int:
        starts = self.start_states or tuple(range(self.state_count))
        if len(starts) == 1:
            return starts[0]
        return starts[int(rng_stream.integers(len(starts)))]

    def transition(self, state: int, action: int, rng_stream: np.random.Generator) -> tuple[int, float, bool]:
        return int(self.next_state[state, action]), float(self.reward[state, action]), bool(self.terminal[state, action])


@dataclass(frozen=True)
class BernoulliRewardEnv:
    """Single-state environment whose action ``a`` pays 1 with probability ``probs[a]``."""

    probs: tuple[float, ...]
    state_count: int = 1

    @property
    def action_count(self) -> int:
        return len(self.probs)

    def reset(self, rng_stream: np.random.Generator) -> int:
        return 0

    def transition(self, state: int, action: int, rng_stream: np.random.Generator) -> tuple[int, float, bool]:
        return 0, float(rng_stream.random() < self.probs[action]), True


def estimate_reward(env: Environment, s: int, a: int, n: int, rng_stream: np.random.Generator) -> float:
    if n < 1:
        raise DomainError("sample count n must be >= 1")
    total = 0.0
    for _ in range(n):
        total += env.transition(s, a, rng_stream)[1]
    return total / n


def train(
    env: Environment,
    params: LearningParams,
    episodes: int,
    max_steps: int,
    rng_stream: np.random.Generator,
    q: QTable | None = None,
) -> tuple[QTable, list[float]]:
    """Episodic epsilon-greedy Q-learning; returns the table and undiscounted return per episode.

    Hitting ``max_steps`` truncates an episode without treating it as terminal.
    """
    if episodes < 1 or max_steps < 1:
        raise DomainError("episodes and max_steps must be >= 1")
    q = QTable(env.state_count, env.action_count) if q is None else q.copy()
    returns = []
    for ep in range(episodes):
        s = env.reset(rng_stream)
        ret = 0.0
        for step in range(max_steps):
            a = epsilon_greedy_action(q, s, params, rng_stream)
            try:
                s_next, reward, done = env.transition(s, a, rng_stream)
                q.update(s, a, reward, s_next, params, terminal=done)
            except Exception as exc:
                raise EnvironmentFault(f"episode {ep}, step {step}, state {s}, action {a}: {exc}") from exc
            ret += reward
            s = s_next
            if done:
                break
        returns.append(ret)
    return q, returns


def value_iteration(mdp: TabularMDP, gamma: float, tol: float = 1e-12, max_iter: int = 100_000) -> np.ndarray:
    """Optimal action values of a deterministic MDP by synchronous Bellman sweeps.

    Iterates until the sup-norm change drops below ``tol``.
    """
    q = np.zeros(mdp.next_state.shape)
    cont = np.where(mdp.terminal, 0.0, gamma)
    for _ in range(max_iter):
        new = mdp.reward + cont * q.max(axis=1)[mdp.next_state]
        delta = np.abs(new - q).max()
        q = new
        if delta < tol:
            return q
    raise RuntimeError(f"value iteration did not reach tol={tol} in {max_iter} sweeps")
