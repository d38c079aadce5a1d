"""Iterated prisoner's dilemma: payoffs, memory-1 strategies, match play.

Moves are integers, ``C = 0`` and ``D = 1``, so "lowest action index"
tie-breaking in a Q-learner resolves to cooperation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .core import ConfigurationError
from .rl import LearningParams, QTable, epsilon_greedy_action, greedy_action

C, D = 0, 1
MOVE_NAMES = "CD"


@dataclass(frozen=True)
class GameMatrix:
    T: float = 5
    R: float = 3
    P: float = 1
    S: float = 0

    def __post_init__(self):
        if not (self.T > self.R > self.P > self.S):
            raise ConfigurationError(
                f"payoffs must satisfy T > R > P > S, got T={self.T}, R={self.R}, P={self.P}, S={self.S}"
            )
        if not 2 * self.R > self.T + self.S:
            raise ConfigurationError(f"payoffs must satisfy 2R > T + S, got 2R={2 * self.R}, T+S={self.T + self.S}")


def payoff(matrix: GameMatrix, my_move: int, their_move: int) -> tuple[float, float]:
    table = {
        (C, C): (matrix.R, matrix.R),
        (D, C): (matrix.T, matrix.S),
        (C, D): (matrix.S, matrix.T),
        (D, D): (matrix.P, matrix.P),
    }
    try:
        return table[(my_move, their_move)]
    except KeyError:
        raise ValueError(f"moves must be C (0) or D (1), got {(my_move, their_move)}") from None


# -- strategies --------------------------------------------------------------

# Joint-state index seen by a player: 0 before the first round,
# then 1 + 2 * own_last + opp_last.
START = 0
STATE_COUNT = 5


def joint_state(own_last: int, opp_last: int) -> int:
    return 1 + 2 * own_last + opp_last


STATE_NAMES = ("start", "CC", "CD", "DC", "DD")


@dataclass(frozen=True)
class Memory1:
    """Deterministic memory-1 strategy: an opening move and a reply per (own, opp) last pair."""

    name: str
    first: int
    reply: tuple[int, int, int, int]  # indexed by 2 * own_last + opp_last

    learns = False

    def reset(self):
        pass

    def move(self, state: int, rng_stream: np.random.Generator | None = None) -> int:
        return self.first if state == START else self.reply[state - 1]

    def observe(self, state, action, reward, next_state):
        pass


ALL_C = Memory1("AllC", C, (C, C, C, C))
ALL_D = Memory1("AllD", D, (D, D, D, D))
TIT_FOR_TAT = Memory1("TitForTat", C, (C, D, C, D))
# defect forever once anyone defected; with memory of the last pair this
# only needs "cooperate iff last round was mutual cooperation"
GRIM = Memory1("Grim", C, (C, D, D, D))

REFERENCE_STRATEGIES = {s.name: s for s in (ALL_C, ALL_D, TIT_FOR_TAT, GRIM)}


@dataclass(eq=False)
class QLearner:
    """A learning player; its Q-table persists across matches."""

    params: LearningParams
    q: QTable = field(default_factory=lambda: QTable(STATE_COUNT, 2))
    name: str = "QLearner"

    learns = True

    def reset(self):
        pass

    def move(self, state: int, rng_stream: np.random.Generator) -> int:
        return epsilon_greedy_action(self.q, state, self.params, rng_stream)

    def observe(self, state, action, reward, next_state):
        self.q.update(state, action, reward, next_state, self.params)

    def greedy_policy(self) -> Memory1:
        acts = [greedy_action(self.q, s) for s in range(STATE_COUNT)]
        return Memory1("greedy", acts[0], tuple(acts[1:]))


@dataclass(frozen=True)
class MatchResult:
    moves: tuple[tuple[int, int], ...]
    scores: tuple[float, float]
    rounds: int

    def cooperation_rate(self, player: int = 0) -> float:
        return sum(m[player] == C for m in self.moves) / self.rounds

    def move_string(self, player: int) -> str:
        return "".join(MOVE_NAMES[m[player]] for m in self.moves)


def play_match(a, b, rounds: int, matrix: GameMatrix, rng_stream: np.random.Generator | None = None) -> MatchResult:
    """Play ``rounds`` simultaneous-move rounds between ``a`` and ``b``.

    Learning players update after every round from
    ``(state, own move, own payoff, next state)``; the last round
    bootstraps like any other since the match length is a truncation,
    not a terminal state.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    a.reset()
    b.reset()
    sa = sb = START
    score_a = score_b = 0
    moves = []
    for _ in range(rounds):
        ma = a.move(sa, rng_stream)
        mb = b.move(sb, rng_stream)
        pa, pb = payoff(matrix, ma, mb)
        score_a += pa
        score_b += pb
        moves.append((ma, mb))
        na, nb = joint_state(ma, mb), joint_state(mb, ma)
        a.observe(sa, ma, pa, na)
        b.observe(sb, mb, pb, nb)
        sa, sb = na, nb
    return MatchResult(tuple(moves), (score_a, score_b), rounds)


# -- exact oracle ------------------------------------------------------------


def joint_cycle(policy: Memory1, opponent: Memory1) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """Split the deterministic joint move sequence into a transient prefix and its repeating cycle."""
    pair = (policy.first, opponent.first)
    seen: dict[tuple[int, int], int] = {}
    order = []
    while pair not in seen:
        seen[pair] = len(order)
        order.append(pair)
        own, opp = pair
        pair = (policy.move(joint_state(own, opp)), opponent.move(joint_state(opp, own)))
    start = seen[pair]
    return order[:start], order[start:]


def _exact(x) -> Fraction:
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    # decimal reading of a float: 0.9 means 9/10
    return Fraction(repr(float(x)))


def discounted_policy_value(policy: Memory1, opponent: Memory1, matrix: GameMatrix, gamma) -> Fraction:
    """Exact value of ``sum_t gamma^t * payoff_t`` for ``policy`` against ``opponent``.

    The joint play is a prefix followed by a cycle of at most four move
    pairs, so the infinite sum is a finite prefix plus a geometric series.
    Arithmetic is done in fractions; floats are read by their decimal repr.
    """
    g = _exact(gamma)
    if not 0 <= g < 1:
        raise ValueError("gamma must lie in [0, 1)")
    prefix, cycle = joint_cycle(policy, opponent)
    pay = lambda pair: _exact(payoff(matrix, *pair)[0])  # noqa: E731

    value = sum((g**t * pay(p) for t, p in enumerate(prefix)), Fraction(0))
    cycle_sum = sum((g**j * pay(p) for j, p in enumerate(cycle)), Fraction(0))
    return value + g ** len(prefix) * cycle_sum / (1 - g ** len(cycle))


def cycle_average(policy: Memory1, opponent: Memory1, matrix: GameMatrix) -> Fraction:
    """Long-run mean per-round payoff of ``policy``: the mean over the joint cycle."""
    _, cycle = joint_cycle(policy, opponent)
    return sum((_exact(payoff(matrix, *p)[0]) for p in cycle), Fraction(0)) / len(cycle)
