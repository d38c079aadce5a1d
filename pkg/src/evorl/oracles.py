"""Built-in Monte-Carlo and closed-form checks behind the ``oracles`` CLI verb.

Each check computes an observed value along the library path and compares
it with an independent expectation: a brute-force re-draw of the same
seeded stream, a closed form, or value iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FitnessLandscape, Genotype, Individual, estimate_expected_fitness
from .dynamics import EvolutionConfig, allele_frequency, evolve, initial_population, mutate, survival_trial
from .harness import summarize
from .games import ALL_C, ALL_D, TIT_FOR_TAT, GameMatrix, discounted_policy_value
from .rl import (
    BernoulliRewardEnv,
    LearningParams,
    QTable,
    TabularMDP,
    epsilon_greedy_action,
    estimate_reward,
    greedy_action,
    train,
    value_iteration,
)
from .scenarios import TrajectorySet
from .streams import RandomStreamTree


@dataclass(frozen=True)
class OracleResult:
    name: str
    observed: float
    expected: float
    tolerance: float = 0.0
    # one-sided check: observed >= expected
    at_least: bool = False

    @property
    def passed(self) -> bool:
        if self.at_least:
            return self.observed >= self.expected
        return abs(self.observed - self.expected) <= self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        target = f">= {self.expected!r}" if self.at_least else f"{self.expected!r} +/- {self.tolerance!r}"
        return f"[{status}] {self.name}: observed={self.observed!r} expected {target}"


def chain_mdp() -> TabularMDP:
    # state 0: stay (0) or move to 1 (reward 1); state 1: back to 0 (0) or stay (reward 2)
    return TabularMDP(next_state=[[0, 1], [0, 1]], reward=[[0.0, 1.0], [0.0, 2.0]])


def run_oracles(seed: int = 20230514) -> list[OracleResult]:
    tree = RandomStreamTree(seed)
    results = []

    g = Genotype((1, 0, 1))
    rng = tree.stream("fitness")
    mean, _ = estimate_expected_fitness(g, FitnessLandscape.bernoulli(0.5), 10_000, rng)
    redraw = tree.stream("fitness")
    brute = sum(1 for _ in range(10_000) if redraw.random() < 0.5) / 10_000
    results.append(OracleResult("expected fitness Bernoulli(0.5), n=1e4 vs re-draw", mean, brute, 0.0))
    results.append(OracleResult("expected fitness Bernoulli(0.5), n=1e4", mean, 0.5, 0.015))

    rng = tree.stream("survival")
    land = FitnessLandscape.constant(0.3)
    ind = Individual(Genotype((0,)))
    live = sum(survival_trial(ind, land, rng).value for _ in range(100_000)) / 100_000
    results.append(OracleResult("survival trial p=0.3, 1e5 trials", live, 0.3, 0.005))

    rng = tree.stream("mutation")
    g = Genotype((0,) * 100)
    flips = sum(sum(mutate(g, 0.01, rng).alleles) for _ in range(10_000)) / 10_000
    results.append(OracleResult("mutation mu=0.01, L=100: mean flips", flips, 1.0, 0.05))

    rng = tree.stream("epsilon")
    q = QTable(1, 2, [[0.0, 1.0]])
    for eps, expected, tol in ((1.0, 0.5, 0.01), (0.1, 1 - 0.1 + 0.1 / 2, 0.005)):
        p = LearningParams(alpha=0.5, gamma=0.0, epsilon=eps)
        freq = sum(epsilon_greedy_action(q, 0, p, rng) for _ in range(100_000)) / 100_000
        results.append(OracleResult(f"epsilon-greedy eps={eps}: action-1 frequency", freq, expected, tol))

    rng = tree.stream("reward")
    r = estimate_reward(BernoulliRewardEnv((0.25,)), 0, 0, 40_000, rng)
    results.append(OracleResult("reward estimate Bernoulli(0.25), n=4e4", r, 0.25, 0.01))

    mdp = chain_mdp()
    oracle = value_iteration(mdp, 0.9, tol=1e-12)
    learned, _ = train(mdp, LearningParams(alpha=0.5, gamma=0.9, epsilon=1.0), 200, 50, tree.stream("chain"))
    results.append(
        OracleResult("Q-learning vs value iteration, 2-state chain (sup norm)", float(np.abs(learned.values - oracle).max()), 0.0, 1e-3)
    )

    bandit = TabularMDP(next_state=[[0, 0]], reward=[[0.0, 1.0]], terminal=[[True, True]])
    learned, _ = train(bandit, LearningParams(alpha=0.5, gamma=0.0, epsilon=0.2), 500, 1, tree.stream("bandit"))
    results.append(OracleResult("bandit (0, 1) greedy action", greedy_action(learned, 0), 1, 0))

    matrix = GameMatrix()
    results.append(OracleResult("AllC vs TitForTat, gamma=0.9", float(discounted_policy_value(ALL_C, TIT_FOR_TAT, matrix, 0.9)), 30.0, 0.0))
    results.append(OracleResult("AllD vs TitForTat, gamma=0.9", float(discounted_policy_value(ALL_D, TIT_FOR_TAT, matrix, 0.9)), 14.0, 0.0))

    cfg = EvolutionConfig(population_size=200, mutation_rate=0.0, locus_count=1, generations=20)
    land = FitnessLandscape.single_locus(0, 0.5, 0.9)
    finals = []
    for k in range(200):
        history = evolve(initial_population(200, 1, 0.5), land, cfg, tree.stream("selection", k))
        finals.append(allele_frequency(history[-1], 0))
    results.append(OracleResult("selection 0.9 vs 0.5, N=200, 20 gens: mean allele-1 frequency", float(np.mean(finals)), 0.7, at_least=True))

    rng = tree.stream("summary")
    traj = TrajectorySet("summary", "step", ("x",))
    for k in range(500):
        traj.add(k, 0, x=float(rng.random() < 0.3))
    results.append(OracleResult("summary mean of 500 Bernoulli(0.3)", float(summarize(traj).mean["x"][0]), 0.3, 0.06))
    return results
