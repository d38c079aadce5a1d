"""Seeded experiments: antibiotic resistance, mimicry, learned cooperation.

Each replicate draws from its own child stream ``(scenario, replicate)``,
so replicate ``k`` is the same whatever the total replicate count.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .config import ScenarioConfig
from .core import FitnessLandscape, Population
from .dynamics import Extinction, allele_frequency, random_population, step_generation
from .games import C, REFERENCE_STRATEGIES, STATE_COUNT, QLearner, play_match
from .streams import RandomStreamTree

log = logging.getLogger(__name__)

OBSERVABLES = {
    "antibiotic": ("generation", ("allele_freq", "mean_survival")),
    "mimicry": ("generation", ("mean_similarity", "mean_survival")),
    "cooperation": ("episode", ("cooperation_rate", "episode_return")),
}


@dataclass(frozen=True)
class TrajectoryRecord:
    replicate: int
    step: int
    observables: Mapping[str, float]


@dataclass
class TrajectorySet:
    scenario: str
    step_name: str
    observables: tuple[str, ...]
    records: list[TrajectoryRecord] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    # per-replicate greedy policies for the cooperation scenario
    policies: dict[int, tuple[int, ...]] = field(default_factory=dict)

    def add(self, replicate: int, step: int, **values: float):
        self.records.append(TrajectoryRecord(replicate, step, {k: float(values[k]) for k in self.observables}))

    def extend(self, other: TrajectorySet):
        self.records.extend(other.records)
        self.events.extend(other.events)
        self.policies.update(other.policies)

    def sort(self):
        self.records.sort(key=lambda r: (r.replicate, r.step))
        self.events.sort(key=lambda e: (e["replicate"], e["generation"]))

    def array(self, name: str) -> np.ndarray:
        """``(replicates, steps)`` matrix of one observable."""
        reps = sorted({r.replicate for r in self.records})
        by_rep = {k: [] for k in reps}
        for r in sorted(self.records, key=lambda r: (r.replicate, r.step)):
            by_rep[r.replicate].append(r.observables[name])
        return np.array([by_rep[k] for k in reps])


def _mean(values: np.ndarray) -> float:
    # correctly rounded sum: a constant column averages back to itself exactly
    return math.fsum(values.tolist()) / len(values)


def empty_trajectories(scenario: str) -> TrajectorySet:
    step_name, names = OBSERVABLES[scenario]
    return TrajectorySet(scenario, step_name, names)


def _replicate_streams(cfg: ScenarioConfig, streams: RandomStreamTree | None):
    tree = RandomStreamTree(cfg.seed) if streams is None else streams
    return [(k, tree.stream(cfg.scenario, k)) for k in range(cfg.replicates)]


# -- antibiotic --------------------------------------------------------------


def antibiotic_landscape(cfg: ScenarioConfig) -> FitnessLandscape:
    p = cfg.params
    if not p.feedback:
        return FitnessLandscape.constant(p.neutral_survival)
    locus = p.resistance_locus
    return FitnessLandscape.environment(
        {
            True: FitnessLandscape.single_locus(locus, p.susceptible_on, p.resistant_on),
            False: FitnessLandscape.single_locus(locus, p.susceptible_off, p.resistant_off),
        },
        state=cfg.drug_at(0),
    )


def _antibiotic_replicate(cfg: ScenarioConfig, k: int, rng: np.random.Generator, out: TrajectorySet):
    evo, p = cfg.evolution, cfg.params
    land = antibiotic_landscape(cfg)
    genomes = np.zeros((evo.population_size, evo.locus_count), dtype=np.uint8)
    genomes[: int(round(p.initial_frequency * evo.population_size)), p.resistance_locus] = 1
    pop = Population(genomes)

    def env_land(g):
        return land.with_environment(cfg.drug_at(g)) if land.kind == "environment" else land

    def record(g, pop):
        out.add(
            k,
            g,
            allele_freq=allele_frequency(pop, p.resistance_locus),
            mean_survival=_mean(env_land(g).values(pop.genomes)),
        )

    record(0, pop)
    for g in range(evo.generations):
        try:
            pop = step_generation(pop, env_land(g), evo, rng)
        except Extinction as ext:
            _record_extinction(out, k, ext.generation, evo.generations)
            return
        record(g + 1, pop)


def _record_extinction(out: TrajectorySet, k: int, generation: int, last: int):
    log.info("replicate %d went extinct at generation %d", k, generation)
    out.events.append({"replicate": k, "generation": generation, "event": "extinction"})
    # an empty population carries no alleles and no survival
    for g in range(generation, last + 1):
        out.add(k, g, **{name: 0.0 for name in out.observables})


def run_antibiotic(cfg: ScenarioConfig, streams: RandomStreamTree | None = None) -> TrajectorySet:
    if cfg.scenario != "antibiotic":
        raise ValueError(f"expected an antibiotic config, got {cfg.scenario!r}")
    out = empty_trajectories("antibiotic")
    for k, rng in _replicate_streams(cfg, streams):
        _antibiotic_replicate(cfg, k, rng, out)
    out.sort()
    return out


# -- mimicry -----------------------------------------------------------------


def similarity(genomes: np.ndarray, target: np.ndarray) -> np.ndarray:
    return (genomes == target).mean(axis=1)


def mimicry_landscape(cfg: ScenarioConfig) -> FitnessLandscape:
    p = cfg.params
    if not p.feedback:
        return FitnessLandscape.constant(p.neutral_survival)
    target = np.array([int(c) for c in cfg.mimicry_target], dtype=np.uint8)
    base, gain = p.base_survival, p.similarity_gain
    return FitnessLandscape("deterministic", lambda g, _env: base + gain * similarity(g, target), name="mimicry")


def _mimicry_replicate(cfg: ScenarioConfig, k: int, rng: np.random.Generator, out: TrajectorySet):
    evo, p = cfg.evolution, cfg.params
    target = np.array([int(c) for c in cfg.mimicry_target], dtype=np.uint8)
    land = mimicry_landscape(cfg)
    if p.initial == "target":
        pop = Population(np.tile(target, (evo.population_size, 1)))
    else:
        pop = random_population(evo.population_size, evo.locus_count, rng)

    def record(g, pop):
        out.add(
            k,
            g,
            mean_similarity=_mean(similarity(pop.genomes, target)),
            mean_survival=_mean(land.values(pop.genomes)),
        )

    record(0, pop)
    for g in range(evo.generations):
        try:
            pop = step_generation(pop, land, evo, rng)
        except Extinction as ext:
            _record_extinction(out, k, ext.generation, evo.generations)
            return
        record(g + 1, pop)


def run_mimicry(cfg: ScenarioConfig, streams: RandomStreamTree | None = None) -> TrajectorySet:
    if cfg.scenario != "mimicry":
        raise ValueError(f"expected a mimicry config, got {cfg.scenario!r}")
    out = empty_trajectories("mimicry")
    for k, rng in _replicate_streams(cfg, streams):
        _mimicry_replicate(cfg, k, rng, out)
    out.sort()
    return out


# -- cooperation -------------------------------------------------------------


@dataclass(eq=False)
class _ScaledLearner(QLearner):
    """Q-learner whose observed reward is multiplied by ``reward_scale``; 0 removes feedback."""

    reward_scale: float = 1.0

    def observe(self, state, action, reward, next_state):
        super().observe(state, action, reward * self.reward_scale, next_state)


def train_cooperation(cfg: ScenarioConfig, rng: np.random.Generator, k: int = 0, out: TrajectorySet | None = None):
    """Train one learner against the configured opponent; return it."""
    p, learning = cfg.params, cfg.learning
    opponent = REFERENCE_STRATEGIES[p.opponent]
    warm = replace(learning, epsilon=p.warmup_epsilon)
    learner = _ScaledLearner(warm, reward_scale=1.0 if p.feedback else 0.0)
    for ep in range(p.episodes):
        learner.params = warm if ep < p.warmup_episodes else learning
        result = play_match(learner, opponent, p.rounds, p.game, rng)
        if out is not None:
            out.add(k, ep, cooperation_rate=result.cooperation_rate(0), episode_return=result.scores[0])
    return learner


def run_cooperation(cfg: ScenarioConfig, streams: RandomStreamTree | None = None) -> TrajectorySet:
    if cfg.scenario != "cooperation":
        raise ValueError(f"expected a cooperation config, got {cfg.scenario!r}")
    out = empty_trajectories("cooperation")
    for k, rng in _replicate_streams(cfg, streams):
        learner = train_cooperation(cfg, rng, k, out)
        policy = learner.greedy_policy()
        out.policies[k] = (policy.first, *policy.reply)
    out.sort()
    return out


def cooperates_when_mutual(policy: tuple[int, ...]) -> bool:
    """Whether a greedy policy (start, CC, CD, DC, DD) cooperates after mutual cooperation."""
    assert len(policy) == STATE_COUNT
    return policy[1] == C


RUNNERS = {"antibiotic": run_antibiotic, "mimicry": run_mimicry, "cooperation": run_cooperation}


def run_scenario(cfg: ScenarioConfig, streams: RandomStreamTree | None = None) -> TrajectorySet:
    return RUNNERS[cfg.scenario](cfg, streams)
