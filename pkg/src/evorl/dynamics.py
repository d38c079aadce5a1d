"""Selection as a live/die feedback loop.

One generation is synchronous: every member faces a Bernoulli survival
trial, then N offspring are resampled from the survivors with weights
equal to their landscape values, copied, and mutated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import ConfigurationError, DomainError, FitnessLandscape, Genotype, Individual, Population


class Extinction(Exception):
    """No member survived; ``generation`` is the index the step would have produced."""

    def __init__(self, generation: int):
        super().__init__(f"population went extinct at generation {generation}")
        self.generation = generation


@dataclass(frozen=True)
class SelectionParams:
    h2: float
    sel_coeff: float
    mean_fitness_w: float

    def __post_init__(self):
        for name in ("h2", "sel_coeff", "mean_fitness_w"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not 0 <= self.h2 <= 1:
            raise DomainError("h2 must lie in [0, 1]")


@dataclass(frozen=True)
class EvolutionConfig:
    population_size: int
    mutation_rate: float
    locus_count: int
    generations: int
    uniform_reproduction: bool = False

    def __post_init__(self):
        if self.population_size < 2:
            raise ConfigurationError("population_size must be >= 2")
        if not 0 <= self.mutation_rate <= 1:
            raise ConfigurationError("mutation_rate must lie in [0, 1]")
        if self.locus_count < 1:
            raise ConfigurationError("locus_count must be >= 1")
        if self.generations < 1:
            raise ConfigurationError("generations must be >= 1")


@dataclass(frozen=True)
class SurvivalOutcome:
    value: int
    individual: Individual | None = None

    def __post_init__(self):
        if self.value not in (0, 1):
            raise DomainError("survival outcome must be 0 or 1")

    def __int__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value == 1


def selection_delta(p: float, params: SelectionParams) -> float:
    """``h2 * sel_coeff * (p - w)``, taken literally.

    ``w`` is subtracted from a frequency as written; no reinterpretation
    of its units is attempted. Callers clamp ``p + delta`` to [0, 1].
    """
    if not math.isfinite(p):
        raise DomainError("p must be finite")
    if not 0 <= p <= 1:
        raise DomainError("p must lie in [0, 1]")
    return params.h2 * params.sel_coeff * (p - params.mean_fitness_w)


def _checked_values(land: FitnessLandscape, genomes: np.ndarray) -> np.ndarray:
    values = land.values(genomes)
    if not np.all(np.isfinite(values)) or (values < 0).any() or (values > 1).any():
        bad = values[~((values >= 0) & (values <= 1))]
        raise ConfigurationError(f"survival probabilities must lie in [0, 1], got {bad[:5].tolist()}")
    return values


def survival_trial(ind: Individual, land: FitnessLandscape, rng_stream: np.random.Generator) -> SurvivalOutcome:
    p = _checked_values(land, ind.genotype.as_array()[None, :])[0]
    value = int(rng_stream.random() < p)
    return SurvivalOutcome(value, replace(ind, alive=value))


def mutate(g: Genotype, mu: float, rng_stream: np.random.Generator) -> Genotype:
    if not 0 <= mu <= 1:
        raise DomainError("mutation rate must lie in [0, 1]")
    flips = rng_stream.random(len(g)) < mu
    return Genotype(tuple(int(x) for x in g.as_array() ^ flips))


def mutate_genomes(genomes: np.ndarray, mu: float, rng_stream: np.random.Generator) -> np.ndarray:
    if mu == 0:
        return genomes
    flips = (rng_stream.random(genomes.shape) < mu).astype(np.uint8)
    return genomes ^ flips


def weighted_indices(weights: np.ndarray, n: int, rng_stream: np.random.Generator) -> np.ndarray:
    """Draw ``n`` indices proportional to ``weights`` by cumulative-sum inversion.

    Members are scanned in stored order; zero-weight members are never drawn.
    """
    cum = np.cumsum(weights)
    total = cum[-1]
    if not total > 0:
        raise DomainError("weights must have a positive sum")
    u = rng_stream.random(n) * total
    idx = np.searchsorted(cum, u, side="right")
    # u * total can round up to total
    return np.minimum(idx, len(weights) - 1)


def step_generation(
    pop: Population, land: FitnessLandscape, cfg: EvolutionConfig, rng_stream: np.random.Generator
) -> Population:
    """Advance ``pop`` by one generation.

    Raises :class:`Extinction` when nobody survives. The returned population
    carries the selected previous generation in ``parents``.
    """
    n = cfg.population_size
    if pop.size != n:
        raise DomainError(f"population has {pop.size} members, config expects {n}")
    if pop.locus_count != cfg.locus_count:
        raise DomainError(f"genomes have {pop.locus_count} loci, config expects {cfg.locus_count}")

    values = _checked_values(land, pop.genomes)
    alive = rng_stream.random(n) < values
    if not alive.any():
        raise Extinction(pop.generation + 1)

    weights = alive.astype(float) if cfg.uniform_reproduction else values * alive
    parents_idx = weighted_indices(weights, n, rng_stream)
    counts = np.bincount(parents_idx, minlength=n)
    children = mutate_genomes(pop.genomes[parents_idx], cfg.mutation_rate, rng_stream)

    selected = Population(pop.genomes, pop.generation, offspring=counts, alive=alive)
    return Population(children, pop.generation + 1, parents=selected)


def allele_frequency(pop: Population, locus: int) -> float:
    if pop.size == 0:
        raise DomainError("allele frequency of an empty population is undefined")
    if not 0 <= locus < pop.locus_count:
        raise DomainError(f"locus {locus} out of range for {pop.locus_count} loci")
    return np.count_nonzero(pop.genomes[:, locus]) / pop.size


def initial_population(n: int, locus_count: int, p: float = 0.5) -> Population:
    """Deterministic start: the first ``round(p * n)`` members carry allele 1 at every locus."""
    k = int(round(p * n))
    genomes = np.zeros((n, locus_count), dtype=np.uint8)
    genomes[:k] = 1
    return Population(genomes)


def random_population(n: int, locus_count: int, rng_stream: np.random.Generator, p: float = 0.5) -> Population:
    return Population((rng_stream.random((n, locus_count)) < p).astype(np.uint8))


def evolve(
    pop: Population,
    land: FitnessLandscape,
    cfg: EvolutionConfig,
    rng_stream: np.random.Generator,
    generations: int | None = None,
) -> list[Population]:
    """Run ``generations`` steps (default ``cfg.generations``) and return every population, start included.

    Stops early, without raising, if the population goes extinct.
    """
    history = [pop]
    for _ in range(cfg.generations if generations is None else generations):
        try:
            pop = step_generation(pop, land, cfg, rng_stream)
        except Extinction:
            break
        history.append(pop)
    return history
