"""Shared domain types and the fitness algebra.

Genotypes are fixed-length 0/1 vectors. A :class:`Population` keeps its
genomes as an ``(N, L)`` uint8 matrix so the dynamics can stay vectorized;
:class:`Individual` views are materialized on demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Hashable, Iterator, Mapping, Sequence

import numpy as np


class DomainError(ValueError):
    """An operation was called outside its mathematical domain."""


class ConfigurationError(ValueError):
    """A model object was configured with values it cannot use."""


@dataclass(frozen=True)
class Genotype:
    alleles: tuple[int, ...]

    def __post_init__(self):
        alleles = tuple(int(a) for a in self.alleles)
        if len(alleles) < 1:
            raise DomainError("genotype needs at least one locus")
        if any(a not in (0, 1) for a in alleles):
            raise DomainError(f"alleles must be 0 or 1, got {alleles}")
        object.__setattr__(self, "alleles", alleles)

    @classmethod
    def from_bits(cls, bits: str | Sequence[int]) -> Genotype:
        if isinstance(bits, str):
            return cls(tuple(int(c) for c in bits))
        return cls(tuple(bits))

    def __len__(self) -> int:
        return len(self.alleles)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.alleles, dtype=np.uint8)

    def __str__(self) -> str:
        return "".join(map(str, self.alleles))


@dataclass(frozen=True)
class Individual:
    genotype: Genotype
    offspring_count: int = 0
    alive: int = 1

    def __post_init__(self):
        if self.offspring_count < 0:
            raise DomainError("offspring_count must be >= 0")
        if self.alive not in (0, 1):
            raise DomainError("alive must be 0 or 1")


@dataclass(frozen=True, eq=False)
class Population:
    """A generation of N individuals.

    ``parents`` is the previous generation as it stood after selection:
    ``alive`` holds each parent's survival outcome and ``offspring`` its
    realized number of children in this generation.
    """

    genomes: np.ndarray
    generation: int = 0
    offspring: np.ndarray | None = None
    alive: np.ndarray | None = None
    parents: Population | None = None

    def __post_init__(self):
        genomes = np.array(self.genomes, dtype=np.uint8, copy=True)
        if genomes.ndim != 2 or genomes.shape[1] < 1:
            raise DomainError("genomes must be an (N, L) matrix with L >= 1")
        if genomes.size and genomes.max() > 1:
            raise DomainError("alleles must be 0 or 1")
        if self.generation < 0:
            raise DomainError("generation must be >= 0")
        n = genomes.shape[0]
        offspring = np.zeros(n, dtype=np.int64) if self.offspring is None else np.array(self.offspring, dtype=np.int64)
        alive = np.ones(n, dtype=np.uint8) if self.alive is None else np.array(self.alive, dtype=np.uint8)
        if offspring.shape != (n,) or alive.shape != (n,):
            raise DomainError("offspring and alive must have one entry per member")
        if (offspring < 0).any():
            raise DomainError("offspring counts must be >= 0")
        if alive.size and alive.max() > 1:
            raise DomainError("alive must be 0 or 1")
        for arr in (genomes, offspring, alive):
            arr.flags.writeable = False
        object.__setattr__(self, "genomes", genomes)
        object.__setattr__(self, "offspring", offspring)
        object.__setattr__(self, "alive", alive)

    @classmethod
    def from_genotypes(cls, genotypes: Sequence[Genotype | Sequence[int]], generation: int = 0) -> Population:
        rows = [g.alleles if isinstance(g, Genotype) else tuple(g) for g in genotypes]
        if rows and len({len(r) for r in rows}) != 1:
            raise DomainError("all genotypes in a population must have the same length")
        if not rows:
            return cls(np.zeros((0, 1), dtype=np.uint8), generation)
        return cls(np.array(rows, dtype=np.uint8), generation)

    @classmethod
    def from_individuals(cls, members: Sequence[Individual], generation: int = 0) -> Population:
        pop = cls.from_genotypes([m.genotype for m in members], generation)
        return replace(
            pop,
            offspring=[m.offspring_count for m in members],
            alive=[m.alive for m in members],
        )

    @property
    def size(self) -> int:
        return self.genomes.shape[0]

    @property
    def locus_count(self) -> int:
        return self.genomes.shape[1]

    def __len__(self) -> int:
        return self.size

    @property
    def members(self) -> list[Individual]:
        return list(self)

    def __iter__(self) -> Iterator[Individual]:
        for row, r, a in zip(self.genomes, self.offspring, self.alive):
            yield Individual(Genotype(tuple(int(x) for x in row)), int(r), int(a))


def relative_fitness(r, r_bar):
    """Return ``r / r_bar``, an individual's offspring relative to the population mean.

    Works elementwise on arrays. Integer and :class:`fractions.Fraction`
    inputs keep their exact arithmetic.
    """
    if np.any(np.asarray(r_bar) <= 0):
        raise DomainError("mean offspring count must be positive (empty or sterile population)")
    if np.any(np.asarray(r) < 0):
        raise DomainError("offspring count must be non-negative")
    return r / r_bar


def population_mean_offspring(pop: Population | Sequence[int]) -> float:
    counts = pop.offspring if isinstance(pop, Population) else np.asarray(pop)
    if len(counts) == 0:
        raise DomainError("mean offspring of an empty population is undefined")
    return float(np.mean(counts))


LANDSCAPE_KINDS = ("deterministic", "bernoulli", "environment")

# maps an (N, L) genome matrix and environment tag to N base values
ValueFn = Callable[[np.ndarray, Hashable], np.ndarray]


@dataclass(frozen=True)
class FitnessLandscape:
    """Genotype -> base reward parameter in [0, 1].

    ``deterministic`` landscapes emit the base value as the reward;
    ``bernoulli`` landscapes emit 0/1 rewards with the base value as the
    success probability; ``environment`` landscapes look the value up under
    the current ``environment_state`` and emit it deterministically.
    The base value always doubles as the survival probability.
    """

    kind: str
    mapping: ValueFn
    environment_state: Hashable = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in LANDSCAPE_KINDS:
            raise ConfigurationError(f"unknown landscape kind {self.kind!r}")

    def values(self, genomes: np.ndarray) -> np.ndarray:
        genomes = np.atleast_2d(np.asarray(genomes, dtype=np.uint8))
        out = np.asarray(self.mapping(genomes, self.environment_state), dtype=float)
        if out.shape != (genomes.shape[0],):
            out = np.broadcast_to(out, (genomes.shape[0],)).astype(float)
        return out

    def value(self, genotype: Genotype | Sequence[int]) -> float:
        alleles = genotype.alleles if isinstance(genotype, Genotype) else tuple(genotype)
        return float(self.values(np.array([alleles], dtype=np.uint8))[0])

    def with_environment(self, state: Hashable) -> FitnessLandscape:
        return replace(self, environment_state=state)

    def sample_rewards(self, genotype: Genotype, n: int, rng: np.random.Generator) -> np.ndarray:
        p = self.value(genotype)
        if not (math.isfinite(p) and p >= 0):
            raise ConfigurationError(f"landscape value {p} is not a finite non-negative reward")
        if self.kind == "bernoulli":
            return (rng.random(n) < p).astype(float)
        return np.full(n, p)

    @classmethod
    def constant(cls, value: float) -> FitnessLandscape:
        return cls("deterministic", lambda g, _env: np.full(g.shape[0], float(value)), name=f"constant({value})")

    @classmethod
    def table(cls, table: Mapping[str | tuple, float], default: float | None = None) -> FitnessLandscape:
        """Deterministic lookup keyed by bitstring (``"0110"``) or allele tuple."""
        lookup = {(k if isinstance(k, str) else "".join(map(str, k))): float(v) for k, v in table.items()}

        def mapping(genomes, _env):
            out = np.empty(genomes.shape[0])
            for i, row in enumerate(genomes):
                key = "".join(map(str, row.tolist()))
                if key in lookup:
                    out[i] = lookup[key]
                elif default is not None:
                    out[i] = default
                else:
                    raise ConfigurationError(f"genotype {key} missing from landscape table")
            return out

        return cls("deterministic", mapping, name="table")

    @classmethod
    def bernoulli(cls, p: float | Mapping[str | tuple, float]) -> FitnessLandscape:
        if isinstance(p, Mapping):
            return replace(cls.table(p), kind="bernoulli", name="bernoulli-table")
        return replace(cls.constant(p), kind="bernoulli", name=f"bernoulli({p})")

    @classmethod
    def single_locus(cls, locus: int, value0: float, value1: float, kind: str = "deterministic") -> FitnessLandscape:
        def mapping(genomes, _env):
            return np.where(genomes[:, locus] == 1, float(value1), float(value0))

        return cls(kind, mapping, name=f"locus{locus}({value0},{value1})")

    @classmethod
    def environment(cls, by_state: Mapping[Hashable, FitnessLandscape], state: Hashable) -> FitnessLandscape:
        """Switch between sub-landscapes according to ``environment_state``."""
        by_state = dict(by_state)
        if state not in by_state:
            raise ConfigurationError(f"environment state {state!r} has no landscape")

        def mapping(genomes, env):
            try:
                sub = by_state[env]
            except KeyError:
                raise ConfigurationError(f"environment state {env!r} has no landscape") from None
            return sub.values(genomes)

        return cls("environment", mapping, environment_state=state, name="environment")


def estimate_expected_fitness(
    g: Genotype, land: FitnessLandscape, n: int, rng_stream: np.random.Generator
) -> tuple[float, float]:
    """Monte-Carlo estimate of the expected reward of ``g`` and its standard error.

    The standard error uses the unbiased sample variance; with ``n == 1``
    it is reported as 0.
    """
    if n < 1:
        raise DomainError("sample count n must be >= 1")
    if land.kind != "bernoulli":
        # summing n copies of a float can drift; the value is known exactly
        return land.value(g), 0.0
    draws = land.sample_rewards(g, n, rng_stream)
    mean = float(draws.mean())
    se = float(draws.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return mean, se
