from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evorl.core import ConfigurationError, DomainError, FitnessLandscape, Genotype, Individual, Population, population_mean_offspring, relative_fitness
from evorl.dynamics import (
    EvolutionConfig,
    Extinction,
    SelectionParams,
    allele_frequency,
    evolve,
    initial_population,
    mutate,
    selection_delta,
    step_generation,
    survival_trial,
    weighted_indices,
)

F = Fraction


@pytest.mark.parametrize(
    "p, h2, s, w, expected",
    [
        (F("0.4"), F("0.5"), F("0.1"), F("0.4"), 0),
        (F("0.6"), F(0), F("0.9"), F("0.1"), 0),
        (F("0.6"), F("0.5"), F("0.1"), F("0.4"), F("0.01")),
    ],
)
def test_selection_delta_examples_exact(p, h2, s, w, expected):
    assert selection_delta(p, SelectionParams(h2, s, w)) == expected


def test_selection_delta_float_substitution():
    assert selection_delta(0.6, SelectionParams(0.5, 0.1, 0.4)) == pytest.approx(0.01, abs=1e-15)


rationals = st.fractions(min_value=0, max_value=1, max_denominator=1000)


@given(rationals, rationals, st.fractions(min_value=-2, max_value=2, max_denominator=1000), st.fractions(min_value=-2, max_value=2, max_denominator=1000))
def test_selection_delta_sign(p, h2, s, w):
    delta = selection_delta(p, SelectionParams(h2, s, w))
    if h2 == 0 or s == 0 or p == w:
        assert delta == 0
    else:
        assert (delta > 0) == (s * (p - w) > 0)


def test_selection_delta_rejects_bad_inputs():
    with pytest.raises(DomainError):
        selection_delta(float("nan"), SelectionParams(0.5, 0.1, 0.4))
    with pytest.raises(DomainError):
        selection_delta(1.2, SelectionParams(0.5, 0.1, 0.4))
    with pytest.raises(DomainError):
        SelectionParams(1.5, 0.1, 0.4)
    with pytest.raises(DomainError):
        SelectionParams(0.5, float("inf"), 0.4)


@pytest.mark.parametrize("value, expected", [(1.0, 1), (0.0, 0)])
def test_survival_trial_certain(value, expected, rng):
    ind = Individual(Genotype((1, 0)))
    for _ in range(50):
        out = survival_trial(ind, FitnessLandscape.constant(value), rng)
        assert out.value == expected
        assert out.individual.alive == expected
        assert out.individual.genotype == ind.genotype


def test_survival_trial_frequency_against_same_stream():
    ind = Individual(Genotype((0,)))
    land = FitnessLandscape.constant(0.3)
    rng = np.random.default_rng(7)
    live = sum(survival_trial(ind, land, rng).value for _ in range(100_000))
    redraw = np.random.default_rng(7)
    assert live == sum(redraw.random() < 0.3 for _ in range(100_000))
    assert abs(live / 100_000 - 0.3) <= 0.005


def test_survival_trial_rejects_out_of_range(rng):
    with pytest.raises(ConfigurationError):
        survival_trial(Individual(Genotype((0,))), FitnessLandscape.constant(1.2), rng)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=30))
def test_mutate_zero_rate_is_identity(bits):
    g = Genotype(tuple(bits))
    assert mutate(g, 0.0, np.random.default_rng(0)) == g


def test_mutate_certain_flip(rng):
    assert mutate(Genotype((0, 1, 1, 0)), 1.0, rng) == Genotype((1, 0, 0, 1))


def test_mutation_count_monte_carlo():
    rng = np.random.default_rng(11)
    g = Genotype((0,) * 100)
    flips = [sum(mutate(g, 0.01, rng).alleles) for _ in range(10_000)]
    assert abs(np.mean(flips) - 1.0) <= 0.05


def test_mutate_rejects_bad_rate(rng):
    with pytest.raises(DomainError):
        mutate(Genotype((0,)), 1.5, rng)


def test_allele_frequency_examples():
    assert allele_frequency(Population.from_genotypes([(1, 1)] * 4), 1) == 1.0
    assert allele_frequency(Population.from_genotypes([(1,), (0,), (1,), (1,)]), 0) == 0.75
    with pytest.raises(DomainError):
        allele_frequency(Population.from_genotypes([]), 0)
    with pytest.raises(DomainError):
        allele_frequency(Population.from_genotypes([(1,)]), 1)


class FixedUniforms:
    def __init__(self, values):
        self.values = np.asarray(values, dtype=float)

    def random(self, n):
        return self.values[:n]


def test_weighted_indices_cumulative_inversion():
    weights = np.array([0.5, 0.0, 1.5, 2.0])  # cumulative 0.5, 0.5, 2.0, 4.0
    # u * 4 = 0, 1.9, 2.0, 3.96
    idx = weighted_indices(weights, 4, FixedUniforms([0.0, 0.475, 0.5, 0.99]))
    assert idx.tolist() == [0, 2, 3, 3]


@given(st.lists(st.floats(0, 1), min_size=1, max_size=20).filter(lambda w: sum(w) > 0), st.integers(0, 2**32))
def test_weighted_indices_skip_zero_weights(weights, seed):
    w = np.array(weights)
    idx = weighted_indices(w, 200, np.random.default_rng(seed))
    assert (w[idx] > 0).all()


def neutral_cfg(n, generations=1, mu=0.0, loci=1):
    return EvolutionConfig(population_size=n, mutation_rate=mu, locus_count=loci, generations=generations)


def test_neutral_mutation_free_step_resamples_inputs(rng):
    pop = Population.from_genotypes([(0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 0)])
    out = step_generation(pop, FitnessLandscape.constant(1.0), neutral_cfg(4, loci=3), rng)
    inputs = {tuple(r) for r in pop.genomes.tolist()}
    assert out.size == 4
    assert all(tuple(r) in inputs for r in out.genomes.tolist())
    assert out.generation == 1
    assert out.parents.alive.tolist() == [1, 1, 1, 1]
    assert out.parents.offspring.sum() == 4


def test_certain_death_signals_extinction(rng):
    pop = initial_population(10, 2, 0.5)
    with pytest.raises(Extinction) as info:
        step_generation(pop, FitnessLandscape.constant(0.0), neutral_cfg(10, loci=2), rng)
    assert info.value.generation == 1
    assert len(evolve(pop, FitnessLandscape.constant(0.0), neutral_cfg(10, 5, loci=2), rng)) == 1


def test_step_rejects_size_mismatch(rng):
    with pytest.raises(DomainError):
        step_generation(initial_population(5, 1), FitnessLandscape.constant(1.0), neutral_cfg(6), rng)


def test_dead_parents_have_no_offspring(rng):
    land = FitnessLandscape.single_locus(0, 0.0, 1.0)
    pop = initial_population(50, 1, 0.4)
    out = step_generation(pop, land, neutral_cfg(50), rng)
    parents = out.parents
    assert parents.offspring[parents.genomes[:, 0] == 0].sum() == 0
    assert allele_frequency(out, 0) == 1.0


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(2, 60),
    loci=st.integers(1, 5),
    mu=st.floats(0, 1),
    value=st.floats(0.05, 1.0),
    seed=st.integers(0, 2**32),
)
def test_size_conservation_and_mean_one(n, loci, mu, value, seed):
    rng = np.random.default_rng(seed)
    pop = initial_population(n, loci, 0.5)
    cfg = neutral_cfg(n, mu=mu, loci=loci)
    for g in range(3):
        try:
            pop = step_generation(pop, FitnessLandscape.constant(value), cfg, rng)
        except Extinction:
            return
        assert pop.size == n
        assert pop.generation == g + 1
        counts = pop.parents.offspring
        w = relative_fitness(counts.astype(float), population_mean_offspring(pop.parents))
        assert abs(w.mean() - 1.0) <= 1e-12


def final_frequencies(land, n, p0, generations, replicates, tree, label, uniform=False):
    cfg = EvolutionConfig(n, 0.0, 1, generations, uniform_reproduction=uniform)
    out = []
    for k in range(replicates):
        history = evolve(initial_population(n, 1, p0), land, cfg, tree.stream(label, k))
        assert len(history) == generations + 1
        out.append(allele_frequency(history[-1], 0))
    return np.array(out)


def test_selection_raises_favoured_allele(tree):
    finals = final_frequencies(FitnessLandscape.single_locus(0, 0.5, 0.9), 200, 0.5, 20, 200, tree, "select")
    assert finals.mean() >= 0.5 + 0.2


@pytest.mark.parametrize("uniform", [False, True])
def test_neutral_drift_is_a_martingale(tree, uniform):
    finals = final_frequencies(FitnessLandscape.constant(0.6), 50, 0.3, 20, 500, tree, f"drift{uniform}", uniform)
    se = finals.std(ddof=1) / np.sqrt(len(finals))
    assert abs(finals.mean() - 0.3) <= 3 * se


def test_selection_monotone_in_advantage(tree):
    means, ses = [], []
    for adv in (0.0, 0.05, 0.15):
        land = FitnessLandscape.single_locus(0, 0.5, 0.5 + adv)
        finals = final_frequencies(land, 40, 0.3, 10, 500, tree, "mono")
        means.append(finals.mean())
        ses.append(finals.std(ddof=1) / np.sqrt(500))
    for i in range(2):
        assert means[i + 1] >= means[i] - 2 * np.hypot(ses[i], ses[i + 1])


def test_same_seed_same_trajectory():
    land = FitnessLandscape.single_locus(0, 0.4, 0.8)
    cfg = EvolutionConfig(30, 0.05, 3, 15)
    runs = [evolve(initial_population(30, 3, 0.2), land, cfg, np.random.default_rng(5)) for _ in range(2)]
    assert all(np.array_equal(a.genomes, b.genomes) for a, b in zip(*runs))


def test_evolution_config_validation():
    with pytest.raises(ConfigurationError):
        EvolutionConfig(1, 0.0, 1, 1)
    with pytest.raises(ConfigurationError):
        EvolutionConfig(10, 1.5, 1, 1)
    with pytest.raises(ConfigurationError):
        EvolutionConfig(10, 0.1, 0, 1)
    with pytest.raises(ConfigurationError):
        EvolutionConfig(10, 0.1, 1, 0)
