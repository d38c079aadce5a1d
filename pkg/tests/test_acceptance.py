"""Acceptance criteria, one test per criterion.

A PASS/FAIL line per criterion is printed in the terminal summary
(see ``conftest.py``). Tolerances and runtime budgets are fixed here.
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from config_corpus import INVALID, VALID
from evorl import harness
from evorl.config import ConfigError, parse_config_dict, to_dict
from evorl.core import FitnessLandscape, Genotype, Individual, population_mean_offspring, relative_fitness
from evorl.dynamics import EvolutionConfig, SelectionParams, evolve, random_population, selection_delta, survival_trial
from evorl.games import ALL_C, ALL_D, TIT_FOR_TAT, C, D, GameMatrix, discounted_policy_value, payoff
from evorl.rl import LearningParams, QTable, q_update, value_iteration
from evorl.scenarios import cooperates_when_mutual, run_antibiotic, run_cooperation
from mdp_suite import deterministic_mdps, train_on

F = Fraction
criterion = pytest.mark.criterion


@criterion(1, "equation fidelity: relative fitness, selection equation, Q-update, payoffs")
def test_equation_fidelity():
    assert relative_fitness(3, 3) == 1.0
    assert relative_fitness(4, 2) == 2.0
    assert relative_fitness(0, 2) == 0.0
    assert relative_fitness(F(7), F(3)) == F(7, 3)

    assert selection_delta(F("0.4"), SelectionParams(F("0.5"), F("0.1"), F("0.4"))) == 0
    assert selection_delta(F("0.6"), SelectionParams(F(0), F("0.9"), F("0.1"))) == 0
    assert selection_delta(F("0.6"), SelectionParams(F("0.5"), F("0.1"), F("0.4"))) == F(1, 100)
    grid = [F(i, 7) for i in range(8)]
    for p in grid:
        for v in grid:
            assert selection_delta(p, SelectionParams(F(0), v, F(1, 3))) == 0
            assert selection_delta(p, SelectionParams(v, F(0), F(1, 3))) == 0
            assert selection_delta(p, SelectionParams(v, F(2, 3), p)) == 0

    q = QTable(2, 2, [[1.0, 2.0], [3.0, 4.0]])
    assert q_update(q, 0, 1, 9.0, 1, LearningParams(alpha=0.0, gamma=0.9)) == q
    assert q_update(QTable(2, 2), 0, 1, 2.0, 1, LearningParams(alpha=1.0, gamma=0.0)).values.tolist() == [[0, 2], [0, 0]]
    assert q_update(QTable(2, 2), 0, 1, 1.0, 1, LearningParams(alpha=0.5, gamma=0.9)).values[0, 1] == 0.5

    m = GameMatrix(5, 3, 1, 0)
    assert payoff(m, C, C) == (3, 3)
    assert payoff(m, D, C) == (5, 0)
    assert payoff(m, C, D) == (0, 5)
    assert payoff(m, D, D) == (1, 1)


@criterion(2, "Q-learning matches value iteration within 1e-3 on 6 deterministic MDPs, < 10 s")
def test_q_learning_oracle_equivalence():
    start = time.perf_counter()
    mdps = deterministic_mdps()
    assert len(mdps) >= 5
    for i, env in enumerate(mdps):
        assert env.state_count <= 8 and env.action_count <= 4
        oracle = value_iteration(env, 0.9, tol=1e-12)
        # one more Bellman sweep moves the oracle by less than 1e-12
        cont = np.where(env.terminal, 0.0, 0.9)
        sweep = env.reward + cont * oracle.max(axis=1)[env.next_state]
        assert np.abs(sweep - oracle).max() <= 1e-12
        q = train_on(env, seed=i)
        assert np.abs(q.values - oracle).max() <= 1e-3, f"MDP {i}"
    assert time.perf_counter() - start < 10


@criterion(3, "cooperation: AllC-vs-TFT = 30, AllD-vs-TFT = 14, >= 95/100 learners cooperate after CC, < 60 s")
def test_cooperation_result():
    start = time.perf_counter()
    m = GameMatrix(5, 3, 1, 0)
    assert discounted_policy_value(ALL_C, TIT_FOR_TAT, m, 0.9) == 30
    assert discounted_policy_value(ALL_D, TIT_FOR_TAT, m, 0.9) == 14

    cfg = parse_config_dict(
        {"scenario": "cooperation", "seed": 2023, "replicates": 100, "learning": {"gamma": 0.9}, "params": {"game": {"T": 5, "R": 3, "P": 1, "S": 0}}}
    )
    traj = run_cooperation(cfg)
    cooperating = sum(cooperates_when_mutual(p) for p in traj.policies.values())
    print(f"learners cooperating after mutual cooperation: {cooperating}/100")
    assert cooperating >= 95
    assert time.perf_counter() - start < 60


@criterion(4, "antibiotic: drug on lifts resistance above 0.9; drug off lowers it by >= 0.1, < 30 s")
def test_selection_responds_to_feedback():
    start = time.perf_counter()
    base = {"scenario": "antibiotic", "seed": 7, "replicates": 100, "evolution": {"population_size": 500, "generations": 40}}
    on = run_antibiotic(parse_config_dict({**base, "params": {"initial_frequency": 0.1}}))
    off = run_antibiotic(
        parse_config_dict(
            {**base, "params": {"initial_frequency": 0.9}, "schedule": [{"start": 0, "end": 40, "drug": False}]}
        )
    )
    on_final = on.array("allele_freq")[:, -1].mean()
    off_freq = off.array("allele_freq")
    off_drop = off_freq[:, 0].mean() - off_freq[:, -1].mean()
    print(f"drug on terminal mean {on_final:.4f}; drug off drop {off_drop:.4f}")
    assert on_final > 0.9
    assert off_drop >= 0.1
    assert time.perf_counter() - start < 30


@criterion(5, "neutral ablation: mean allele frequency after 50 generations within 3 SE of p0 (500 replicates), < 30 s")
def test_neutral_ablation():
    start = time.perf_counter()
    cfg = parse_config_dict(
        {
            "scenario": "antibiotic",
            "seed": 11,
            "replicates": 500,
            "evolution": {"population_size": 100, "generations": 50, "mutation_rate": 0.0},
            "schedule": [{"start": 0, "end": 25, "drug": True}, {"start": 25, "end": 50, "drug": False}],
            "params": {"initial_frequency": 0.4, "feedback": False, "neutral_survival": 0.6},
        }
    )
    final = run_antibiotic(cfg).array("allele_freq")[:, -1]
    se = final.std(ddof=1) / np.sqrt(len(final))
    print(f"neutral terminal mean {final.mean():.4f} vs p0 0.4, SE {se:.4f}")
    assert abs(final.mean() - 0.4) <= 3 * se
    assert time.perf_counter() - start < 30


@criterion(6, "mean relative fitness of every generated population equals 1 within 1e-12")
def test_mean_one_fitness_identity(tree):
    landscapes = [
        FitnessLandscape.constant(0.8),
        FitnessLandscape.single_locus(0, 0.3, 0.9),
        FitnessLandscape("deterministic", lambda g, _e: 0.2 + 0.7 * g.mean(axis=1)),
    ]
    checked = 0
    for i, land in enumerate(landscapes):
        for n, loci, mu in ((7, 1, 0.0), (50, 3, 0.05), (301, 8, 0.01)):
            rng = tree.stream(f"mean-one-{i}", n)
            cfg = EvolutionConfig(n, mu, loci, 15)
            for pop in evolve(random_population(n, loci, rng), land, cfg, rng)[1:]:
                parents = pop.parents
                w = relative_fitness(parents.offspring.astype(float), population_mean_offspring(parents))
                assert abs(w.mean() - 1.0) <= 1e-12
                checked += 1
    assert checked == 3 * 3 * 15


@criterion(7, "survival trial at p = 0.3 over 1e5 seeded trials: 0.3 +/- 0.005")
def test_binary_feedback_calibration():
    rng = np.random.default_rng(20230514)
    ind = Individual(Genotype((1, 0, 1)))
    land = FitnessLandscape.constant(0.3)
    freq = sum(survival_trial(ind, land, rng).value for _ in range(100_000)) / 100_000
    print(f"live frequency {freq}")
    assert abs(freq - 0.3) <= 0.005


SMALL = {
    "antibiotic": {
        "scenario": "antibiotic",
        "evolution": {"population_size": 60, "generations": 12, "mutation_rate": 0.01},
        "schedule": [{"start": 0, "end": 6, "drug": True}, {"start": 6, "end": 12, "drug": False}],
    },
    "mimicry": {"scenario": "mimicry", "evolution": {"population_size": 60, "generations": 12}},
    "cooperation": {"scenario": "cooperation", "params": {"episodes": 40, "warmup_episodes": 10}},
}


@criterion(8, "determinism: byte-identical CSVs per scenario; replicate k invariant to replicate count")
def test_determinism(tmp_path):
    for scenario, data in SMALL.items():
        cfg = parse_config_dict({**data, "seed": 99, "replicates": 5})
        outs = []
        for tag in ("a", "b"):
            manifest = harness.run(cfg, tmp_path / scenario / tag)
            outs.append({name: (tmp_path / scenario / tag / name).read_bytes() for name in manifest.outputs.values()})
        assert outs[0] == outs[1], scenario

        big = parse_config_dict({**data, "seed": 99, "replicates": 10})
        harness.run(big, tmp_path / scenario / "big")
        small_rows = outs[0]["trajectories.csv"].decode().splitlines()
        big_rows = (tmp_path / scenario / "big" / "trajectories.csv").read_text().splitlines()
        assert small_rows[0] == big_rows[0]
        assert small_rows[1:] == [r for r in big_rows[1:] if int(r.split(",")[0]) < 5], scenario


@criterion(9, "config validation: invalid corpus rejected with field names; valid corpus round-trips")
def test_config_validation(tmp_path):
    for data, field in INVALID:
        with pytest.raises(ConfigError) as info:
            parse_config_dict(data)
        assert field in info.value.fields, (data, info.value.fields)
    for i, data in enumerate(VALID):
        cfg = parse_config_dict(data)
        manifest = harness.RunManifest(config=to_dict(cfg), seed=cfg.seed)
        manifest.write(tmp_path / f"m{i}.json")
        assert parse_config_dict(harness.load_manifest(tmp_path / f"m{i}.json")["config"]) == cfg
