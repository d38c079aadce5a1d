"""Scenario configuration: strict JSON parsing with field-level errors.

A config is a single JSON object. Unknown keys are rejected so a typo never
silently falls back to a default. ``to_dict`` produces the fully resolved
form stored in run manifests; feeding it back to ``parse_config_dict``
reproduces an equal config.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

from .dynamics import EvolutionConfig
from .games import REFERENCE_STRATEGIES, GameMatrix
from .rl import LearningParams
from .streams import MAX_SEED

SCENARIOS = ("antibiotic", "mimicry", "cooperation")


class ConfigError(ValueError):
    """Invalid configuration. ``errors`` lists ``(field path, message)`` pairs."""

    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = list(errors)
        super().__init__("; ".join(f"{path}: {msg}" if path else msg for path, msg in self.errors))

    @property
    def fields(self) -> list[str]:
        return [path for path, _ in self.errors]


@dataclass(frozen=True)
class ScheduleSpan:
    start: int
    end: int
    drug: bool


@dataclass(frozen=True)
class AntibioticParams:
    initial_frequency: float = 0.1
    resistance_locus: int = 0
    resistant_on: float = 0.9
    susceptible_on: float = 0.3
    resistant_off: float = 0.55
    susceptible_off: float = 0.65
    feedback: bool = True
    neutral_survival: float = 0.7


@dataclass(frozen=True)
class MimicryParams:
    # empty target means alternating 1010... of length locus_count
    target: str = ""
    initial: str = "random"
    base_survival: float = 0.4
    similarity_gain: float = 0.5
    feedback: bool = True
    neutral_survival: float = 0.7


@dataclass(frozen=True)
class CooperationParams:
    episodes: int = 400
    rounds: int = 20
    opponent: str = "TitForTat"
    warmup_episodes: int = 100
    warmup_epsilon: float = 1.0
    feedback: bool = True
    game: GameMatrix = field(default_factory=GameMatrix)


PARAMS_TYPES = {"antibiotic": AntibioticParams, "mimicry": MimicryParams, "cooperation": CooperationParams}

DEFAULT_EVOLUTION = {
    "antibiotic": dict(population_size=500, mutation_rate=0.001, locus_count=1, generations=40),
    "mimicry": dict(population_size=500, mutation_rate=0.005, locus_count=20, generations=60),
}
DEFAULT_LEARNING = dict(alpha=0.2, gamma=0.9, epsilon=0.2)
DEFAULT_REPLICATES = 100


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    seed: int = 0
    replicates: int = DEFAULT_REPLICATES
    evolution: EvolutionConfig | None = None
    learning: LearningParams | None = None
    schedule: tuple[ScheduleSpan, ...] | None = None
    params: AntibioticParams | MimicryParams | CooperationParams | None = None

    @property
    def mimicry_target(self) -> str:
        if self.params.target:
            return self.params.target
        return ("10" * self.evolution.locus_count)[: self.evolution.locus_count]

    def drug_at(self, generation: int) -> bool:
        for span in self.schedule:
            if span.start <= generation < span.end:
                return span.drug
        return self.schedule[-1].drug


# -- primitive readers -------------------------------------------------------


def _read_int(value, path, errors, minimum=None, maximum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        else:
            errors.append((path, f"expected an integer, got {value!r}"))
            return None
    if minimum is not None and value < minimum:
        errors.append((path, f"must be >= {minimum}, got {value}"))
        return None
    if maximum is not None and value > maximum:
        errors.append((path, f"must be <= {maximum}, got {value}"))
        return None
    return value


def _read_float(value, path, errors, lo=None, hi=None, lo_open=False, hi_open=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.append((path, f"expected a number, got {value!r}"))
        return None
    value = float(value)
    if not math.isfinite(value):
        errors.append((path, f"must be finite, got {value}"))
        return None
    below = lo is not None and (value <= lo if lo_open else value < lo)
    above = hi is not None and (value >= hi if hi_open else value > hi)
    if below or above:
        interval = f"{'(' if lo_open else '['}{lo}, {hi}{')' if hi_open else ']'}"
        errors.append((path, f"must lie in {interval}, got {value}"))
        return None
    return value


def _read_bool(value, path, errors):
    if not isinstance(value, bool):
        errors.append((path, f"expected true or false, got {value!r}"))
        return None
    return value


def _read_object(value, path, errors, allowed) -> dict | None:
    if not isinstance(value, dict):
        errors.append((path, f"expected an object, got {type(value).__name__}"))
        return None
    for key in value:
        if key not in allowed:
            where = f"{path}.{key}" if path else key
            errors.append((where, f"unknown key (allowed: {', '.join(allowed)})"))
    return value


def _join(path, key):
    return f"{path}.{key}" if path else key


# -- sections ----------------------------------------------------------------


def _read_evolution(raw, scenario, errors):
    base = dict(DEFAULT_EVOLUTION[scenario], uniform_reproduction=False)
    data = _read_object(raw, "evolution", errors, list(base)) if raw is not None else {}
    if data is None:
        return None
    merged = {**base, **data}
    out = {
        "population_size": _read_int(merged["population_size"], "evolution.population_size", errors, minimum=2),
        "mutation_rate": _read_float(merged["mutation_rate"], "evolution.mutation_rate", errors, 0, 1),
        "locus_count": _read_int(merged["locus_count"], "evolution.locus_count", errors, minimum=1),
        "generations": _read_int(merged["generations"], "evolution.generations", errors, minimum=1),
        "uniform_reproduction": _read_bool(merged["uniform_reproduction"], "evolution.uniform_reproduction", errors),
    }
    if any(v is None for v in out.values()):
        return None
    return EvolutionConfig(**out)


def _read_learning(raw, errors):
    data = _read_object(raw, "learning", errors, list(DEFAULT_LEARNING)) if raw is not None else {}
    if data is None:
        return None
    merged = {**DEFAULT_LEARNING, **data}
    out = {
        "alpha": _read_float(merged["alpha"], "learning.alpha", errors, 0, 1, lo_open=True),
        "gamma": _read_float(merged["gamma"], "learning.gamma", errors, 0, 1, hi_open=True),
        "epsilon": _read_float(merged["epsilon"], "learning.epsilon", errors, 0, 1),
    }
    if any(v is None for v in out.values()):
        return None
    return LearningParams(**out)


def _read_schedule(raw, generations, errors):
    if raw is None:
        return (ScheduleSpan(0, generations, True),) if generations else None
    if not isinstance(raw, list) or not raw:
        errors.append(("schedule", "expected a non-empty list of {start, end, drug} spans"))
        return None
    spans = []
    for i, item in enumerate(raw):
        path = f"schedule[{i}]"
        data = _read_object(item, path, errors, ["start", "end", "drug"])
        if data is None:
            continue
        missing = [k for k in ("start", "end", "drug") if k not in data]
        if missing:
            errors.append((path, f"missing keys: {', '.join(missing)}"))
            continue
        start = _read_int(data["start"], f"{path}.start", errors, minimum=0)
        end = _read_int(data["end"], f"{path}.end", errors, minimum=0)
        drug = _read_bool(data["drug"], f"{path}.drug", errors)
        if None in (start, end, drug):
            continue
        if end <= start:
            errors.append((path, f"span [{start}, {end}) is empty"))
            continue
        spans.append(ScheduleSpan(start, end, drug))
    if len(spans) != len(raw):
        return None

    ordered = sorted(spans, key=lambda s: (s.start, s.end))
    ok = True
    for a, b in zip(ordered, ordered[1:]):
        if b.start < a.end:
            errors.append(("schedule", f"spans [{a.start}, {a.end}) and [{b.start}, {b.end}) overlap"))
            ok = False
        elif b.start > a.end:
            errors.append(("schedule", f"gap between spans [{a.start}, {a.end}) and [{b.start}, {b.end})"))
            ok = False
    if generations is not None and ok:
        if ordered[0].start != 0 or ordered[-1].end != generations:
            errors.append(
                ("schedule", f"spans cover [{ordered[0].start}, {ordered[-1].end}) but must cover [0, {generations})")
            )
            ok = False
    return tuple(ordered) if ok else None


def _read_game(raw, errors):
    data = _read_object(raw, "params.game", errors, ["T", "R", "P", "S"])
    if data is None:
        return None
    base = GameMatrix()
    vals = {}
    for key in ("T", "R", "P", "S"):
        vals[key] = _read_float(data.get(key, getattr(base, key)), f"params.game.{key}", errors)
    if any(v is None for v in vals.values()):
        return None
    T, R, P, S = (vals[k] for k in "TRPS")
    bad = False
    if not (T > R > P > S):
        errors.append(("params.game", f"payoffs must satisfy T > R > P > S, got T={T}, R={R}, P={P}, S={S}"))
        bad = True
    if not 2 * R > T + S:
        errors.append(("params.game", f"payoffs must satisfy 2R > T + S, got 2R={2 * R}, T+S={T + S}"))
        bad = True
    return None if bad else GameMatrix(**vals)


def _read_params(raw, scenario, evolution, errors):
    cls = PARAMS_TYPES[scenario]
    names = [f.name for f in fields(cls)]
    data = _read_object(raw, "params", errors, names) if raw is not None else {}
    if data is None:
        return None
    defaults = cls()
    out = {}
    for f in fields(cls):
        path = f"params.{f.name}"
        present = f.name in data
        value = data.get(f.name, getattr(defaults, f.name))
        if f.name == "game":
            out[f.name] = _read_game(value, errors) if present else value
            continue
        default = getattr(defaults, f.name)
        if isinstance(default, bool):
            out[f.name] = _read_bool(value, path, errors)
        elif isinstance(default, int):
            out[f.name] = _read_int(value, path, errors, minimum=0)
        elif isinstance(default, float):
            out[f.name] = _read_float(value, path, errors, 0, 1)
        else:
            if not isinstance(value, str):
                errors.append((path, f"expected a string, got {value!r}"))
                out[f.name] = None
            else:
                out[f.name] = value
    if any(v is None for v in out.values()):
        return None

    if scenario == "antibiotic" and evolution is not None:
        if out["resistance_locus"] >= evolution.locus_count:
            errors.append(
                ("params.resistance_locus", f"must be < locus_count ({evolution.locus_count}), got {out['resistance_locus']}")
            )
            return None
    if scenario == "mimicry":
        target = out["target"]
        if target and (set(target) - {"0", "1"}):
            errors.append(("params.target", f"must be a bitstring of 0/1, got {target!r}"))
            return None
        if target and evolution is not None and len(target) != evolution.locus_count:
            errors.append(("params.target", f"length {len(target)} must equal locus_count ({evolution.locus_count})"))
            return None
        if out["initial"] not in ("random", "target"):
            errors.append(("params.initial", f"must be 'random' or 'target', got {out['initial']!r}"))
            return None
        if out["base_survival"] + out["similarity_gain"] > 1:
            errors.append(("params.similarity_gain", "base_survival + similarity_gain must be <= 1"))
            return None
    if scenario == "cooperation":
        if out["opponent"] not in REFERENCE_STRATEGIES:
            errors.append(("params.opponent", f"must be one of {sorted(REFERENCE_STRATEGIES)}, got {out['opponent']!r}"))
            return None
        for key in ("episodes", "rounds"):
            if out[key] < 1:
                errors.append((f"params.{key}", f"must be >= 1, got {out[key]}"))
                return None
    return cls(**out)


TOP_KEYS = ["scenario", "seed", "replicates", "evolution", "learning", "schedule", "params"]


def parse_config_dict(data: Any) -> ScenarioConfig:
    errors: list[tuple[str, str]] = []
    if _read_object(data, "", errors, TOP_KEYS) is None:
        raise ConfigError(errors)
    scenario = data.get("scenario")
    if scenario not in SCENARIOS:
        errors.append(("scenario", f"must be one of {', '.join(SCENARIOS)}, got {scenario!r}"))
        raise ConfigError(errors)

    seed = _read_int(data.get("seed", 0), "seed", errors, minimum=0, maximum=MAX_SEED)
    replicates = _read_int(data.get("replicates", DEFAULT_REPLICATES), "replicates", errors, minimum=1)

    evolution = learning = schedule = None
    if scenario == "cooperation":
        for key in ("evolution", "schedule"):
            if key in data:
                errors.append((key, "not used by the cooperation scenario"))
        learning = _read_learning(data.get("learning"), errors)
    else:
        if "learning" in data:
            errors.append(("learning", f"only used by the cooperation scenario, not {scenario}"))
        evolution = _read_evolution(data.get("evolution"), scenario, errors)
        if scenario == "antibiotic":
            schedule = _read_schedule(data.get("schedule"), evolution.generations if evolution else None, errors)
        elif "schedule" in data:
            errors.append(("schedule", "only used by the antibiotic scenario"))
    params = _read_params(data.get("params"), scenario, evolution, errors)

    if errors:
        raise ConfigError(errors)
    return ScenarioConfig(scenario, seed, replicates, evolution, learning, schedule, params)


def parse_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError([("", f"config file not found: {path}")]) from None
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError([("", f"cannot read {path}: {exc}")]) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([("", f"malformed JSON in {path} at line {exc.lineno}, column {exc.colno}: {exc.msg}")]) from None
    return parse_config_dict(data)


def _plain(obj):
    if hasattr(obj, "__dataclass_fields__"):
        return {f.name: _plain(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, tuple):
        return [_plain(x) for x in obj]
    return obj


def to_dict(cfg: ScenarioConfig) -> dict:
    """Fully resolved JSON-ready form; sections a scenario does not use are omitted."""
    out = {"scenario": cfg.scenario, "seed": cfg.seed, "replicates": cfg.replicates}
    for key in ("evolution", "learning", "schedule", "params"):
        value = getattr(cfg, key)
        if value is not None:
            out[key] = _plain(value)
    return out


def with_overrides(cfg: ScenarioConfig, seed: int | None = None, replicates: int | None = None) -> ScenarioConfig:
    data = to_dict(cfg)
    if seed is not None:
        data["seed"] = seed
    if replicates is not None:
        data["replicates"] = replicates
    return parse_config_dict(data)
