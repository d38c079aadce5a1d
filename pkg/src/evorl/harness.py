"""Run orchestration: dispatch, summary statistics, CSV and manifest output.

Output layout of a run directory::

    manifest.json      config snapshot, seed, version, timestamps, outputs
    trajectories.csv   one row per (replicate, step)
    summary.csv        per-step across-replicate mean and standard error
    policy.csv         cooperation only: greedy move per learner state

Everything except the manifest timestamps is a pure function of the config.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import ScenarioConfig, to_dict
from .core import DomainError
from .games import MOVE_NAMES, STATE_NAMES
from .scenarios import OBSERVABLES, TrajectorySet, run_scenario

TRAJECTORY_FILE = "trajectories.csv"
SUMMARY_FILE = "summary.csv"
POLICY_FILE = "policy.csv"
MANIFEST_FILE = "manifest.json"


def trajectory_columns(scenario: str) -> list[str]:
    step, names = OBSERVABLES[scenario]
    return ["replicate", step, *names]


def summary_columns(scenario: str) -> list[str]:
    step, names = OBSERVABLES[scenario]
    cols = [step, "n_replicates"]
    for name in names:
        cols += [f"{name}_mean", f"{name}_se"]
    return cols + ["se_defined"]


@dataclass
class SummaryTable:
    step_name: str
    observables: tuple[str, ...]
    steps: np.ndarray
    n: int
    mean: dict[str, np.ndarray]
    se: dict[str, np.ndarray]

    @property
    def se_defined(self) -> bool:
        return self.n >= 2


def summarize(trajectories: TrajectorySet) -> SummaryTable:
    """Across-replicate mean and standard error (sample sd / sqrt(n)) per step.

    With a single replicate the standard error is reported as 0 and
    ``se_defined`` is false.
    """
    if not trajectories.records:
        raise DomainError("cannot summarize an empty trajectory set")
    steps_by_rep: dict[int, list[int]] = {}
    for r in trajectories.records:
        steps_by_rep.setdefault(r.replicate, []).append(r.step)
    step_lists = {k: sorted(v) for k, v in steps_by_rep.items()}
    reference = next(iter(step_lists.values()))
    for k, steps in step_lists.items():
        if steps != reference:
            raise DomainError(f"ragged trajectories: replicate {k} has {len(steps)} steps, expected {len(reference)}")
    if len(set(reference)) != len(reference):
        raise DomainError("duplicate steps within a replicate")

    n = len(step_lists)
    mean, se = {}, {}
    for name in trajectories.observables:
        data = trajectories.array(name)
        mean[name] = data.mean(axis=0)
        se[name] = data.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(len(reference))
    return SummaryTable(trajectories.step_name, trajectories.observables, np.array(reference), n, mean, se)


def _fmt(x) -> str:
    # repr of a Python float is the shortest round-trip decimal
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x == 0:
        x = 0.0  # no "-0.0"
    return repr(x)


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def trajectories_csv(traj: TrajectorySet) -> str:
    rows = ((r.replicate, r.step, *(r.observables[k] for k in traj.observables)) for r in traj.records)
    return _csv_text(trajectory_columns(traj.scenario), rows)


def summary_csv(scenario: str, table: SummaryTable) -> str:
    def rows():
        for i, step in enumerate(table.steps):
            row = [int(step), table.n]
            for name in table.observables:
                row += [table.mean[name][i], table.se[name][i]]
            yield row + [table.se_defined]

    return _csv_text(summary_columns(scenario), rows())


def policy_csv(traj: TrajectorySet) -> str:
    rows = (
        (k, STATE_NAMES[s], MOVE_NAMES[move])
        for k, policy in sorted(traj.policies.items())
        for s, move in enumerate(policy)
    )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["replicate", "state", "greedy_move"])
    writer.writerows(rows)
    return buf.getvalue()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    config: dict
    seed: int
    version: str = __version__
    started_at: str = ""
    finished_at: str | None = None
    outputs: dict[str, str] = field(default_factory=dict)
    status: str = "running"
    events: list[dict] = field(default_factory=list)

    def to_json(self) -> str:
        data = {
            "config": self.config,
            "seed": self.seed,
            "version": self.version,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "outputs": self.outputs,
            "status": self.status,
            "events": self.events,
        }
        return json.dumps(data, indent=2, sort_keys=False) + "\n"

    def write(self, path: Path):
        path.write_text(self.to_json(), encoding="utf-8", newline="\n")


def _write(path: Path, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def run(cfg: ScenarioConfig, out_dir: str | Path) -> RunManifest:
    """Run a scenario and write its outputs into ``out_dir``.

    The manifest is written before the simulation starts and finalized
    after. If writing fails, any partial data files are removed, the
    removal is recorded in the manifest, and the error is re-raised.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest_path = out / MANIFEST_FILE
    manifest = RunManifest(config=to_dict(cfg), seed=cfg.seed, started_at=_now())
    manifest.write(manifest_path)

    written: list[Path] = []
    try:
        traj = run_scenario(cfg)
        files = {
            "trajectories": (TRAJECTORY_FILE, trajectories_csv(traj)),
            "summary": (SUMMARY_FILE, summary_csv(cfg.scenario, summarize(traj))),
        }
        if cfg.scenario == "cooperation":
            files["policy"] = (POLICY_FILE, policy_csv(traj))
        for key, (name, text) in files.items():
            path = out / name
            _write(path, text)
            written.append(path)
            manifest.outputs[key] = name
        manifest.events = traj.events
    except BaseException as exc:
        removed = []
        for path in written:
            try:
                path.unlink()
                removed.append(path.name)
            except OSError:
                pass
        manifest.status = "failed"
        manifest.outputs = {}
        manifest.events.append({"event": "error", "error": f"{type(exc).__name__}: {exc}", "removed": removed})
        manifest.finished_at = _now()
        try:
            manifest.write(manifest_path)
        except OSError:
            pass
        raise

    manifest.status = "completed"
    manifest.finished_at = _now()
    manifest.write(manifest_path)
    return manifest


def load_manifest(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
