"""Monte Carlo recovery experiments over a noise-scale sweep."""

from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .assignment import Assignment
from .errors import ConfigError, DimensionMismatch, ModelError
from .mle import DEFAULT_BUDGET, FixedSizes, MleSolver, hat_space, recovered
from .model import ModelSpec, model_from_dict
from .observation import RngSeed, l_phi, objective, observe, sample_noise
from .rng import U64_MAX
from .thresholds import (
    default_h,
    default_h_pair,
    impossibility_margin_check,
    impossibility_margin_hat,
    recovery_report,
)

CSV_HEADER = ("sweep_param", "sweep_value", "trial", "recovered", "margin",
              "f_best", "f_truth", "elapsed_ms")
WILSON_Z = 1.959963984540054

_vertices = {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1}

CONFIG_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["model", "truth", "solver", "trials", "seed"],
    "additionalProperties": False,
    "properties": {
        "model": {
            "type": "object",
            "required": ["n", "k", "signal", "noise"],
            "properties": {
                "n": {"type": "integer", "minimum": 2},
                "k": {"type": "integer", "minimum": 2},
                "c": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "signal": {"type": "object", "required": ["kind"]},
                "noise": {"type": "object", "required": ["kind"]},
            },
        },
        "truth": {
            "oneOf": [
                {"const": "balanced-auto"},
                {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 2},
            ]
        },
        "solver": {"enum": ["hat", "check"]},
        "trials": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": U64_MAX},
        "sweep": {
            "type": "object",
            "required": ["param", "from", "to", "steps"],
            "additionalProperties": False,
            "properties": {
                "param": {"const": "sigma_scale"},
                "from": {"type": "number", "exclusiveMinimum": 0},
                "to": {"type": "number", "exclusiveMinimum": 0},
                "steps": {"type": "integer", "minimum": 1},
                "spacing": {"enum": ["linear", "log"]},
            },
        },
        "epsilon": {"type": "number", "exclusiveMinimum": 0},
        "delta_param": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "c": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "budget": {"type": "integer", "minimum": 1},
        "t_n": {"type": "number", "exclusiveMinimum": 0},
        "h_set": _vertices,
        "h1": _vertices,
        "h2": _vertices,
    },
}


@dataclass(frozen=True)
class Sweep:
    param: str
    start: float
    stop: float
    steps: int
    spacing: str = "linear"

    def values(self) -> list[float]:
        if self.steps == 1:
            return [float(self.start)]
        if self.spacing == "log":
            return [float(v) for v in np.geomspace(self.start, self.stop, self.steps)]
        return [float(v) for v in np.linspace(self.start, self.stop, self.steps)]


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    model: ModelSpec
    truth: Assignment
    solver: str
    trials: int
    seed: int
    sweep: Sweep | None = None
    epsilon: float = 0.1
    delta_param: float = 0.1
    budget: int = DEFAULT_BUDGET
    t_n: float | None = None
    h_set: tuple[int, ...] | None = None
    h1: tuple[int, ...] | None = None
    h2: tuple[int, ...] | None = None
    document: dict | None = None

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        try:
            jsonschema.validate(doc, CONFIG_SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"invalid config at {where}: {exc.message}") from None
        doc = copy.deepcopy(doc)
        model_doc = doc["model"]
        if "c" in doc:
            model_doc["c"] = doc["c"]
        n, k = model_doc["n"], model_doc["k"]
        try:
            if doc["truth"] == "balanced-auto":
                truth = Assignment.balanced(n, k)
            else:
                truth = Assignment(doc["truth"], k)
            if truth.n != n:
                raise ConfigError(f"truth has {truth.n} vertices, model has n={n}")
            model = model_from_dict(model_doc, truth)
        except (ModelError, DimensionMismatch, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid model: {exc}") from None
        sweep = None
        if "sweep" in doc:
            s = doc["sweep"]
            sweep = Sweep(s["param"], s["from"], s["to"], s["steps"], s.get("spacing", "linear"))

        def vertices(key):
            if key not in doc:
                return None
            vs = tuple(doc[key])
            if max(vs) > n:
                raise ConfigError(f"{key} names vertex {max(vs)}, n={n}")
            return vs

        return cls(
            model=model,
            truth=truth,
            solver=doc["solver"],
            trials=doc["trials"],
            seed=doc["seed"],
            sweep=sweep,
            epsilon=doc.get("epsilon", 0.1),
            delta_param=doc.get("delta_param", 0.1),
            budget=doc.get("budget", DEFAULT_BUDGET),
            t_n=doc.get("t_n"),
            h_set=vertices("h_set"),
            h1=vertices("h1"),
            h2=vertices("h2"),
            document=doc,
        )

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        return cls.from_dict(doc)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        doc = dict(self.document or {})
        doc["seed"] = seed
        return ExperimentConfig.from_dict(doc)

    @property
    def config_hash(self) -> str:
        canon = json.dumps(self.document, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    @property
    def sweep_values(self) -> list[float]:
        return [1.0] if self.sweep is None else self.sweep.values()

    def space(self):
        if self.solver == "hat":
            return hat_space(self.model)
        return FixedSizes(self.truth.community_sizes())


@dataclass(frozen=True)
class TrialRecord:
    sweep_param: str
    sweep_value: float
    trial: int
    recovered: bool
    margin: float
    f_best: float
    f_truth: float
    l_phi_best: float
    tie: bool
    elapsed_ms: float | None = None

    def csv_row(self) -> list[str]:
        return [
            self.sweep_param,
            _fmt(self.sweep_value),
            str(self.trial),
            "1" if self.recovered else "0",
            _fmt(self.margin),
            _fmt(self.f_best),
            _fmt(self.f_truth),
            "" if self.elapsed_ms is None else _fmt(self.elapsed_ms),
        ]


def _fmt(v: float) -> str:
    return format(float(v), ".12g")


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    if trials <= 0:
        raise ValueError("need at least one trial")
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return lo, hi


def _threshold_entry(config: ExperimentConfig, model: ModelSpec) -> tuple[dict | None, str | None]:
    try:
        rep = recovery_report(model, config.truth.community_sizes(), config.epsilon,
                              config.delta_param, config.t_n)
    except (ModelError, ValueError) as exc:
        return None, str(exc)
    return rep.to_dict(), None


@dataclass
class RunResult:
    records: list[TrialRecord]
    summary: dict

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in self.records:
            writer.writerow(rec.csv_row())
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.csv_text())


def _one_trial(config: ExperimentConfig, model: ModelSpec, solver: MleSolver,
               value: float, trial: int, timing: bool) -> TrialRecord:
    start = time.perf_counter()
    W = sample_noise(model, RngSeed(config.seed, trial))
    K = observe(model, config.truth, W)
    res = solver.solve(K)
    ok = recovered(res, config.truth, model)
    f_truth = objective(model, K, config.truth)
    elapsed = (time.perf_counter() - start) * 1e3 if timing else None
    return TrialRecord(
        sweep_param="sigma_scale",
        sweep_value=value,
        trial=trial,
        recovered=ok,
        margin=res.margin,
        f_best=res.objective,
        f_truth=f_truth,
        l_phi_best=l_phi(model, res.argmin, config.truth),
        tie=res.tie,
        elapsed_ms=elapsed,
    )


def run(config: ExperimentConfig, threads: int = 1, timing: bool = False) -> RunResult:
    """All trials at every sweep point.

    Trial t draws its noise from stream t of the master seed at every sweep
    point, so points share noise realisations and differ only in scale.
    Output is independent of ``threads``; wall times are recorded only with
    ``timing``, which makes the CSV run-dependent.
    """
    if threads < 1:
        raise ValueError(f"threads must be positive, got {threads}")
    records: list[TrialRecord] = []
    points = []
    for value in config.sweep_values:
        model = config.model.scaled(value)
        solver = MleSolver(model, config.space(), config.budget)
        trials = range(config.trials)
        if threads == 1:
            recs = [_one_trial(config, model, solver, value, t, timing) for t in trials]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                recs = list(pool.map(
                    lambda t: _one_trial(config, model, solver, value, t, timing), trials))
        records.extend(recs)
        hits = sum(r.recovered for r in recs)
        lo, hi = wilson_interval(hits, len(recs))
        report, err = _threshold_entry(config, model)
        point = {
            "value": value,
            "rate": hits / len(recs),
            "ci_low": lo,
            "ci_high": hi,
            "threshold_report": report,
            "trials": len(recs),
            "ties": sum(r.tie for r in recs),
            "mean_l_phi_best": float(np.mean([r.l_phi_best for r in recs])),
        }
        if err is not None:
            point["threshold_error"] = err
        points.append(point)
    summary = {"config_hash": config.config_hash, "points": points}
    return RunResult(records, summary)


def isotonic_violation(rates, trials: int) -> float:
    """Largest rise of a later rate over an earlier one, in pooled standard errors."""
    worst = 0.0
    for i in range(len(rates)):
        for j in range(i + 1, len(rates)):
            rise = rates[j] - rates[i]
            if rise <= 0:
                continue
            p = (rates[i] + rates[j]) / 2
            se = math.sqrt(max(p * (1 - p), 1.0 / trials) * 2 / trials)
            worst = max(worst, rise / se)
    return worst


def report(config: ExperimentConfig) -> dict:
    """Threshold report and impossibility margins at scale 1 and each sweep point."""
    y = config.truth
    h = config.h_set or default_h(config.model, y)
    if config.h1 is not None and config.h2 is not None:
        h1, h2 = config.h1, config.h2
    else:
        h1, h2 = default_h_pair(config.model, y)

    def at(model: ModelSpec) -> dict:
        rep, err = _threshold_entry(config, model)
        entry = {
            "threshold_report": rep,
            "impossibility_hat": impossibility_margin_hat(model, y, h, config.delta_param),
            "impossibility_check": impossibility_margin_check(model, y, h1, h2,
                                                              config.delta_param),
        }
        if err is not None:
            entry["threshold_error"] = err
        return entry

    doc = {"config_hash": config.config_hash, "h_set": list(h), "h1": list(h1), "h2": list(h2)}
    doc.update(at(config.model))
    if config.sweep is not None:
        doc["sweep"] = [dict(value=v, **at(config.model.scaled(v))) for v in config.sweep_values]
    return doc
