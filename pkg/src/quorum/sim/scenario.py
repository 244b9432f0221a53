"""Scenario files: everything one simulation run needs, in YAML.

A scenario names the voter panel (accuracies, correlation mechanism,
scatter, entropy presets, latencies), the mixer, the budget overrides and
the replication plan. Parse errors surface YAML line numbers; semantic
errors name the offending key.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..budget import BudgetConfig
from ..voting import DEFAULT_QUORUM, DEFAULT_TRIVIAL_MAX
from .model import (
    COMMON_SHOCK,
    FIXED_COUNT,
    INDEPENDENT,
    LatencyModel,
    MixerConfig,
    VoterModel,
)


class ScenarioError(ValueError):
    """Scenario file failed to parse or validate."""


@dataclass(frozen=True)
class Scenario:
    name: str
    model: VoterModel
    mixer: MixerConfig
    budget: BudgetConfig = field(default_factory=BudgetConfig)
    n_problems: int = 50
    replications: int = 100
    seed: int = 42
    early_stop: bool = True
    quorum: int = DEFAULT_QUORUM
    trivial_max: int = DEFAULT_TRIVIAL_MAX

    def config_label(self) -> str:
        return self.name


_KNOWN_KEYS = {
    "name", "accuracy", "mixer", "true_answer", "correlation",
    "distractor_scatter", "entropy", "latency", "budget", "problems",
    "replications", "seed", "early_stop", "quorum", "trivial_max",
}


def _require(data: dict, key: str, path: Path):
    if key not in data:
        raise ScenarioError(f"{path}: missing required key {key!r}")
    return data[key]


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        # yaml errors carry mark.line; surface it for the diagnostic
        raise ScenarioError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: scenario must be a mapping")
    unknown = set(data) - _KNOWN_KEYS
    if unknown:
        raise ScenarioError(f"{path}: unknown keys {sorted(unknown)}")

    accuracy = _require(data, "accuracy", path)
    mixer_counts = _require(data, "mixer", path)
    if not isinstance(accuracy, dict) or not isinstance(mixer_counts, dict):
        raise ScenarioError(f"{path}: 'accuracy' and 'mixer' must be mappings")

    correlation = data.get("correlation") or {}
    mechanism = correlation.get("mechanism", INDEPENDENT)
    if mechanism not in (INDEPENDENT, COMMON_SHOCK, FIXED_COUNT):
        raise ScenarioError(f"{path}: unknown correlation.mechanism {mechanism!r}")

    entropy = data.get("entropy") or {}
    latency = data.get("latency") or {}
    try:
        model = VoterModel(
            accuracy_by_strategy={str(k): float(v) for k, v in accuracy.items()},
            true_answer=int(data.get("true_answer", 42)),
            mechanism=mechanism,
            rho=float(correlation.get("rho", 0.0)),
            correct_per_run=correlation.get("correct_per_run"),
            distractor_scatter=int(data.get("distractor_scatter", 5)),
            latency=LatencyModel(
                mean_s=float(latency.get("mean_s", 60.0)),
                jitter=float(latency.get("jitter", 0.2)),
            ),
            entropy_correct=float(entropy.get("correct", 0.3)),
            entropy_wrong=float(entropy.get("wrong", 1.2)),
            entropy_sigma=float(entropy.get("sigma", 0.25)),
        )
        mixer = MixerConfig({str(k): int(v) for k, v in mixer_counts.items()})
        budget = BudgetConfig.from_mapping(data.get("budget") or {})
        scenario = Scenario(
            name=str(data.get("name", path.stem)),
            model=model,
            mixer=mixer,
            budget=budget,
            n_problems=int(data.get("problems", 50)),
            replications=int(data.get("replications", 100)),
            seed=int(data.get("seed", 42)),
            early_stop=bool(data.get("early_stop", True)),
            quorum=int(data.get("quorum", DEFAULT_QUORUM)),
            trivial_max=int(data.get("trivial_max", DEFAULT_TRIVIAL_MAX)),
        )
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{path}: {exc}") from exc
    for label in scenario.mixer.counts_by_strategy:
        if label not in scenario.model.accuracy_by_strategy:
            raise ScenarioError(
                f"{path}: mixer strategy {label!r} has no accuracy entry"
            )
    if scenario.n_problems < 0 or scenario.replications < 1:
        raise ScenarioError(f"{path}: bad problems/replications")
    return scenario
