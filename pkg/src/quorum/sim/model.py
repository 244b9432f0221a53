"""Synthetic correlated-voter models.

A :class:`VoterModel` describes how attempts on one problem behave:
per-strategy accuracy, how correctness co-varies across attempts, how
wrong answers scatter over distinct distractor values, and how long
attempts take. Three correlation mechanisms are supported:

* ``independent`` — each attempt is its own Bernoulli(p) draw.
* ``common_shock`` — with probability rho the whole panel copies one
  shared latent draw, otherwise everyone is independent. Pairwise
  correlation of the correctness indicators is exactly rho.
* ``fixed_count`` — exactly ``correct_per_run`` attempts are correct, in
  uniformly random positions. Pairwise correlation is -1/(n-1), the
  mechanism used to generate negatively correlated panels (no Bernoulli
  mixture can reach below zero).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..voting import ANSWER_MAX, AttemptResult, AttemptStatus

INDEPENDENT = "independent"
COMMON_SHOCK = "common_shock"
FIXED_COUNT = "fixed_count"
_MECHANISMS = (INDEPENDENT, COMMON_SHOCK, FIXED_COUNT)

_ANSWER_SPACE = ANSWER_MAX + 1

# Entropy presets: correct attempts read as more confident (lower entropy)
# than wrong ones. Lognormal around these medians; purely cosmetic for the
# weighting path — no acceptance-grade statistic depends on them.
DEFAULT_ENTROPY_CORRECT = 0.3
DEFAULT_ENTROPY_WRONG = 1.2
DEFAULT_ENTROPY_SIGMA = 0.25


@dataclass(frozen=True)
class LatencyModel:
    """Lognormal attempt latency: median ``mean_s``, shape ``jitter``."""

    mean_s: float = 60.0
    jitter: float = 0.2

    def __post_init__(self):
        if self.mean_s <= 0:
            raise ValueError("latency mean must be positive")
        if self.jitter < 0:
            raise ValueError("latency jitter must be >= 0")


@dataclass(frozen=True)
class VoterModel:
    """Parameters of a synthetic voter panel for one problem."""

    accuracy_by_strategy: dict[str, float]
    true_answer: int = 42
    mechanism: str = INDEPENDENT
    rho: float = 0.0
    correct_per_run: int | None = None
    distractor_scatter: int = 5
    latency: LatencyModel = field(default_factory=LatencyModel)
    entropy_correct: float = DEFAULT_ENTROPY_CORRECT
    entropy_wrong: float = DEFAULT_ENTROPY_WRONG
    entropy_sigma: float = DEFAULT_ENTROPY_SIGMA

    def __post_init__(self):
        if not self.accuracy_by_strategy:
            raise ValueError("need at least one strategy accuracy")
        for label, p in self.accuracy_by_strategy.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"accuracy for {label!r} must be in [0, 1], got {p}")
        if not 0 <= self.true_answer <= ANSWER_MAX:
            raise ValueError(f"true_answer outside [0, {ANSWER_MAX}]")
        if self.mechanism not in _MECHANISMS:
            raise ValueError(f"unknown mechanism {self.mechanism!r}")
        if self.mechanism == COMMON_SHOCK and not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"common-shock rho must be in [0, 1], got {self.rho}")
        if self.mechanism == FIXED_COUNT and (
            self.correct_per_run is None or self.correct_per_run < 0
        ):
            raise ValueError("fixed_count mechanism needs correct_per_run >= 0")
        if self.distractor_scatter < 1:
            raise ValueError("distractor_scatter must be >= 1")
        if self.distractor_scatter >= _ANSWER_SPACE:
            raise ValueError("distractor_scatter exceeds the answer space")
        if self.entropy_correct < 0 or self.entropy_wrong < 0 or self.entropy_sigma < 0:
            raise ValueError("entropy presets must be >= 0")

    def accuracy(self, strategy: str) -> float:
        try:
            return self.accuracy_by_strategy[strategy]
        except KeyError:
            raise KeyError(f"unknown strategy label {strategy!r}") from None

    def distractor(self, index: int) -> int:
        """The ``index``-th wrong answer: distinct, never the true answer."""
        return (self.true_answer + 1 + index) % _ANSWER_SPACE

    def with_true_answer(self, answer: int) -> "VoterModel":
        return replace(self, true_answer=answer)


@dataclass(frozen=True)
class MixerConfig:
    """How many attempts each strategy prompt gets."""

    counts_by_strategy: dict[str, int]

    def __post_init__(self):
        if self.n_total < 1:
            raise ValueError("mixer must allocate at least one attempt")
        for label, count in self.counts_by_strategy.items():
            if count < 0:
                raise ValueError(f"negative count for {label!r}")

    @property
    def n_total(self) -> int:
        return sum(self.counts_by_strategy.values())

    def expand(self) -> list[str]:
        """Ordered per-attempt strategy labels (insertion order)."""
        labels: list[str] = []
        for label, count in self.counts_by_strategy.items():
            labels.extend([label] * count)
        return labels


@dataclass(frozen=True)
class Shock:
    """Per-problem latent draw shared by all attempts.

    ``copy_all`` is the common-shock coin: when set, every attempt's
    correctness comes from comparing its own accuracy against the single
    shared uniform ``latent``. ``correct_positions`` carries the
    fixed-count mechanism's hypergeometric assignment.
    """

    copy_all: bool = False
    latent: float = 0.0
    correct_positions: frozenset[int] | None = None


def draw_shock(model: VoterModel, n_attempts: int, rng: np.random.Generator) -> Shock:
    """Draw the problem-level latent state for ``n_attempts`` voters."""
    if model.mechanism == COMMON_SHOCK:
        copy_all = bool(rng.random() < model.rho)
        return Shock(copy_all=copy_all, latent=float(rng.random()))
    if model.mechanism == FIXED_COUNT:
        k = model.correct_per_run or 0
        if k > n_attempts:
            raise ValueError(
                f"correct_per_run={k} exceeds panel size {n_attempts}"
            )
        positions = rng.permutation(n_attempts)[:k]
        return Shock(correct_positions=frozenset(int(i) for i in positions))
    return Shock()


def sample_attempt(
    model: VoterModel,
    strategy: str,
    rng: np.random.Generator,
    shock: Shock | None = None,
    index: int = 0,
    seed: int = 0,
) -> AttemptResult:
    """Draw one as-if-completed attempt.

    The stream is consumed in a fixed order (correctness uniform,
    distractor pick, entropy normal, latency normal) regardless of the
    outcome, so attempt draws stay aligned across configurations sharing
    a seed. Budget and cancellation are applied later by the contest
    resolution step.
    """
    p = model.accuracy(strategy)
    shock = shock or Shock()
    u = float(rng.random())
    if shock.correct_positions is not None:
        correct = index in shock.correct_positions
    elif shock.copy_all:
        correct = shock.latent < p
    else:
        correct = u < p

    distractor_index = int(rng.integers(model.distractor_scatter))
    answer = model.true_answer if correct else model.distractor(distractor_index)

    entropy_median = model.entropy_correct if correct else model.entropy_wrong
    z_entropy = float(rng.standard_normal())
    entropy = entropy_median * math.exp(model.entropy_sigma * z_entropy)

    z_latency = float(rng.standard_normal())
    latency = model.latency.mean_s * math.exp(model.latency.jitter * z_latency)

    return AttemptResult(
        answer=answer,
        entropy=entropy,
        status=AttemptStatus.COMPLETED,
        latency_s=latency,
        strategy=strategy,
        seed=seed,
    )
