"""Vectorized Monte Carlo experiments over the contest pipeline.

These paths exist because the detailed per-attempt simulator is too slow
for 10^4-contest studies: here a whole problem column (one problem index
across every contest replicate) is drawn as numpy arrays and resolved by
the batch kernel. Budget arithmetic stays exact per contest because
problems are processed in contest order, vectorized across contests.

Draws come from one counter-based stream per problem column, so results
are deterministic for a fixed seed but deliberately distinct from the
detailed simulator's per-attempt streams; agreement between the two paths
is statistical, not bitwise, and is covered by the oracle tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .. import stats
from .._kernels import resolve_batch
from ..budget import BudgetConfig
from ..rngstreams import NS_BATCH, stream
from ..voting import DEFAULT_QUORUM, DEFAULT_TRIVIAL_MAX
from .model import COMMON_SHOCK, FIXED_COUNT, INDEPENDENT, MixerConfig, VoterModel

_ANSWER_SPACE = 100000


def _entropy_weights(entropy: np.ndarray) -> np.ndarray:
    return 1.0 + 1.0 / (entropy + 0.1)


def _draw_correctness(
    model: VoterModel,
    p_vec: np.ndarray,
    strategy_index: np.ndarray,
    n_strategies: int,
    rows: int,
    rng: np.random.Generator,
    decorrelation: float = 0.0,
) -> np.ndarray:
    """Correctness indicators for a (rows, n) block, one problem column.

    The common-shock mechanism supports a cross-strategy decorrelation
    knob: when the panel-level shock fires, each strategy group follows
    the global latent draw with probability ``1 - decorrelation`` and its
    own group latent otherwise. Within-strategy pairwise correlation stays
    ``rho``; cross-strategy correlation falls to ``rho * (1 - d)^2``.
    """
    n = p_vec.size
    u = rng.random((rows, n))
    if model.mechanism == INDEPENDENT:
        return u < p_vec
    if model.mechanism == COMMON_SHOCK:
        copy_all = rng.random(rows) < model.rho
        latent_global = rng.random(rows)
        if decorrelation > 0.0 and n_strategies > 1:
            follows_global = rng.random((rows, n_strategies)) < (1.0 - decorrelation)
            latent_group = rng.random((rows, n_strategies))
            latents = np.where(follows_global, latent_global[:, None], latent_group)
        else:
            latents = np.broadcast_to(latent_global[:, None], (rows, n_strategies))
        latent_per_attempt = latents[:, strategy_index]
        return np.where(copy_all[:, None], latent_per_attempt < p_vec, u < p_vec)
    if model.mechanism == FIXED_COUNT:
        k = model.correct_per_run or 0
        if k > n:
            raise ValueError(f"correct_per_run={k} exceeds panel size {n}")
        z = rng.random((rows, n))
        ranks = np.argsort(z, axis=1, kind="stable").argsort(axis=1, kind="stable")
        return ranks < k
    raise ValueError(f"unknown mechanism {model.mechanism!r}")


def _draw_block(
    model: VoterModel,
    mixer: MixerConfig,
    rows: int,
    rng: np.random.Generator,
    decorrelation: float = 0.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(correct, answers, weights, latencies) for one problem column."""
    strategies = mixer.expand()
    labels = list(dict.fromkeys(strategies))
    strategy_index = np.array([labels.index(s) for s in strategies])
    p_vec = np.array([model.accuracy(s) for s in strategies])
    n = len(strategies)

    correct = _draw_correctness(
        model, p_vec, strategy_index, len(labels), rows, rng, decorrelation
    )
    distractor_idx = rng.integers(0, model.distractor_scatter, size=(rows, n))
    answers = np.where(
        correct,
        model.true_answer,
        (model.true_answer + 1 + distractor_idx) % _ANSWER_SPACE,
    ).astype(np.int64)

    z_entropy = rng.standard_normal((rows, n))
    median = np.where(correct, model.entropy_correct, model.entropy_wrong)
    entropy = median * np.exp(model.entropy_sigma * z_entropy)
    weights = _entropy_weights(entropy)

    z_latency = rng.standard_normal((rows, n))
    latencies = model.latency.mean_s * np.exp(model.latency.jitter * z_latency)
    return correct, answers, weights, latencies


def mc_contest_scores(
    model: VoterModel,
    mixer: MixerConfig,
    budget_config: BudgetConfig,
    n_contests: int,
    seed: int,
    n_problems: int = 50,
    quorum: int = DEFAULT_QUORUM,
    trivial_max: int = DEFAULT_TRIVIAL_MAX,
    early_stop: bool = True,
    decorrelation: float = 0.0,
) -> np.ndarray:
    """Scores of ``n_contests`` simulated contests (vectorized pipeline)."""
    state = np.full(n_contests, budget_config.solving_budget_s)
    scores = np.zeros(n_contests, dtype=np.int64)
    for p_idx in range(n_problems):
        rng = stream(seed, p_idx, namespace=NS_BATCH)
        _, answers, weights, latencies = _draw_block(
            model, mixer, n_contests, rng, decorrelation
        )
        fallback = state < budget_config.hard_deadline_floor_s
        budgets = np.where(
            fallback,
            0.0,
            np.minimum(state / (n_problems - p_idx), budget_config.max_timeout_s),
        )
        final, elapsed, _, _ = resolve_batch(
            answers, weights, latencies, budgets,
            quorum=quorum, trivial_max=trivial_max, early_stop=early_stop,
        )
        scores += final == model.true_answer
        state = np.maximum(0.0, state - elapsed)
    return scores


@dataclass(frozen=True)
class MixerResult:
    name: str
    mixer: MixerConfig
    mean_score: float
    sigma: float
    std_err: float
    n_contests: int


def mixer_experiment(
    accuracies: dict[str, float],
    decorrelation: float,
    mixers: list[tuple[str, MixerConfig]],
    contests_per_mixer: int,
    seed: int,
    model_template: VoterModel | None = None,
    budget_config: BudgetConfig | None = None,
    n_problems: int = 50,
    early_stop: bool = True,
) -> list[MixerResult]:
    """Monte Carlo score table for a list of mixer configurations.

    Rows come back in the order given. Strategy accuracies are taken as
    external inputs (typically inverted from observed scores via
    :func:`quorum.stats.invert_score_to_p`), not invented here.
    """
    budget_config = budget_config or BudgetConfig()
    base = model_template or VoterModel(accuracy_by_strategy=dict(accuracies))
    model = replace(base, accuracy_by_strategy=dict(accuracies))
    results = []
    for row_index, (name, mixer) in enumerate(mixers):
        scores = mc_contest_scores(
            model,
            mixer,
            budget_config,
            contests_per_mixer,
            seed + row_index,
            n_problems=n_problems,
            early_stop=early_stop,
            decorrelation=decorrelation,
        )
        mean = float(scores.mean())
        sigma = float(scores.std(ddof=1)) if len(scores) > 1 else 0.0
        results.append(
            MixerResult(
                name=name,
                mixer=mixer,
                mean_score=mean,
                sigma=sigma,
                std_err=sigma / math.sqrt(len(scores)) if len(scores) > 1 else 0.0,
                n_contests=contests_per_mixer,
            )
        )
    return results


@dataclass(frozen=True)
class CorrelationExperimentResult:
    pooled_rho: float
    per_run_rho: list[float]
    excluded_runs: int
    p_hat_pooled: float


def correlation_experiment(
    model: VoterModel,
    n_attempts: int,
    runs: int,
    seed: int,
    strategy: str | None = None,
) -> CorrelationExperimentResult:
    """Per-run and pooled correlation estimates over repeated panels.

    Runs with every vote correct or every vote wrong have no defined
    single-run estimate and are excluded from the per-run list; the pooled
    estimator uses all runs.
    """
    if runs < 1:
        raise ValueError("need at least one run")
    strategy = strategy or next(iter(model.accuracy_by_strategy))
    p = model.accuracy(strategy)
    p_vec = np.full(n_attempts, p)
    strategy_index = np.zeros(n_attempts, dtype=np.int64)
    rng = stream(seed, 0, namespace=NS_BATCH)
    correct = _draw_correctness(model, p_vec, strategy_index, 1, runs, rng)
    counts = correct.sum(axis=1)

    per_run = []
    excluded = 0
    for v in counts.tolist():
        if 0 < v < n_attempts:
            per_run.append(stats.mom_rho(n_attempts, v).rho_hat)
        else:
            excluded += 1
    # Degenerate runs only hit the per-run form; the pooled estimator uses
    # them all and raises on its own if the pooled accuracy is 0 or 1.
    pooled = stats.pooled_rho([(n_attempts, int(v)) for v in counts.tolist()])
    p_pool = float(counts.sum()) / (runs * n_attempts)
    return CorrelationExperimentResult(
        pooled_rho=pooled,
        per_run_rho=per_run,
        excluded_runs=excluded,
        p_hat_pooled=p_pool,
    )
