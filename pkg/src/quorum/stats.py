"""Closed-form voting statistics.

Everything in here is a pure function of its arguments: effective sample
size under pairwise-correlated votes, the method-of-moments correlation
estimator for exchangeable binary votes, the exact binomial majority-score
model and its inversion, normal-tail "submission lottery" probabilities,
and run-distribution summaries. No simulation, no I/O.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field


class UndefinedEstimateError(ValueError):
    """Raised when an estimator is undefined for the given vote counts."""


def effective_sample_size(n: int, rho: float) -> float:
    """Number of independent votes equivalent to ``n`` correlated ones.

    ``n / (1 + (n - 1) * rho)`` where ``rho`` is the mean pairwise
    correlation of the vote indicators. The denominator must be strictly
    positive: ``rho`` below ``-1/(n-1)`` is outside the feasible region
    for an exchangeable binary sequence.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if rho > 1.0:
        raise ValueError(f"rho must be <= 1, got {rho}")
    denom = 1.0 + (n - 1) * rho
    if denom <= 0.0:
        raise ValueError(
            f"1 + (n-1)*rho must be positive, got {denom} (n={n}, rho={rho})"
        )
    return n / denom


@dataclass(frozen=True)
class CorrelationEstimate:
    """Method-of-moments pairwise-correlation estimate from one run."""

    n_attempts: int
    correct_votes: int
    rho_hat: float
    p_hat: float


def mom_rho(n: int, correct_votes: int) -> CorrelationEstimate:
    """Estimate pairwise vote correlation from a single run of ``n`` votes.

    With ``v`` correct votes out of ``n`` and ``p = v/n``::

        rho_hat = (v(v-1) / [n(n-1)] - p^2) / (p (1 - p))

    Runs with ``v in {0, n}`` have ``p (1-p) = 0`` and are undefined;
    callers are expected to exclude them. Note the single-run estimate
    algebraically reduces to ``-1/(n-1)`` for every defined ``v`` — use
    :func:`pooled_rho` across repeated runs for an informative estimate.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if not 0 < correct_votes < n:
        raise UndefinedEstimateError(
            f"correlation estimate undefined for correct_votes={correct_votes} of n={n}"
        )
    v = correct_votes
    p = v / n
    rho = (v * (v - 1) / (n * (n - 1)) - p * p) / (p * (1.0 - p))
    return CorrelationEstimate(n_attempts=n, correct_votes=v, rho_hat=rho, p_hat=p)


def pooled_rho(runs: list[tuple[int, int]]) -> float:
    """Pooled pairwise-correlation estimate over repeated same-``n`` runs.

    ``runs`` is a list of ``(n, correct_votes)`` pairs sharing one ``n``.
    Pools the accuracy estimate across runs (``p = sum(v) / sum(n)``) and
    averages the per-run pair statistic, which keeps the estimator
    informative where the single-run form degenerates. Runs with
    ``v in {0, n}`` contribute normally; only a degenerate pooled ``p``
    is an error.
    """
    if not runs:
        raise ValueError("pooled_rho requires at least one run")
    ns = {n for n, _ in runs}
    if len(ns) != 1:
        raise ValueError(f"pooled_rho requires a single n, got {sorted(ns)}")
    (n,) = ns
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    total = sum(v for _, v in runs)
    for _, v in runs:
        if not 0 <= v <= n:
            raise ValueError(f"correct_votes={v} outside [0, {n}]")
    p = total / (len(runs) * n)
    if p <= 0.0 or p >= 1.0:
        raise UndefinedEstimateError(f"pooled p_hat={p} is degenerate")
    pair_mean = math.fsum(v * (v - 1) / (n * (n - 1)) for _, v in runs) / len(runs)
    return (pair_mean - p * p) / (p * (1.0 - p))


def majority_threshold(n: int) -> int:
    """Smallest strict-majority vote count for ``n`` attempts."""
    return n // 2 + 1


@dataclass(frozen=True)
class ScoreModel:
    """Binomial model of a majority-vote contest score.

    A problem is scored correct when at least ``threshold`` of ``n``
    attempts are correct, each attempt independently correct with
    probability ``p``; the contest has ``n_problems`` problems.
    ``threshold`` defaults to the strict majority ``n // 2 + 1``.
    """

    p: float
    n: int
    threshold: int = field(default=-1)
    n_problems: int = 50

    def __post_init__(self):
        if self.threshold == -1:
            object.__setattr__(self, "threshold", majority_threshold(self.n))
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be in [0, 1], got {self.p}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 1 <= self.threshold <= self.n:
            raise ValueError(
                f"threshold must be in [1, {self.n}], got {self.threshold}"
            )
        if self.n_problems < 0:
            raise ValueError(f"n_problems must be >= 0, got {self.n_problems}")

    def expected_score(self) -> float:
        return self.n_problems * majority_success_probability(self)


def majority_success_probability(model: ScoreModel) -> float:
    """Exact upper binomial tail ``P(X >= threshold)``, ``X ~ Bin(n, p)``.

    Summed term by term with log-space binomial coefficients so the result
    stays exact to double precision for ``n`` up to about 1024; no normal
    approximation.
    """
    p, n, thr = model.p, model.n, model.threshold
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0
    logp = math.log(p)
    logq = math.log1p(-p)
    # log C(n, k) accumulated incrementally: C(n, k+1) = C(n, k) * (n-k)/(k+1)
    logc = 0.0
    terms = []
    for k in range(n + 1):
        if k >= thr:
            terms.append(math.exp(logc + k * logp + (n - k) * logq))
        logc += math.log(n - k) - math.log(k + 1) if k < n else 0.0
    return min(1.0, math.fsum(terms))


def invert_score_to_p(
    expected_score: float, n: int, threshold: int, n_problems: int = 50
) -> float:
    """Per-attempt accuracy implied by an expected contest score.

    Solves ``n_problems * P(X >= threshold) = expected_score`` for ``p``
    by bisection to absolute tolerance 1e-9. The binomial tail is strictly
    monotone in ``p``, so the root is unique.
    """
    if not 0.0 <= expected_score <= n_problems:
        raise ValueError(
            f"expected_score must be in [0, {n_problems}], got {expected_score}"
        )
    target = expected_score / n_problems
    if target == 0.0:
        return 0.0
    if target == 1.0:
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-9:
        mid = (lo + hi) / 2.0
        tail = majority_success_probability(ScoreModel(mid, n, threshold, n_problems))
        if tail < target:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def lottery_single(mu: float, sigma: float, target: float) -> float:
    """Upper tail of Normal(mu, sigma) at ``target``: one submission's odds.

    No continuity correction is applied.
    """
    if sigma <= 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    z = (target - mu) / (sigma * math.sqrt(2.0))
    return 0.5 * math.erfc(z)


def lottery_max_over_k(p_single: float, k: int) -> float:
    """Probability the best of ``k`` independent submissions clears the target."""
    if not 0.0 <= p_single <= 1.0:
        raise ValueError(f"p_single must be in [0, 1], got {p_single}")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    return 1.0 - (1.0 - p_single) ** k


@dataclass(frozen=True)
class RunDistribution:
    """Summary of a set of contest scores (sample sd, n-1 denominator)."""

    scores: tuple[int, ...]
    mu: float
    sigma: float
    min: int
    max: int


def summarize_runs(scores: list[int]) -> RunDistribution:
    """Sample mean / sd / min / max of at least two contest scores."""
    if len(scores) < 2:
        raise ValueError(f"need at least 2 scores, got {len(scores)}")
    return RunDistribution(
        scores=tuple(scores),
        mu=statistics.mean(scores),
        sigma=statistics.stdev(scores),
        min=min(scores),
        max=max(scores),
    )
