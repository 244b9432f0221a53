"""Detailed contest simulation in virtual time.

One simulated problem draws its full voter panel up front (every attempt's
answer, entropy, latency), then resolves what actually happens under the
time budget: attempts complete in latency order, early stopping may cancel
the stragglers, attempts slower than the budget time out, and the weighted
vote runs over whatever completed. A contest chains 50 problems through
the budget allocator.

Every random draw comes from a counter-based stream keyed by
(seed, problem index, attempt index), so records are bit-identical across
hosts and schedules for a fixed seed and config.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .. import budget as budget_mod
from ..budget import BudgetConfig, BudgetState
from ..rngstreams import attempt_stream, shock_stream
from ..voting import (
    DEFAULT_QUORUM,
    DEFAULT_TRIVIAL_MAX,
    FALLBACK_ANSWER,
    AttemptResult,
    AttemptStatus,
    VoteTally,
    early_stop_check,
    select_final,
    tally,
)
from .model import MixerConfig, VoterModel, draw_shock, sample_attempt

DEFAULT_ATTEMPT_SEED_BASE = 42
DEFAULT_PROBLEM_COUNT = 50


@dataclass(frozen=True)
class ProblemOutcome:
    attempts: list[AttemptResult]
    votes: VoteTally
    final: int
    elapsed_s: float
    early_stopped: bool


@dataclass(frozen=True)
class ProblemRecord:
    problem_id: str
    allocation_s: float | None
    elapsed_s: float
    attempts: list[AttemptResult]
    votes: VoteTally
    final: int
    early_stopped: bool
    answer_key: int | None = None

    @property
    def correct(self) -> bool | None:
        if self.answer_key is None:
            return None
        return self.final == self.answer_key


@dataclass(frozen=True)
class RunRecord:
    """Full log of one contest run."""

    seed: int
    config: dict
    problems: list[ProblemRecord] = field(default_factory=list)

    @property
    def score(self) -> int | None:
        flags = [p.correct for p in self.problems]
        if any(f is None for f in flags):
            return None
        return sum(bool(f) for f in flags)

    @property
    def total_elapsed_s(self) -> float:
        return sum(p.elapsed_s for p in self.problems)

    @property
    def config_hash(self) -> str:
        return config_hash(self.config)


def config_hash(config: dict) -> str:
    import hashlib

    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def resolve_attempts(
    raw: list[AttemptResult],
    budget_s: float,
    quorum: int = DEFAULT_QUORUM,
    trivial_max: int = DEFAULT_TRIVIAL_MAX,
    early_stop: bool = True,
) -> ProblemOutcome:
    """Apply budget, completion order and early stopping to a drawn panel.

    ``raw`` holds as-if-completed attempts. Completion order is latency
    ascending with ties broken by index. Attempts slower than the budget
    time out; once a quorum fires, everything still pending is cancelled
    at the stop instant. The weighted vote only sees completed attempts.
    """
    n = len(raw)
    order = sorted(range(n), key=lambda i: (raw[i].latency_s, i))
    resolved: list[AttemptResult | None] = [None] * n
    completed: list[AttemptResult] = []
    stopped = False
    stop_time = 0.0
    timed_out_any = False

    position = 0
    while position < n:
        i = order[position]
        attempt = raw[i]
        if attempt.latency_s > budget_s:
            timed_out_any = True
            break
        resolved[i] = attempt
        completed.append(attempt)
        position += 1
        if early_stop and early_stop_check(completed, quorum, trivial_max) is not None:
            stopped = True
            stop_time = attempt.latency_s
            break

    # Whatever never finished: cancelled by the quorum, or timed out at the
    # budget boundary. Their recorded latency is the instant they stopped.
    for j in range(position, n):
        i = order[j]
        if stopped:
            status, cut = AttemptStatus.CANCELLED, stop_time
        else:
            status, cut = AttemptStatus.TIMED_OUT, budget_s
        resolved[i] = AttemptResult(
            answer=None,
            entropy=None,
            status=status,
            latency_s=cut,
            strategy=raw[i].strategy,
            seed=raw[i].seed,
        )

    final_attempts = [a for a in resolved if a is not None]
    votes = tally(final_attempts)
    if stopped:
        elapsed = stop_time
    elif timed_out_any or len(completed) < n:
        elapsed = budget_s
    else:
        elapsed = completed[-1].latency_s if completed else budget_s
    return ProblemOutcome(
        attempts=final_attempts,
        votes=votes,
        final=select_final(votes),
        elapsed_s=elapsed,
        early_stopped=stopped,
    )


def simulate_problem(
    model: VoterModel,
    mixer: MixerConfig,
    budget_s: float,
    seed: int,
    problem_index: int,
    quorum: int = DEFAULT_QUORUM,
    trivial_max: int = DEFAULT_TRIVIAL_MAX,
    early_stop: bool = True,
    attempt_seed_base: int = DEFAULT_ATTEMPT_SEED_BASE,
) -> ProblemOutcome:
    """Simulate one problem's panel under a time budget."""
    if budget_s <= 0:
        return ProblemOutcome(
            attempts=[],
            votes=VoteTally(),
            final=FALLBACK_ANSWER,
            elapsed_s=0.0,
            early_stopped=False,
        )
    raw = draw_panel(model, mixer, seed, problem_index, attempt_seed_base)
    return resolve_attempts(raw, budget_s, quorum, trivial_max, early_stop)


def draw_panel(
    model: VoterModel,
    mixer: MixerConfig,
    seed: int,
    problem_index: int,
    attempt_seed_base: int = DEFAULT_ATTEMPT_SEED_BASE,
) -> list[AttemptResult]:
    """Draw the as-if-completed attempts for one problem."""
    strategies = mixer.expand()
    shock = draw_shock(model, len(strategies), shock_stream(seed, problem_index))
    return [
        sample_attempt(
            model,
            strategy,
            attempt_stream(seed, problem_index, i),
            shock=shock,
            index=i,
            seed=attempt_seed_base + i,
        )
        for i, strategy in enumerate(strategies)
    ]


def simulate_contest(
    models: VoterModel | list[VoterModel],
    mixer: MixerConfig,
    budget_config: BudgetConfig,
    seed: int,
    n_problems: int = DEFAULT_PROBLEM_COUNT,
    quorum: int = DEFAULT_QUORUM,
    trivial_max: int = DEFAULT_TRIVIAL_MAX,
    early_stop: bool = True,
    attempt_seed_base: int = DEFAULT_ATTEMPT_SEED_BASE,
    config_label: str = "sim",
) -> RunRecord:
    """Run a full contest: allocate, simulate, advance, repeat.

    ``models`` may be a single panel model (reused for every problem) or a
    per-problem list, in which case ``n_problems`` must match its length.
    """
    if isinstance(models, VoterModel):
        models = [models] * n_problems
    elif len(models) != n_problems:
        raise ValueError(
            f"got {len(models)} models for {n_problems} problems"
        )

    config = contest_config_snapshot(
        mixer=mixer,
        budget_config=budget_config,
        n_problems=n_problems,
        quorum=quorum,
        trivial_max=trivial_max,
        early_stop=early_stop,
        attempt_seed_base=attempt_seed_base,
        label=config_label,
    )

    state = budget_mod.initial_state(budget_config, n_problems)
    problems: list[ProblemRecord] = []
    for index, model in enumerate(models):
        allocation = budget_mod.allocate(state, budget_config)
        if allocation is None:
            outcome = ProblemOutcome(
                attempts=[],
                votes=VoteTally(),
                final=FALLBACK_ANSWER,
                elapsed_s=0.0,
                early_stopped=False,
            )
        else:
            outcome = simulate_problem(
                model,
                mixer,
                allocation,
                seed,
                index,
                quorum=quorum,
                trivial_max=trivial_max,
                early_stop=early_stop,
                attempt_seed_base=attempt_seed_base,
            )
        problems.append(
            ProblemRecord(
                problem_id=str(index),
                allocation_s=allocation,
                elapsed_s=outcome.elapsed_s,
                attempts=outcome.attempts,
                votes=outcome.votes,
                final=outcome.final,
                early_stopped=outcome.early_stopped,
                answer_key=model.true_answer,
            )
        )
        state = budget_mod.advance(state, outcome.elapsed_s)
    return RunRecord(seed=seed, config=config, problems=problems)


def contest_config_snapshot(
    mixer: MixerConfig,
    budget_config: BudgetConfig,
    n_problems: int,
    quorum: int,
    trivial_max: int,
    early_stop: bool,
    attempt_seed_base: int,
    label: str,
) -> dict:
    return {
        "label": label,
        "n_problems": n_problems,
        "mixer": dict(mixer.counts_by_strategy),
        "quorum": quorum,
        "trivial_max": trivial_max,
        "early_stop": early_stop,
        "attempt_seed_base": attempt_seed_base,
        "budget": {
            "total_limit_s": budget_config.total_limit_s,
            "infra_reserve_s": budget_config.infra_reserve_s,
            "startup_reserve_s": budget_config.startup_reserve_s,
            "base_timeout_s": budget_config.base_timeout_s,
            "max_timeout_s": budget_config.max_timeout_s,
            "session_timeout_s": budget_config.session_timeout_s,
            "hard_deadline_floor_s": budget_config.hard_deadline_floor_s,
        },
    }
