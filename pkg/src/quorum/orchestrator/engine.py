"""Contest coordinator: budget -> parallel attempts -> early stop -> vote.

One problem at a time: allocate a time share, start every attempt with its
own seed and strategy prompt, poll completions, check the quorum after
each one, cancel the rest when it fires or when the deadline lands, then
run the weighted vote over whatever completed. Attempt failures degrade to
the fallback answer; nothing a backend does can abort the contest.

The loop is event-driven when handles expose completion times (virtual
time, simulator backend) and falls back to fixed-interval polling for live
backends. Event processing order is latency-then-index, identical to the
detailed simulator, which is what makes the two paths bit-compatible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .. import budget as budget_mod
from ..budget import BudgetConfig
from ..clock import SystemClock
from ..runlog import RunLogWriter
from ..sim.contest import (
    DEFAULT_ATTEMPT_SEED_BASE,
    ProblemOutcome,
    ProblemRecord,
    RunRecord,
    contest_config_snapshot,
)
from ..sim.model import MixerConfig, VoterModel
from ..voting import (
    DEFAULT_QUORUM,
    DEFAULT_TRIVIAL_MAX,
    AttemptResult,
    AttemptStatus,
    VoteTally,
    early_stop_check,
    select_final,
    tally,
)
from .backend import AttemptBackend, AttemptHandle, ContestProblem

DEFAULT_POLL_INTERVAL_S = 0.1


@dataclass(frozen=True)
class ContestConfig:
    mixer: MixerConfig
    budget: BudgetConfig = field(default_factory=BudgetConfig)
    n_problems: int = 50
    quorum: int = DEFAULT_QUORUM
    trivial_max: int = DEFAULT_TRIVIAL_MAX
    early_stop: bool = True
    attempt_seed_base: int = DEFAULT_ATTEMPT_SEED_BASE
    seed: int = DEFAULT_ATTEMPT_SEED_BASE
    poll_interval_s: float = DEFAULT_POLL_INTERVAL_S
    label: str = "live"

    def snapshot(self) -> dict:
        return contest_config_snapshot(
            mixer=self.mixer,
            budget_config=self.budget,
            n_problems=self.n_problems,
            quorum=self.quorum,
            trivial_max=self.trivial_max,
            early_stop=self.early_stop,
            attempt_seed_base=self.attempt_seed_base,
            label=self.label,
        )


def _placeholder(status: AttemptStatus, latency: float, strategy: str, seed: int) -> AttemptResult:
    return AttemptResult(
        answer=None,
        entropy=None,
        status=status,
        latency_s=latency,
        strategy=strategy,
        seed=seed,
    )


def solve_problem(
    problem: ContestProblem,
    mixer: MixerConfig,
    budget_s: float,
    backend: AttemptBackend,
    clock,
    quorum: int = DEFAULT_QUORUM,
    trivial_max: int = DEFAULT_TRIVIAL_MAX,
    early_stop: bool = True,
    attempt_seed_base: int = DEFAULT_ATTEMPT_SEED_BASE,
    poll_interval_s: float = DEFAULT_POLL_INTERVAL_S,
) -> ProblemOutcome:
    """Run one problem's attempts concurrently and vote on the completions."""
    if budget_s <= 0:
        return ProblemOutcome([], VoteTally(), 0, 0.0, False)

    start = clock.now()
    deadline = start + budget_s
    strategies = mixer.expand()
    n = len(strategies)
    results: dict[int, AttemptResult] = {}
    pending: dict[int, AttemptHandle] = {}

    try:
        backend.begin_problem(problem, n)
    except Exception:
        # dead backend: every attempt fails, the vote falls back to 0
        ordered = [
            _placeholder(AttemptStatus.FAILED, 0.0, s, attempt_seed_base + i)
            for i, s in enumerate(strategies)
        ]
        return ProblemOutcome(ordered, tally(ordered), 0, 0.0, False)

    for i, strategy in enumerate(strategies):
        seed = attempt_seed_base + i
        try:
            pending[i] = backend.start_attempt(problem, strategy, seed, deadline)
        except Exception:
            results[i] = _placeholder(AttemptStatus.FAILED, 0.0, strategy, seed)

    completed: list[AttemptResult] = []
    stopped = False
    stop_latency = 0.0

    while pending:
        ready: list[tuple[int, AttemptResult]] = []
        for i in sorted(pending):
            result = pending[i].poll()
            if result is not None:
                ready.append((i, result))
        # mirror the simulator's event order: latency, then attempt index
        ready.sort(key=lambda item: (item[1].latency_s, item[0]))

        for i, result in ready:
            pending.pop(i)
            if stopped:
                # quorum fired earlier in this batch; this one was cancelled
                # at the stop instant even though its result was in flight
                results[i] = _placeholder(
                    AttemptStatus.CANCELLED, stop_latency,
                    strategies[i], attempt_seed_base + i,
                )
                continue
            results[i] = result
            if result.status is AttemptStatus.COMPLETED:
                completed.append(result)
                if early_stop and early_stop_check(completed, quorum, trivial_max) is not None:
                    stopped = True
                    stop_latency = result.latency_s

        if stopped:
            for i, handle in pending.items():
                handle.cancel()
                results[i] = _placeholder(
                    AttemptStatus.CANCELLED, stop_latency,
                    strategies[i], attempt_seed_base + i,
                )
            pending.clear()
            break
        if not pending:
            break

        now = clock.now()
        if now >= deadline:
            for i, handle in pending.items():
                handle.cancel()
                results[i] = _placeholder(
                    AttemptStatus.TIMED_OUT, budget_s,
                    strategies[i], attempt_seed_base + i,
                )
            pending.clear()
            break

        etas = [handle.eta() for handle in pending.values()]
        if all(eta is not None for eta in etas):
            clock.wait_until(min(min(etas), deadline))
        else:
            clock.wait_until(min(now + poll_interval_s, deadline))

    ordered = [results[i] for i in range(n)]
    votes = tally(ordered)
    if stopped:
        elapsed = stop_latency
    elif any(r.status is AttemptStatus.TIMED_OUT for r in ordered):
        elapsed = budget_s
    else:
        # failed attempts still burned real time (live mode); the simulator
        # backend never fails, so this stays aligned with the detailed path
        elapsed = max(
            (
                r.latency_s
                for r in ordered
                if r.status in (AttemptStatus.COMPLETED, AttemptStatus.FAILED)
            ),
            default=0.0,
        )
    return ProblemOutcome(ordered, votes, select_final(votes), elapsed, stopped)


def run_contest(
    problems: Iterable[ContestProblem],
    config: ContestConfig,
    backend: AttemptBackend,
    clock=None,
    log_path: str | Path | None = None,
) -> RunRecord:
    """Drive a full contest, appending one log line per problem as it ends."""
    clock = clock or SystemClock()
    snapshot = config.snapshot()
    writer = RunLogWriter(log_path, snapshot, config.seed) if log_path else None

    state = budget_mod.initial_state(config.budget, config.n_problems)
    records: list[ProblemRecord] = []
    try:
        for problem in problems:
            if state.problems_remaining == 0:
                break
            allocation = budget_mod.allocate(state, config.budget)
            if allocation is None:
                outcome = ProblemOutcome([], VoteTally(), 0, 0.0, False)
            else:
                try:
                    outcome = solve_problem(
                        problem,
                        config.mixer,
                        allocation,
                        backend,
                        clock,
                        quorum=config.quorum,
                        trivial_max=config.trivial_max,
                        early_stop=config.early_stop,
                        attempt_seed_base=config.attempt_seed_base,
                        poll_interval_s=config.poll_interval_s,
                    )
                except Exception:
                    # the contest must continue no matter what blew up
                    outcome = ProblemOutcome([], VoteTally(), 0, 0.0, False)
            record = ProblemRecord(
                problem_id=problem.problem_id,
                allocation_s=allocation,
                elapsed_s=outcome.elapsed_s,
                attempts=outcome.attempts,
                votes=outcome.votes,
                final=outcome.final,
                early_stopped=outcome.early_stopped,
                answer_key=problem.answer_key,
            )
            records.append(record)
            if writer:
                writer.write_problem(record)
            state = budget_mod.advance(state, outcome.elapsed_s)
    finally:
        run = RunRecord(seed=config.seed, config=snapshot, problems=records)
        if writer:
            writer.close(run.score, run.total_elapsed_s)
    return run


def sim_problems(models: list[VoterModel]) -> Iterator[ContestProblem]:
    """Wrap voter models as contest problems for the simulator backend."""
    for index, model in enumerate(models):
        yield ContestProblem(
            index=index,
            problem_id=str(index),
            payload=model,
            answer_key=model.true_answer,
        )
