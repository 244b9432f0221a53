"""Attempt backends: how the coordinator actually runs an attempt.

The coordinator only ever sees the small handle/backend protocol below, so
the same engine drives both the synthetic voter backend (tests, studies)
and the live HTTP backend. Handles are polled, never joined: cancellation
is cooperative and idempotent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Protocol

from ..rngstreams import attempt_stream, shock_stream
from ..sim.model import Shock, VoterModel, draw_shock, sample_attempt
from ..voting import AttemptResult


@dataclass(frozen=True)
class ContestProblem:
    """One problem as fed to a backend.

    ``payload`` is backend-specific: problem text for the live backend, a
    :class:`VoterModel` for the simulator backend.
    """

    index: int
    problem_id: str
    payload: Any
    answer_key: int | None = None


class AttemptHandle(Protocol):
    def poll(self) -> AttemptResult | None:
        """Result if the attempt has finished, else None."""

    def cancel(self) -> None:
        """Stop the attempt; safe to call repeatedly."""

    def eta(self) -> float | None:
        """Absolute completion time when known (virtual backends only)."""


class AttemptBackend(Protocol):
    def begin_problem(self, problem: ContestProblem, n_attempts: int) -> None:
        """Called once before a problem's attempts start."""

    def start_attempt(
        self,
        problem: ContestProblem,
        strategy: str,
        seed: int,
        deadline: float,
    ) -> AttemptHandle:
        ...


class _SimHandle:
    def __init__(self, result: AttemptResult, started_at: float, clock):
        self._result = result
        self._eta = started_at + result.latency_s
        self._clock = clock
        self._cancelled = False
        self._delivered = False

    def poll(self) -> AttemptResult | None:
        if self._cancelled or self._delivered:
            return None
        if self._clock.now() >= self._eta:
            self._delivered = True
            return self._result
        return None

    def cancel(self) -> None:
        self._cancelled = True

    def eta(self) -> float | None:
        return None if self._cancelled else self._eta


@dataclass
class SimulatorBackend:
    """Synthetic backend: attempts are pre-drawn voter-model samples.

    Draws use the same counter-based streams as the detailed simulator
    (shock stream per problem, one stream per attempt), so a contest run
    through the coordinator is bit-identical to
    :func:`quorum.sim.simulate_contest` for the same seed and config.
    """

    master_seed: int
    clock: Any
    _shocks: dict[int, Shock] = field(default_factory=dict)
    _attempt_counters: dict[int, int] = field(default_factory=dict)

    def begin_problem(self, problem: ContestProblem, n_attempts: int) -> None:
        model = problem.payload
        if not isinstance(model, VoterModel):
            raise TypeError("simulator backend needs VoterModel payloads")
        self._shocks[problem.index] = draw_shock(
            model, n_attempts, shock_stream(self.master_seed, problem.index)
        )
        self._attempt_counters[problem.index] = 0

    def start_attempt(
        self,
        problem: ContestProblem,
        strategy: str,
        seed: int,
        deadline: float,
    ) -> AttemptHandle:
        model = problem.payload
        if problem.index not in self._shocks:
            raise RuntimeError("begin_problem was not called for this problem")
        index = self._attempt_counters[problem.index]
        self._attempt_counters[problem.index] = index + 1
        result = sample_attempt(
            model,
            strategy,
            attempt_stream(self.master_seed, problem.index, index),
            shock=self._shocks[problem.index],
            index=index,
            seed=seed,
        )
        return _SimHandle(result, self.clock.now(), self.clock)
