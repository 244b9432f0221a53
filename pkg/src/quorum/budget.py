"""Wall-clock budget allocation for a fixed-deadline contest.

Pure equal division of the remaining solving time over the remaining
problems, hard-capped per problem, with a hard-deadline floor below which
the only move left is to answer 0 immediately. No bonus from saved time,
no inflation: allocations can only shrink when a problem overruns its
share, which is what guarantees every problem gets handled before the
deadline.
"""

from __future__ import annotations

from dataclasses import dataclass

#: Sentinel-free fallback contract: ``allocate`` returns ``None`` when the
#: hard floor is hit and the caller must answer 0 without running attempts.
FALLBACK = None


@dataclass(frozen=True)
class BudgetConfig:
    """Contest time constants, all in seconds."""

    total_limit_s: float = 18000.0
    infra_reserve_s: float = 540.0
    startup_reserve_s: float = 360.0
    base_timeout_s: float = 300.0
    max_timeout_s: float = 900.0
    session_timeout_s: float = 960.0
    hard_deadline_floor_s: float = 30.0

    def __post_init__(self):
        if self.solving_budget_s <= 0:
            raise ValueError("reserves exceed the total limit")
        if not self.base_timeout_s <= self.max_timeout_s <= self.session_timeout_s:
            raise ValueError(
                "timeouts must satisfy base <= max <= session, got "
                f"{self.base_timeout_s} / {self.max_timeout_s} / {self.session_timeout_s}"
            )
        if self.hard_deadline_floor_s < 0:
            raise ValueError("hard deadline floor must be >= 0")

    @property
    def solving_budget_s(self) -> float:
        return self.total_limit_s - self.infra_reserve_s - self.startup_reserve_s

    @classmethod
    def from_mapping(cls, data: dict) -> "BudgetConfig":
        """Build from structured-config keys, ignoring a derived solving budget.

        Accepts the documented keys (total_limit_s, infra_reserve_s,
        startup_reserve_s, base_timeout_s, max_timeout_s, session_timeout_s,
        hard_deadline_floor_s). A ``solving_budget_s`` entry, if present,
        must match the derived value.
        """
        data = dict(data)
        stated = data.pop("solving_budget_s", None)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown budget keys: {sorted(unknown)}")
        config = cls(**{k: float(v) for k, v in data.items()})
        if stated is not None and abs(config.solving_budget_s - float(stated)) > 1e-9:
            raise ValueError(
                f"solving_budget_s={stated} inconsistent with "
                f"total - reserves = {config.solving_budget_s}"
            )
        return config


@dataclass(frozen=True)
class BudgetState:
    """Remaining solving time and problems."""

    time_left_s: float
    problems_remaining: int

    def __post_init__(self):
        if self.time_left_s < 0:
            raise ValueError("time_left_s must be >= 0")
        if self.problems_remaining < 0:
            raise ValueError("problems_remaining must be >= 0")


def initial_state(config: BudgetConfig, n_problems: int) -> BudgetState:
    return BudgetState(config.solving_budget_s, n_problems)


def allocate(state: BudgetState, config: BudgetConfig) -> float | None:
    """Per-problem time share, or ``None`` when only the fallback remains.

    Equal division of what is left, capped at ``max_timeout_s``. Below the
    hard-deadline floor there is no allocation: the caller must emit the
    fallback answer immediately so every remaining problem still gets an
    answer before the hard kill.
    """
    if state.problems_remaining < 1:
        raise ValueError("no problems remaining to allocate for")
    if state.time_left_s < config.hard_deadline_floor_s:
        return FALLBACK
    return min(state.time_left_s / state.problems_remaining, config.max_timeout_s)


def advance(state: BudgetState, elapsed_s: float) -> BudgetState:
    """Consume one problem's elapsed time; time is floored at zero."""
    if elapsed_s < 0:
        raise ValueError(f"elapsed_s must be >= 0, got {elapsed_s}")
    if state.problems_remaining < 1:
        raise ValueError("no problems remaining to advance past")
    return BudgetState(
        time_left_s=max(0.0, state.time_left_s - elapsed_s),
        problems_remaining=state.problems_remaining - 1,
    )
