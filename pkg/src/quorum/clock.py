"""Injectable monotonic clock: real for live runs, virtual for simulation.

The virtual clock makes budget and deadline behavior exactly testable:
``wait_until`` jumps straight to the target instant, so simulated contests
run in microseconds of wall time and event ordering is reproducible.
"""

from __future__ import annotations

import time


class SystemClock:
    """Monotonic wall clock."""

    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)

    def wait_until(self, t: float) -> None:
        self.sleep(t - self.now())


class VirtualClock:
    """Deterministic clock that advances only when told to."""

    def __init__(self, start: float = 0.0):
        self._now = float(start)

    def now(self) -> float:
        return self._now

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            self._now += seconds

    def wait_until(self, t: float) -> None:
        # Absolute jump: avoids drift from accumulating float increments.
        if t > self._now:
            self._now = t
