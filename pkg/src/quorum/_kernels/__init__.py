"""Batch contest-resolution kernel, compiled when possible.

The inner loop of every Monte Carlo experiment is "resolve one problem":
order attempts by latency, apply the budget cutoff, stop early on quorum,
then pick the weighted-vote winner. The compiled Cython kernel and the
pure-Python reference implement the same contract over the same pre-drawn
arrays; which one backs :func:`resolve_batch` is decided at import time.

Set ``QUORUM_PURE_PYTHON=1`` to force the fallback (used by the benchmark
and the equivalence tests).
"""

from __future__ import annotations

import os

import numpy as np

from . import pyref

try:
    from . import _core  # type: ignore[attr-defined]
except ImportError:  # not compiled in this environment
    _core = None

if os.environ.get("QUORUM_PURE_PYTHON") == "1" or _core is None:
    _impl = pyref
    BACKEND = "python"
else:
    _impl = _core
    BACKEND = "compiled"

MAX_ATTEMPTS = 512


def resolve_batch(
    answers: np.ndarray,
    weights: np.ndarray,
    latencies: np.ndarray,
    budgets: np.ndarray,
    quorum: int = 4,
    trivial_max: int = 1,
    early_stop: bool = True,
    impl=None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Resolve a batch of problems, one row per problem.

    ``answers``/``weights``/``latencies`` are (rows, n) arrays of the
    as-if-completed attempts; ``budgets`` is the per-row time budget.
    Returns ``(final, elapsed, early_stopped, n_completed)``. Attempts
    whose latency exceeds the budget never complete; completion order is
    latency-ascending with ties broken by attempt index, matching the
    detailed simulator and the live coordinator.
    """
    answers = np.ascontiguousarray(answers, dtype=np.int64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    latencies = np.ascontiguousarray(latencies, dtype=np.float64)
    budgets = np.ascontiguousarray(budgets, dtype=np.float64)
    rows, n = answers.shape
    if weights.shape != (rows, n) or latencies.shape != (rows, n):
        raise ValueError("answers/weights/latencies shapes disagree")
    if budgets.shape != (rows,):
        raise ValueError(f"budgets must have shape ({rows},)")
    if n > MAX_ATTEMPTS:
        raise ValueError(f"at most {MAX_ATTEMPTS} attempts per problem, got {n}")

    # Completion order is computed once, identically for both backends.
    order = np.argsort(latencies, axis=1, kind="stable").astype(np.int64)

    final = np.zeros(rows, dtype=np.int64)
    elapsed = np.zeros(rows, dtype=np.float64)
    early = np.zeros(rows, dtype=np.uint8)
    n_completed = np.zeros(rows, dtype=np.int32)

    backend = impl if impl is not None else _impl
    backend.resolve_rows(
        answers, weights, latencies, order, budgets,
        int(quorum), int(trivial_max), bool(early_stop),
        final, elapsed, early, n_completed,
    )
    return final, elapsed, early, n_completed
