"""Batch kernel: compiled/fallback bit-identity and slow-path agreement."""

from __future__ import annotations

import numpy as np
import pytest

from quorum._kernels import BACKEND, MAX_ATTEMPTS, pyref, resolve_batch
from quorum.sim import resolve_attempts
from quorum.voting import AttemptResult, AttemptStatus

try:
    from quorum._kernels import _core
except ImportError:
    _core = None


def random_batch(rows, n, seed, answer_pool=6, tight_budgets=True):
    rng = np.random.default_rng(seed)
    answers = rng.integers(0, answer_pool, (rows, n)).astype(np.int64)
    weights = rng.uniform(1.0, 11.0, (rows, n))
    latencies = rng.lognormal(mean=3.0, sigma=1.0, size=(rows, n))
    if tight_budgets:
        budgets = rng.uniform(5.0, 120.0, rows)
    else:
        budgets = np.full(rows, 1e9)
    return answers, weights, latencies, budgets


@pytest.mark.skipif(_core is None, reason="compiled kernel not built")
class TestCompiledMatchesFallback:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    @pytest.mark.parametrize("early_stop", [True, False])
    def test_bit_identical_outputs(self, seed, early_stop):
        batch = random_batch(5000, 8, seed)
        got = resolve_batch(*batch, early_stop=early_stop, impl=_core)
        ref = resolve_batch(*batch, early_stop=early_stop, impl=pyref)
        for a, b, name in zip(got, ref, ("final", "elapsed", "early", "ncomp")):
            assert (a == b).all(), name

    def test_bit_identical_with_latency_ties(self):
        answers, weights, latencies, budgets = random_batch(2000, 8, 9)
        latencies = np.round(latencies)  # force plenty of exact ties
        got = resolve_batch(answers, weights, latencies, budgets, impl=_core)
        ref = resolve_batch(answers, weights, latencies, budgets, impl=pyref)
        for a, b in zip(got, ref):
            assert (a == b).all()

    def test_default_backend_is_compiled_here(self):
        assert BACKEND == "compiled"


class TestKernelMatchesDetailedResolver:
    """The fast path must agree with the per-attempt resolver row by row."""

    @pytest.mark.parametrize("early_stop", [True, False])
    def test_row_equivalence(self, early_stop):
        rows, n = 400, 8
        answers, weights, latencies, budgets = random_batch(rows, n, 17)
        final, elapsed, early, ncomp = resolve_batch(
            answers, weights, latencies, budgets, early_stop=early_stop
        )
        for r in range(rows):
            raw = [
                AttemptResult(
                    answer=int(answers[r, i]),
                    # invert the weight map so the resolver recomputes the
                    # exact same weight from the entropy we hand it
                    entropy=1.0 / (weights[r, i] - 1.0) - 0.1,
                    status=AttemptStatus.COMPLETED,
                    latency_s=float(latencies[r, i]),
                    strategy="s",
                    seed=i,
                )
                for i in range(n)
            ]
            outcome = resolve_attempts(
                raw, float(budgets[r]), early_stop=early_stop
            )
            assert outcome.final == final[r], r
            assert outcome.elapsed_s == pytest.approx(float(elapsed[r]), abs=1e-12)
            assert outcome.early_stopped == bool(early[r])
            completed = sum(
                a.status is AttemptStatus.COMPLETED for a in outcome.attempts
            )
            assert completed == ncomp[r]

    def test_trivial_answers_do_not_stop_early(self):
        answers = np.full((1, 8), 1, dtype=np.int64)
        weights = np.full((1, 8), 2.0)
        latencies = np.arange(1.0, 9.0)[None, :]
        budgets = np.array([100.0])
        final, elapsed, early, _ = resolve_batch(
            answers, weights, latencies, budgets, quorum=4, trivial_max=1
        )
        assert final[0] == 1
        assert not early[0]
        assert elapsed[0] == pytest.approx(8.0)

    def test_row_width_limit(self):
        with pytest.raises(ValueError):
            resolve_batch(
                np.zeros((1, MAX_ATTEMPTS + 1), dtype=np.int64),
                np.zeros((1, MAX_ATTEMPTS + 1)),
                np.zeros((1, MAX_ATTEMPTS + 1)),
                np.zeros(1),
            )

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            resolve_batch(
                np.zeros((2, 4), dtype=np.int64),
                np.zeros((2, 3)),
                np.zeros((2, 4)),
                np.zeros(2),
            )
