"""Coordinator engine: concurrency semantics, failures, sim equivalence."""

from __future__ import annotations

import pytest

from quorum.budget import BudgetConfig
from quorum.clock import VirtualClock
from quorum.orchestrator import (
    ContestConfig,
    ContestProblem,
    SimulatorBackend,
    run_contest,
    sim_problems,
    solve_problem,
)
from quorum.runlog import read_run_record, write_run_record
from quorum.sim import LatencyModel, MixerConfig, VoterModel, simulate_contest
from quorum.voting import AttemptResult, AttemptStatus

MIX8 = MixerConfig({"Original": 8})


def make_problem(model, index=0):
    return ContestProblem(
        index=index,
        problem_id=str(index),
        payload=model,
        answer_key=model.true_answer,
    )


class ExplodingBackend:
    def begin_problem(self, problem, n_attempts):
        pass

    def start_attempt(self, problem, strategy, seed, deadline):
        raise ConnectionError("backend gone")


class StaticHandle:
    """Handle that completes at a scripted virtual time."""

    def __init__(self, result, eta, clock):
        self._result = result
        self._eta = eta
        self._clock = clock
        self.cancelled = False

    def poll(self):
        if self.cancelled:
            return None
        if self._clock.now() >= self._eta:
            return self._result
        return None

    def cancel(self):
        self.cancelled = True

    def eta(self):
        return None if self.cancelled else self._eta


class ScriptedBackend:
    """Backend yielding pre-built results at fixed latencies."""

    def __init__(self, script, clock):
        # script: list of (answer, latency) per attempt index
        self.script = script
        self.clock = clock
        self.handles = []

    def begin_problem(self, problem, n_attempts):
        pass

    def start_attempt(self, problem, strategy, seed, deadline):
        answer, latency = self.script[len(self.handles)]
        result = AttemptResult(
            answer=answer,
            entropy=0.5 if answer is not None else None,
            status=AttemptStatus.COMPLETED if answer is not None
            else AttemptStatus.FAILED,
            latency_s=latency,
            strategy=strategy,
            seed=seed,
        )
        handle = StaticHandle(result, self.clock.now() + latency, self.clock)
        self.handles.append(handle)
        return handle


class TestSolveProblem:
    def test_perfect_panel_early_stops(self):
        clock = VirtualClock()
        model = VoterModel({"Original": 1.0}, true_answer=4242)
        backend = SimulatorBackend(master_seed=5, clock=clock)
        outcome = solve_problem(
            make_problem(model), MIX8, 342.0, backend, clock
        )
        assert outcome.final == 4242
        assert outcome.early_stopped
        completed = [a for a in outcome.attempts
                     if a.status is AttemptStatus.COMPLETED]
        assert len(completed) >= 4
        assert len(outcome.attempts) == 8

    def test_backend_failure_degrades_to_fallback(self):
        clock = VirtualClock()
        model = VoterModel({"Original": 1.0}, true_answer=9)
        outcome = solve_problem(
            make_problem(model), MIX8, 342.0, ExplodingBackend(), clock
        )
        assert outcome.final == 0
        assert all(a.status is AttemptStatus.FAILED for a in outcome.attempts)

    def test_deterministic_replay(self):
        model = VoterModel({"Original": 0.7}, true_answer=31)
        runs = []
        for _ in range(2):
            clock = VirtualClock()
            backend = SimulatorBackend(master_seed=12, clock=clock)
            runs.append(
                solve_problem(make_problem(model), MIX8, 342.0, backend, clock)
            )
        assert runs[0] == runs[1]

    def test_early_stop_cancels_inflight_siblings(self):
        clock = VirtualClock()
        script = [(42, 1.0), (42, 2.0), (42, 3.0), (42, 4.0),
                  (42, 50.0), (7, 60.0), (7, 70.0), (7, 80.0)]
        backend = ScriptedBackend(script, clock)
        outcome = solve_problem(
            make_problem(VoterModel({"Original": 1.0}, true_answer=42)),
            MIX8, 342.0, backend, clock,
        )
        assert outcome.early_stopped
        assert outcome.final == 42
        assert outcome.elapsed_s == pytest.approx(4.0)
        assert [a.status for a in outcome.attempts[4:]] == (
            [AttemptStatus.CANCELLED] * 4
        )
        assert all(h.cancelled for h in backend.handles[4:])
        # cancellation is idempotent
        backend.handles[5].cancel()

    def test_deadline_times_out_slow_attempts(self):
        clock = VirtualClock()
        script = [(11, 5.0), (11, 6.0), (23, 7.0), (23, 500.0),
                  (23, 600.0), (23, 700.0), (23, 800.0), (23, 900.0)]
        backend = ScriptedBackend(script, clock)
        outcome = solve_problem(
            make_problem(VoterModel({"Original": 1.0}, true_answer=11)),
            MIX8, 100.0, backend, clock, early_stop=False,
        )
        assert outcome.elapsed_s == pytest.approx(100.0)
        timed_out = [a for a in outcome.attempts
                     if a.status is AttemptStatus.TIMED_OUT]
        assert len(timed_out) == 5
        assert all(a.latency_s == pytest.approx(100.0) for a in timed_out)

    def test_zero_budget_is_fallback(self):
        clock = VirtualClock()
        backend = SimulatorBackend(master_seed=1, clock=clock)
        outcome = solve_problem(
            make_problem(VoterModel({"Original": 1.0}, true_answer=5)),
            MIX8, 0.0, backend, clock,
        )
        assert outcome.final == 0
        assert outcome.attempts == []


class TestRunContest:
    MODEL = VoterModel(
        {"Original": 0.7},
        true_answer=88,
        latency=LatencyModel(mean_s=40.0, jitter=0.3),
    )

    def _run(self, seed, log_path=None, n=50, early_stop=True):
        clock = VirtualClock()
        backend = SimulatorBackend(master_seed=seed, clock=clock)
        config = ContestConfig(
            mixer=MIX8, budget=BudgetConfig(), n_problems=n,
            early_stop=early_stop, seed=seed, label="x",
        )
        return run_contest(
            sim_problems([self.MODEL] * n), config, backend,
            clock=clock, log_path=log_path,
        )

    def test_bit_identical_to_detailed_simulator(self, tmp_path):
        for seed in range(20):
            sim_record = simulate_contest(
                self.MODEL, MIX8, BudgetConfig(), seed=seed, config_label="x"
            )
            orch_record = self._run(seed)
            a, b = tmp_path / "sim.jsonl", tmp_path / "orch.jsonl"
            write_run_record(sim_record, a)
            write_run_record(orch_record, b)
            assert a.read_bytes() == b.read_bytes(), f"seed {seed}"

    def test_log_lines_match_problems(self, tmp_path):
        log = tmp_path / "run.jsonl"
        record = self._run(3, log_path=log, n=10)
        loaded = read_run_record(log)
        assert len(loaded.record.problems) == 10
        assert loaded.footer["score_if_known"] == record.score
        assert loaded.footer["config_hash"] == record.config_hash

    def test_log_complete_under_backend_failures(self, tmp_path):
        log = tmp_path / "run.jsonl"
        clock = VirtualClock()
        config = ContestConfig(mixer=MIX8, n_problems=5, seed=1)
        problems = sim_problems([self.MODEL] * 5)
        record = run_contest(problems, config, ExplodingBackend(),
                             clock=clock, log_path=log)
        loaded = read_run_record(log)
        assert len(loaded.record.problems) == 5
        assert all(p.final == 0 for p in loaded.record.problems)
        assert record.score == 0

    def test_empty_problem_source(self, tmp_path):
        log = tmp_path / "empty.jsonl"
        clock = VirtualClock()
        config = ContestConfig(mixer=MIX8, n_problems=0, seed=1)
        record = run_contest(iter(()), config,
                             SimulatorBackend(master_seed=1, clock=clock),
                             clock=clock, log_path=log)
        assert record.problems == []
        loaded = read_run_record(log)
        assert loaded.record.problems == []
        assert loaded.footer["score_if_known"] == 0

    def test_hard_floor_forces_fallback_rows(self, tmp_path):
        clock = VirtualClock()
        backend = SimulatorBackend(master_seed=2, clock=clock)
        tight = BudgetConfig(total_limit_s=920.0, infra_reserve_s=540.0,
                             startup_reserve_s=360.0)  # 20s solving budget
        config = ContestConfig(mixer=MIX8, budget=tight, n_problems=5, seed=2)
        record = run_contest(sim_problems([self.MODEL] * 5), config, backend,
                             clock=clock, log_path=tmp_path / "t.jsonl")
        assert all(p.allocation_s is None for p in record.problems)
        assert all(p.final == 0 for p in record.problems)
        assert len(record.problems) == 5

    def test_score_envelope_against_binomial_model(self):
        # oracle-aligned panel, early stop off: score within the 6-sigma
        # envelope of the closed-form score distribution
        model = VoterModel(
            {"Original": 0.69}, true_answer=99999, distractor_scatter=1,
            entropy_correct=1.0, entropy_wrong=1.0, entropy_sigma=0.0,
            latency=LatencyModel(mean_s=20.0, jitter=0.2),
        )
        clock = VirtualClock()
        backend = SimulatorBackend(master_seed=9, clock=clock)
        config = ContestConfig(mixer=MIX8, early_stop=False, seed=9, label="x")
        record = run_contest(sim_problems([model] * 50), config, backend,
                             clock=clock)
        assert 32 <= record.score <= 47
        assert record.total_elapsed_s <= 17100.0
