"""Acceptance suite: the release gate, one criterion per test.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL
line per criterion. Tolerances are pinned here and nowhere else; the
Monte Carlo criteria are seed-fixed by design. The whole suite runs with
the simulator backend only (no live endpoint, no sandbox worker).
"""

from __future__ import annotations

import math
from contextlib import contextmanager

import numpy as np
import pytest

from quorum.budget import BudgetConfig, advance, allocate, initial_state
from quorum.cli import main
from quorum.clock import VirtualClock
from quorum.orchestrator import ContestConfig, SimulatorBackend, run_contest, sim_problems
from quorum.runlog import write_run_record
from quorum.sim import (
    COMMON_SHOCK,
    LatencyModel,
    MixerConfig,
    VoterModel,
    correlation_experiment,
    mc_contest_scores,
    mixer_experiment,
    simulate_contest,
)
from quorum.stats import (
    ScoreModel,
    effective_sample_size,
    invert_score_to_p,
    lottery_max_over_k,
    lottery_single,
    majority_success_probability,
    mom_rho,
    summarize_runs,
)


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE FAIL: {name}")
        raise
    print(f"ACCEPTANCE PASS: {name}")


ALIGNED_PANEL = dict(
    true_answer=99999,
    distractor_scatter=1,
    entropy_correct=1.0,
    entropy_wrong=1.0,
    entropy_sigma=0.0,
    latency=LatencyModel(mean_s=20.0, jitter=0.2),
)
MIX8 = MixerConfig({"Original": 8})


def test_effective_sample_size_reported_point():
    with criterion("effective sample size: (8, 0.3) -> 2.58 +/- 0.01"):
        assert effective_sample_size(8, 0.3) == pytest.approx(2.58, abs=0.01)


def test_rho_identity_suite():
    with criterion("rho-hat identity: -1/(n-1) over n in [2,64], exact minima, "
                   "point-set means -0.113 / -0.258 +/- 0.001"):
        for n in range(2, 65):
            for v in range(1, n):
                assert mom_rho(n, v).rho_hat == pytest.approx(
                    -1.0 / (n - 1), abs=1e-12
                )
        assert mom_rho(3, 1).rho_hat == pytest.approx(-0.500, abs=1e-12)
        assert mom_rho(16, 8).rho_hat == pytest.approx(-1.0 / 15.0, abs=1e-12)
        assert round(mom_rho(16, 8).rho_hat, 4) == -0.0667

        high_n_points = [mom_rho(n, n // 2).rho_hat for n in (7, 7, 11, 16, 16)]
        assert np.mean(high_n_points) == pytest.approx(-0.113, abs=0.001)
        all_points = high_n_points + [mom_rho(3, 1).rho_hat] * 3
        assert np.mean(all_points) == pytest.approx(-0.258, abs=0.001)


def test_binomial_model_round_trip():
    with criterion("binomial round trip: invert(39.7) in [0.68, 0.70], "
                   "forward(0.69) -> 39.4 +/- 0.1"):
        p_hat = invert_score_to_p(39.7, 8, 5, 50)
        assert 0.68 <= p_hat <= 0.70
        assert ScoreModel(0.69, 8, 5).expected_score() == pytest.approx(39.4, abs=0.1)


def test_lottery_probabilities():
    with criterion("lottery: single in [0.005, 0.007], K=13 endpoint "
                   "in [0.067, 0.077]"):
        p_single = lottery_single(39.7, 1.7, 44)
        assert 0.005 <= p_single <= 0.007
        assert 0.067 <= lottery_max_over_k(p_single, 13) <= 0.077


def test_baseline_distribution():
    with criterion("baseline 13-run distribution: mu 39.69 +/- 0.01, "
                   "sigma 1.65 +/- 0.05, min 37, max 44"):
        dist = summarize_runs([44, 41, 40, 40, 40, 40, 40, 39, 39, 39, 39, 38, 37])
        assert dist.mu == pytest.approx(39.69, abs=0.01)
        assert dist.sigma == pytest.approx(1.65, abs=0.05)
        assert dist.min == 37
        assert dist.max == 44


def test_monte_carlo_oracle_equivalence():
    with criterion("Monte Carlo oracle: 1e4 contests at p=.69 within 3 SE of "
                   "50*P(X>=5); pooled rho 0 in [-.02,.02]; shock .3 in [.28,.32]"):
        model = VoterModel({"Original": 0.69}, **ALIGNED_PANEL)
        scores = mc_contest_scores(
            model, MIX8, BudgetConfig(), n_contests=10_000, seed=7,
            early_stop=False,
        )
        tail = majority_success_probability(ScoreModel(0.69, 8, 5))
        std_err = math.sqrt(50 * tail * (1 - tail) / len(scores))
        assert scores.mean() == pytest.approx(50 * tail, abs=3 * std_err)

        independent = correlation_experiment(
            VoterModel({"s": 0.7}), 8, runs=10_000, seed=0
        )
        assert -0.02 <= independent.pooled_rho <= 0.02

        shocked = correlation_experiment(
            VoterModel({"s": 0.7}, mechanism=COMMON_SHOCK, rho=0.3),
            8, runs=10_000, seed=0,
        )
        assert 0.28 <= shocked.pooled_rho <= 0.32


def test_mixer_reproduction():
    with criterion("mixer degradation: Equal < Baseline by > 2 MC standard "
                   "errors at 1e4 contests (inverted accuracies, no cross benefit)"):
        accuracies = {
            "Original": invert_score_to_p(39.7, 8, 5, 50),
            "Small Cases": invert_score_to_p(37, 8, 5, 50),
            "Work Backwards": invert_score_to_p(39, 8, 5, 50),
            "Classify": invert_score_to_p(36, 8, 5, 50),
        }
        template = VoterModel(accuracies, **ALIGNED_PANEL)
        rows = mixer_experiment(
            accuracies,
            decorrelation=0.0,
            mixers=[
                ("Baseline", MixerConfig({"Original": 8})),
                ("Conservative", MixerConfig({
                    "Original": 5, "Small Cases": 1,
                    "Work Backwards": 1, "Classify": 1,
                })),
                ("Equal", MixerConfig({
                    "Original": 2, "Small Cases": 2,
                    "Work Backwards": 2, "Classify": 2,
                })),
            ],
            contests_per_mixer=10_000,
            seed=11,
            model_template=template,
            early_stop=False,
        )
        baseline, conservative, equal = rows
        gap = baseline.mean_score - equal.mean_score
        assert gap > 2 * math.hypot(baseline.std_err, equal.std_err)
        # the degradation is monotone through the middle configuration too
        assert baseline.mean_score > conservative.mean_score > equal.mean_score


def test_budget_completion_guarantee():
    with criterion("budget guarantee: 1e5 random traces of 50 problems, zero "
                   "over 17100s, every problem allocated or fallback-logged"):
        cfg = BudgetConfig()
        rng = np.random.default_rng(2026)
        fractions = rng.random((100_000, 50))
        worst_total = 0.0
        fallback_events = 0
        for row in fractions:
            state = initial_state(cfg, 50)
            total = 0.0
            handled = 0
            for f in row:
                share = allocate(state, cfg)
                if share is None:
                    fallback_events += 1
                    consumed = 0.0
                else:
                    assert share > 0.0
                    consumed = share * f
                total += consumed
                state = advance(state, consumed)
                handled += 1
            assert handled == 50
            assert state.time_left_s >= 0.0
            worst_total = max(worst_total, total)
        assert worst_total <= cfg.solving_budget_s + 1e-6
        # consumption never exceeds allocations, so the floor never trips;
        # the fallback path is exercised by the orchestrator suite instead
        assert fallback_events == 0


def test_orchestrator_simulator_equivalence(tmp_path):
    with criterion("coordinator == detailed simulator: bit-identical logs "
                   "for 20 seeds"):
        model = VoterModel(
            {"Original": 0.7},
            true_answer=88,
            distractor_scatter=4,
            latency=LatencyModel(mean_s=40.0, jitter=0.3),
        )
        for seed in range(20):
            sim_record = simulate_contest(
                model, MIX8, BudgetConfig(), seed=seed, config_label="equiv"
            )
            clock = VirtualClock()
            backend = SimulatorBackend(master_seed=seed, clock=clock)
            config = ContestConfig(mixer=MIX8, budget=BudgetConfig(),
                                   seed=seed, label="equiv")
            orch_record = run_contest(
                sim_problems([model] * 50), config, backend, clock=clock
            )
            a, b = tmp_path / "sim.jsonl", tmp_path / "orch.jsonl"
            write_run_record(sim_record, a)
            write_run_record(orch_record, b)
            assert a.read_bytes() == b.read_bytes(), f"diverged at seed {seed}"


def test_cli_simulate_determinism(tmp_path):
    with criterion("cmd_simulate determinism: same seed twice -> byte-identical "
                   "logs and reports"):
        scenario = tmp_path / "scenario.yaml"
        scenario.write_text(
            "name: determinism\n"
            "problems: 10\n"
            "replications: 3\n"
            "seed: 5\n"
            "early_stop: false\n"
            "mixer: {Original: 8}\n"
            "accuracy: {Original: 0.69}\n"
            "true_answer: 99999\n"
            "distractor_scatter: 1\n"
            "entropy: {correct: 1.0, wrong: 1.0, sigma: 0.0}\n"
            "latency: {mean_s: 20.0, jitter: 0.2}\n"
        )
        trees = []
        for run_dir in ("first", "second"):
            out = tmp_path / run_dir
            assert main(["simulate", "--scenario", str(scenario),
                         "--out", str(out)]) == 0
            report = tmp_path / f"report_{run_dir}"
            assert main(["analyze", "--logs", str(out),
                         "--out", str(report)]) == 0
            trees.append({
                str(p.relative_to(tmp_path / run_dir)): p.read_bytes()
                for p in sorted(out.rglob("*")) if p.is_file()
            } | {
                "report/" + str(p.relative_to(report)): p.read_bytes()
                for p in sorted(report.rglob("*")) if p.is_file()
            })
        assert trees[0] == trees[1]
