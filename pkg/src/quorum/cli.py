"""Command-line surface.

Subcommands: ``simulate`` (Monte Carlo contests from a scenario file),
``analyze`` (turn run logs into correlation / mixer / histogram tables),
``lottery`` (submission-lottery projections), ``budget-trace`` (replay a
consumption trace through the allocator), ``live`` (drive a real
chat-completions backend). Exit codes are a stable contract: 0 success,
2 input error, 3 environment error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import yaml

from . import __version__, stats
from .budget import BudgetConfig, BudgetState, advance, allocate, initial_state
from .orchestrator import (
    ContestConfig,
    ContestProblem,
    HttpAttemptBackend,
    OpenAiChatClient,
    SamplingConfig,
    run_contest,
)
from .orchestrator.prompts import default_prompts, load_prompts
from .orchestrator.sandbox_client import TcpSandboxPool
from .orchestrator.toolloop import NullSandbox
from .report import fmt, svg_line_chart, write_csv, write_provenance
from .runlog import iter_run_logs, write_run_record
from .sim.contest import config_hash, simulate_contest
from .sim.model import MixerConfig
from .sim.scenario import ScenarioError, load_scenario

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ENV = 3


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except BrokenPipeError:
        return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quorum",
        description="Majority-vote contest simulator, analyzer, and live runner.",
    )
    parser.add_argument("--version", action="version", version=f"quorum {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run Monte Carlo contests from a scenario")
    p.add_argument("--scenario", required=True, help="scenario YAML file")
    p.add_argument("--seed", type=int, default=None, help="override scenario seed")
    p.add_argument("--reps", type=int, default=None, help="override replications")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("analyze", help="summarize run logs into report tables")
    p.add_argument("--logs", required=True, help="directory of *.jsonl run logs")
    p.add_argument("--out", default=None, help="report directory (default: <logs>/report)")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("lottery", help="probability of clearing a target in K tries")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--k", type=int, required=True, help="max submissions")
    p.add_argument("--out", default=None, help="optional output directory")
    p.set_defaults(handler=cmd_lottery)

    p = sub.add_parser("budget-trace", help="replay a consumption trace")
    p.add_argument("--trace", required=True,
                   help="text file, one consumed-seconds value per problem")
    p.add_argument("--config", default=None, help="YAML with budget key overrides")
    p.set_defaults(handler=cmd_budget_trace)

    p = sub.add_parser("live", help="run a contest against a chat backend")
    p.add_argument("--problems", required=True, help="JSONL problems file")
    p.add_argument("--backend-url", required=True,
                   help="OpenAI-compatible base URL, e.g. http://host:8000/v1")
    p.add_argument("--model", default="gpt-oss")
    p.add_argument("--prompts-dir", default=None)
    p.add_argument("--out", required=True, help="run log path")
    p.add_argument("--api-key-env", default=None,
                   help="environment variable holding the API key")
    p.add_argument("--config", default=None, help="YAML overrides (budget/sampling/mixer)")
    p.add_argument("--sandbox", default=None, help="code sandbox host:port")
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(handler=cmd_live)
    return parser


def _fail(message: str, code: int) -> int:
    print(f"quorum: error: {message}", file=sys.stderr)
    return code


def cmd_simulate(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except FileNotFoundError:
        return _fail(f"scenario file not found: {args.scenario}", EXIT_INPUT)
    except ScenarioError as exc:
        return _fail(str(exc), EXIT_INPUT)

    seed = scenario.seed if args.seed is None else args.seed
    reps = scenario.replications if args.reps is None else args.reps
    if reps < 1:
        return _fail(f"need at least one replication, got {reps}", EXIT_INPUT)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    scores = []
    snapshot = None
    for rep in range(reps):
        record = simulate_contest(
            scenario.model,
            scenario.mixer,
            scenario.budget,
            seed=seed + rep,  # independent derived seed per replication
            n_problems=scenario.n_problems,
            quorum=scenario.quorum,
            trivial_max=scenario.trivial_max,
            early_stop=scenario.early_stop,
            config_label=scenario.name,
        )
        snapshot = record.config
        write_run_record(record, out_dir / f"run_{rep:04d}.jsonl")
        scores.append((rep, seed + rep, record.score, record.total_elapsed_s))

    write_csv(out_dir / "runs.csv",
              ["run", "seed", "score", "total_elapsed_s"], scores)
    values = [s for _, _, s, _ in scores]
    if len(values) >= 2:
        dist = stats.summarize_runs(values)
        summary_row = [len(values), dist.mu, dist.sigma, dist.min, dist.max]
    else:
        summary_row = [1, float(values[0]), 0.0, values[0], values[0]]
    write_csv(out_dir / "summary.csv",
              ["n_runs", "mu", "sigma", "min", "max"], [summary_row])
    write_provenance(
        out_dir,
        command="simulate",
        scenario=scenario.name,
        seed=seed,
        replications=reps,
        config_hash=config_hash(snapshot or {}),
    )
    print(f"{scenario.name}: {reps} runs, mean {fmt(sum(values) / len(values))}, "
          f"min {min(values)}, max {max(values)} -> {out_dir}")
    return EXIT_OK


def _problem_correlation_rows(run, run_name):
    rows = []
    label = run.record.config.get("label", "unknown")
    for problem in run.record.problems:
        voters = [a for a in problem.attempts
                  if a.status.value == "completed" and a.answer is not None]
        n = len(voters)
        if problem.answer_key is None or n < 2:
            rows.append((run_name, problem.problem_id, label, n, None,
                         None, None, False, "no_key" if problem.answer_key is None
                         else "too_few_votes"))
            continue
        v = sum(a.answer == problem.answer_key for a in voters)
        if 0 < v < n:
            estimate = stats.mom_rho(n, v)
            rows.append((run_name, problem.problem_id, label, n, v,
                         estimate.p_hat, estimate.rho_hat, True, ""))
        else:
            rows.append((run_name, problem.problem_id, label, n, v,
                         v / n, None, False, "unanimous"))
    return rows


def cmd_analyze(args) -> int:
    logs_dir = Path(args.logs)
    if not logs_dir.is_dir():
        return _fail(f"not a directory: {logs_dir}", EXIT_INPUT)
    runs = list(iter_run_logs(logs_dir, strict=False))
    if not runs:
        return _fail(f"no run logs under {logs_dir}", EXIT_INPUT)
    out_dir = Path(args.out) if args.out else logs_dir / "report"
    out_dir.mkdir(parents=True, exist_ok=True)

    correlation_rows = []
    scores_by_label: dict[str, list[int]] = {}
    skipped = 0
    for run in runs:
        run_name = run.path.stem if run.path else "run"
        skipped += run.skipped_lines
        correlation_rows.extend(_problem_correlation_rows(run, run_name))
        score = run.footer.get("score_if_known")
        if score is not None:
            label = run.record.config.get("label", "unknown")
            scores_by_label.setdefault(label, []).append(score)

    write_csv(
        out_dir / "correlation.csv",
        ["run", "problem_id", "label", "n_votes", "correct_votes",
         "p_hat", "rho_hat", "defined", "excluded_reason"],
        correlation_rows,
    )

    mixer_rows = []
    for label in sorted(scores_by_label):
        values = scores_by_label[label]
        if len(values) >= 2:
            dist = stats.summarize_runs(values)
            mixer_rows.append([label, len(values), dist.mu, dist.sigma,
                               dist.min, dist.max])
        else:
            mixer_rows.append([label, 1, float(values[0]), 0.0,
                               values[0], values[0]])
    write_csv(out_dir / "mixer_table.csv",
              ["label", "n_runs", "mu", "sigma", "min", "max"], mixer_rows)

    # ablation view: every configuration against the reference label
    if mixer_rows:
        reference_label = ("baseline" if "baseline" in scores_by_label
                           else mixer_rows[0][0])
        reference_mean = next(r[2] for r in mixer_rows if r[0] == reference_label)
        write_csv(
            out_dir / "ablation.csv",
            ["label", "n_runs", "mean_score", "delta_vs_" + reference_label],
            [[label, n, mu, mu - reference_mean]
             for label, n, mu, _, _, _ in mixer_rows],
        )

    all_scores = [s for values in scores_by_label.values() for s in values]
    histogram: dict[int, int] = {}
    for score in all_scores:
        histogram[score] = histogram.get(score, 0) + 1
    write_csv(out_dir / "histogram.csv", ["score", "count"],
              [(k, histogram[k]) for k in sorted(histogram)])

    # accuracy-vs-expected-score curves under the closed-form model
    curve_rows = []
    series = []
    for n in (8, 16, 32):
        threshold = stats.majority_threshold(n)
        points = []
        for i in range(101):
            p = i / 100
            score = stats.ScoreModel(p, n, threshold).expected_score()
            curve_rows.append((n, threshold, p, score))
            points.append((p, score))
        series.append((f"n={n}", points))
    write_csv(out_dir / "score_curve.csv",
              ["n", "threshold", "p", "expected_score"], curve_rows)
    (out_dir / "score_curve.svg").write_text(
        svg_line_chart(series, "Expected score vs per-attempt accuracy",
                       "per-attempt accuracy p", "expected score of 50"),
        encoding="utf-8",
    )

    defined = sum(1 for row in correlation_rows if row[7])
    write_provenance(
        out_dir,
        command="analyze",
        runs=len(runs),
        problems=len(correlation_rows),
        defined_estimates=defined,
        corrupt_lines_skipped=skipped,
        config_hashes=sorted({r.footer.get("config_hash", "") for r in runs}),
    )
    print(f"analyzed {len(runs)} runs, {len(correlation_rows)} problems "
          f"({defined} defined correlation points, {skipped} corrupt lines) "
          f"-> {out_dir}")
    return EXIT_OK


def cmd_lottery(args) -> int:
    if args.sigma <= 0:
        return _fail(f"sigma must be positive, got {args.sigma}", EXIT_INPUT)
    if args.k < 1:
        return _fail(f"k must be >= 1, got {args.k}", EXIT_INPUT)
    p_single = stats.lottery_single(args.mu, args.sigma, args.target)
    rows = [(k, p_single, stats.lottery_max_over_k(p_single, k))
            for k in range(1, args.k + 1)]
    print(f"P(single >= {fmt(args.target)}) = {fmt(p_single)} "
          f"at mu={fmt(args.mu)}, sigma={fmt(args.sigma)}")
    print("K,p_single,p_max_ge_target")
    for k, p1, pk in rows:
        print(f"{k},{fmt(p1)},{fmt(pk)}")
    if args.out:
        out_dir = Path(args.out)
        write_csv(out_dir / "lottery.csv",
                  ["k", "p_single", "p_max_ge_target"], rows)
        (out_dir / "lottery.svg").write_text(
            svg_line_chart(
                [("P(max >= target)", [(k, pk) for k, _, pk in rows])],
                f"Best of K submissions vs target {fmt(args.target)}",
                "submissions K", "probability",
            ),
            encoding="utf-8",
        )
        write_provenance(out_dir, command="lottery", mu=args.mu,
                         sigma=args.sigma, target=args.target, k=args.k)
    return EXIT_OK


def _load_budget_overrides(path: str | None) -> BudgetConfig:
    if path is None:
        return BudgetConfig()
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    if "budget" in data:
        data = data["budget"]
    return BudgetConfig.from_mapping(data)


def cmd_budget_trace(args) -> int:
    trace_path = Path(args.trace)
    if not trace_path.exists():
        return _fail(f"trace file not found: {trace_path}", EXIT_INPUT)
    try:
        config = _load_budget_overrides(args.config)
    except (OSError, ValueError, yaml.YAMLError) as exc:
        return _fail(f"bad config: {exc}", EXIT_INPUT)

    consumed_values = []
    for line_no, raw in enumerate(trace_path.read_text().splitlines(), start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            value = float(text)
        except ValueError:
            return _fail(f"{trace_path}:{line_no}: not a number: {text!r}", EXIT_INPUT)
        if value < 0:
            return _fail(f"{trace_path}:{line_no}: negative consumption", EXIT_INPUT)
        consumed_values.append(value)
    if not consumed_values:
        return _fail(f"{trace_path}: empty trace", EXIT_INPUT)
    if len(consumed_values) > 50:
        return _fail(f"{trace_path}: at most 50 problems, got "
                     f"{len(consumed_values)}", EXIT_INPUT)

    state: BudgetState = initial_state(config, len(consumed_values))
    print("problem,allocation_s,consumed_s,remaining_s,event")
    fallbacks = 0
    for index, trace_value in enumerate(consumed_values):
        share = allocate(state, config)
        if share is None:
            fallbacks += 1
            consumed = 0.0
            event = "fallback"
        else:
            consumed = trace_value
            event = "overrun" if consumed > share + 1e-9 else ""
        state = advance(state, consumed)
        print(f"{index},{fmt(share)},{fmt(consumed)},{fmt(state.time_left_s)},{event}")
    print(f"total_remaining_s={fmt(state.time_left_s)} fallbacks={fallbacks}")
    return EXIT_OK


def _load_live_overrides(path: str | None):
    data = {}
    if path is not None:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    budget = BudgetConfig.from_mapping(data.get("budget", {}))
    sampling_data = data.get("sampling", {})
    sampling = SamplingConfig(
        temperature=float(sampling_data.get("temperature", 1.0)),
        min_p=float(sampling_data.get("min_p", 0.02)),
        top_logprobs=int(sampling_data.get("top_logprobs", 5)),
        max_turns=int(sampling_data.get("max_turns", 128)),
        max_tokens=sampling_data.get("max_tokens"),
    )
    mixer = MixerConfig(dict(data.get("mixer", {"Original": 8})))
    contest = data.get("contest", {})
    return budget, sampling, mixer, contest


def cmd_live(args) -> int:
    problems_path = Path(args.problems)
    if not problems_path.exists():
        return _fail(f"problems file not found: {problems_path}", EXIT_INPUT)
    try:
        budget, sampling, mixer, contest_overrides = _load_live_overrides(args.config)
    except (OSError, ValueError, yaml.YAMLError) as exc:
        return _fail(f"bad config: {exc}", EXIT_INPUT)

    problems = []
    for index, raw in enumerate(problems_path.read_text(encoding="utf-8").splitlines()):
        if not raw.strip():
            continue
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            return _fail(f"{problems_path}:{index + 1}: {exc}", EXIT_INPUT)
        problems.append(
            ContestProblem(
                index=index,
                problem_id=str(data.get("id", index)),
                payload=data["problem"],
                answer_key=data.get("answer"),
            )
        )

    try:
        prompts = load_prompts(args.prompts_dir) if args.prompts_dir else default_prompts()
        prompts.validate_mixer(mixer.expand())
    except (OSError, KeyError) as exc:
        return _fail(f"prompts: {exc}", EXIT_INPUT)

    client = OpenAiChatClient(
        base_url=args.backend_url,
        model=args.model,
        api_key_env=args.api_key_env,
        session_timeout_s=budget.session_timeout_s,
        sampling=sampling,
    )
    if not client.health_check():
        return _fail(f"backend unreachable: {args.backend_url}", EXIT_ENV)

    sandbox = NullSandbox()
    if args.sandbox:
        host, _, port = args.sandbox.partition(":")
        sandbox = TcpSandboxPool(host or "127.0.0.1", int(port or 8765))

    backend = HttpAttemptBackend(client=client, prompts=prompts, sandbox=sandbox)
    config = ContestConfig(
        mixer=mixer,
        budget=budget,
        n_problems=int(contest_overrides.get("n_problems", max(len(problems), 1))),
        quorum=int(contest_overrides.get("quorum", 4)),
        trivial_max=int(contest_overrides.get("trivial_max", 1)),
        early_stop=bool(contest_overrides.get("early_stop", True)),
        attempt_seed_base=args.seed,
        seed=args.seed,
        poll_interval_s=float(contest_overrides.get("poll_interval_s", 0.1)),
        label=str(contest_overrides.get("label", "live")),
    )
    record = run_contest(problems, config, backend, log_path=args.out)
    known = record.score if record.score is not None else "unknown"
    print(f"live run complete: {len(record.problems)} problems, "
          f"score {known}, log -> {args.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
