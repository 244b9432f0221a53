"""Line-delimited JSON run logs: one problem per line plus a footer.

The same format serves simulated and live contests, so the analysis
commands never care where a log came from. Serialization is append-only
and flushed per problem (crash-safe), with no timestamps, so regenerating
a run from the same seed and config is byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterator

from .sim.contest import ProblemRecord, RunRecord, config_hash
from .voting import AttemptResult, AttemptStatus, TallyEntry, VoteTally


def attempt_to_dict(attempt: AttemptResult) -> dict:
    return {
        "seed": attempt.seed,
        "strategy": attempt.strategy,
        "status": attempt.status.value,
        "answer": attempt.answer,
        "entropy": attempt.entropy,
        "latency_s": attempt.latency_s,
        "turns": attempt.turns,
    }


def attempt_from_dict(data: dict) -> AttemptResult:
    return AttemptResult(
        answer=data["answer"],
        entropy=data["entropy"],
        status=AttemptStatus(data["status"]),
        latency_s=data["latency_s"],
        strategy=data["strategy"],
        seed=data["seed"],
        turns=data.get("turns", 0),
    )


def tally_to_list(votes: VoteTally) -> list[dict]:
    return [
        {"answer": e.answer, "votes": e.vote_count, "weight": e.total_weight}
        for e in votes.entries.values()
    ]


def tally_from_list(entries: list[dict]) -> VoteTally:
    votes = VoteTally()
    for item in entries:
        votes.entries[item["answer"]] = TallyEntry(
            answer=item["answer"],
            vote_count=item["votes"],
            total_weight=item["weight"],
        )
    return votes


def problem_to_dict(record: ProblemRecord) -> dict:
    line = {
        "problem_id": record.problem_id,
        "allocation_s": record.allocation_s,
        "elapsed_s": record.elapsed_s,
        "attempts": [attempt_to_dict(a) for a in record.attempts],
        "tally": tally_to_list(record.votes),
        "final": record.final,
        "early_stopped": record.early_stopped,
    }
    if record.answer_key is not None:
        line["answer_key"] = record.answer_key
    return line


def problem_from_dict(line: dict) -> ProblemRecord:
    return ProblemRecord(
        problem_id=str(line["problem_id"]),
        allocation_s=line["allocation_s"],
        elapsed_s=line["elapsed_s"],
        attempts=[attempt_from_dict(a) for a in line["attempts"]],
        votes=tally_from_list(line["tally"]),
        final=line["final"],
        early_stopped=line["early_stopped"],
        answer_key=line.get("answer_key"),
    )


class RunLogWriter:
    """Streaming writer: problem lines as they happen, footer at close."""

    def __init__(self, path: str | Path, config: dict, seed: int):
        self.path = Path(path)
        self.config = config
        self.seed = seed
        self._fh: IO[str] = self.path.open("w", encoding="utf-8")
        self._problems = 0

    def write_problem(self, record: ProblemRecord) -> None:
        json.dump(problem_to_dict(record), self._fh)
        self._fh.write("\n")
        self._fh.flush()
        self._problems += 1

    def close(self, score_if_known: int | None, total_elapsed_s: float) -> None:
        footer = {
            "score_if_known": score_if_known,
            "total_elapsed_s": total_elapsed_s,
            "config_hash": config_hash(self.config),
            "config": self.config,
            "seed": self.seed,
            "n_problems_logged": self._problems,
        }
        json.dump(footer, self._fh)
        self._fh.write("\n")
        self._fh.close()


def write_run_record(record: RunRecord, path: str | Path) -> None:
    writer = RunLogWriter(path, record.config, record.seed)
    for problem in record.problems:
        writer.write_problem(problem)
    writer.close(record.score, record.total_elapsed_s)


@dataclass
class LoadedRun:
    record: RunRecord
    footer: dict
    skipped_lines: int = 0
    path: Path | None = None


def read_run_record(path: str | Path, strict: bool = True) -> LoadedRun:
    """Parse a run log; with ``strict=False`` corrupt lines are counted, not fatal."""
    path = Path(path)
    problems: list[ProblemRecord] = []
    footer: dict = {}
    skipped = 0
    seed = 0
    config: dict = {}
    with path.open("r", encoding="utf-8") as fh:
        for raw in fh:
            raw = raw.strip()
            if not raw:
                continue
            try:
                line = json.loads(raw)
                if "problem_id" in line:
                    problems.append(problem_from_dict(line))
                else:
                    footer = line
            except (json.JSONDecodeError, KeyError, ValueError):
                if strict:
                    raise
                skipped += 1
    if footer:
        seed = footer.get("seed", 0)
        config = footer.get("config", {})
    record = RunRecord(seed=seed, config=config, problems=problems)
    return LoadedRun(record=record, footer=footer, skipped_lines=skipped, path=path)


def iter_run_logs(directory: str | Path, strict: bool = False) -> Iterator[LoadedRun]:
    """All ``*.jsonl`` runs under a directory, sorted by name."""
    for path in sorted(Path(directory).glob("*.jsonl")):
        yield read_run_record(path, strict=strict)
