"""Entropy-weighted majority voting over inference attempts.

An attempt's vote counts once, but its weight grows as its token-level
entropy shrinks: ``w = 1 + 1/(entropy + 0.1)``. Entropy is measured in
nats (the 0.1 smoothing constant makes the base choice a documentation
matter, not a knob). Early stopping is deliberately unweighted: it counts
agreeing attempts, not weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

ANSWER_MIN = 0
ANSWER_MAX = 99999

# Weight used for answered attempts that carry no entropy signal. A missing
# confidence signal must not masquerade as maximal confidence, so the
# neutral default is entropy 1.0, not 0.
NEUTRAL_ENTROPY = 1.0

WEIGHT_TIE_EPS = 1e-9

DEFAULT_QUORUM = 4
DEFAULT_TRIVIAL_MAX = 1

FALLBACK_ANSWER = 0


class AttemptStatus(str, Enum):
    COMPLETED = "completed"
    TIMED_OUT = "timed_out"
    CANCELLED = "cancelled"
    FAILED = "failed"


@dataclass(frozen=True)
class AttemptResult:
    """Outcome of one inference attempt."""

    answer: int | None
    entropy: float | None
    status: AttemptStatus
    latency_s: float
    strategy: str
    seed: int
    turns: int = 0

    def __post_init__(self):
        if self.answer is not None:
            if self.status is not AttemptStatus.COMPLETED:
                raise ValueError(
                    f"answered attempt must be completed, got {self.status}"
                )
            if not ANSWER_MIN <= self.answer <= ANSWER_MAX:
                raise ValueError(f"answer {self.answer} outside "
                                 f"[{ANSWER_MIN}, {ANSWER_MAX}]")
        elif self.entropy is not None:
            raise ValueError("entropy requires an answer")
        if self.entropy is not None and self.entropy < 0:
            raise ValueError(f"entropy must be >= 0, got {self.entropy}")


@dataclass
class TallyEntry:
    answer: int
    vote_count: int = 0
    total_weight: float = 0.0
    attempt_ids: list[int] = field(default_factory=list)


@dataclass
class VoteTally:
    """Aggregated weighted votes per candidate answer."""

    entries: dict[int, TallyEntry] = field(default_factory=dict)

    @property
    def total_votes(self) -> int:
        return sum(e.vote_count for e in self.entries.values())


def entropy_weight(entropy: float) -> float:
    """Vote weight for an attempt with the given entropy (nats).

    Strictly decreasing; 11.0 at perfect confidence, asymptotically 1.
    """
    if entropy < 0:
        raise ValueError(f"entropy must be >= 0, got {entropy}")
    return 1.0 + 1.0 / (entropy + 0.1)


def attempt_entropy(token_distributions: list[list[tuple[str, float]]]) -> float:
    """Mean per-token Shannon entropy (nats) of an attempt's final message.

    Each element is the top-k ``(token, log_probability)`` alternatives
    reported for one generated token. The top-k probabilities are
    renormalized to sum to 1 before the entropy is taken, and the mean is
    over tokens. No tokens means entropy 0.
    """
    if not token_distributions:
        return 0.0
    per_token = []
    for dist in token_distributions:
        if not dist:
            raise ValueError("empty token distribution")
        logps = [lp for _, lp in dist]
        if any(not math.isfinite(lp) for lp in logps):
            raise ValueError(f"non-finite log-probability in {dist!r}")
        # softmax over the reported alternatives
        m = max(logps)
        weights = [math.exp(lp - m) for lp in logps]
        z = sum(weights)
        probs = [w / z for w in weights]
        per_token.append(-sum(p * math.log(p) for p in probs if p > 0.0))
    return sum(per_token) / len(per_token)


def tally(attempts: list[AttemptResult]) -> VoteTally:
    """Aggregate completed, answered attempts into weighted votes.

    Attempts without an entropy signal vote with the neutral default
    weight (entropy 1.0). Non-completed or unanswered attempts are
    ignored.
    """
    result = VoteTally()
    for idx, attempt in enumerate(attempts):
        if attempt.status is not AttemptStatus.COMPLETED or attempt.answer is None:
            continue
        entropy = attempt.entropy if attempt.entropy is not None else NEUTRAL_ENTROPY
        entry = result.entries.setdefault(attempt.answer, TallyEntry(attempt.answer))
        entry.vote_count += 1
        entry.total_weight += entropy_weight(entropy)
        entry.attempt_ids.append(idx)
    return result


def select_final(t: VoteTally) -> int:
    """Winning answer: highest total weight, ties by votes, then value.

    Weights within 1e-9 of the maximum count as tied; among tied answers
    the higher vote count wins, then the smaller answer value. An empty
    tally yields the pipeline fallback answer 0.
    """
    if not t.entries:
        return FALLBACK_ANSWER
    best: TallyEntry | None = None
    for entry in t.entries.values():
        if best is None or _beats(entry, best):
            best = entry
    assert best is not None
    return best.answer


def _beats(candidate: TallyEntry, incumbent: TallyEntry) -> bool:
    if candidate.total_weight > incumbent.total_weight + WEIGHT_TIE_EPS:
        return True
    if candidate.total_weight < incumbent.total_weight - WEIGHT_TIE_EPS:
        return False
    if candidate.vote_count != incumbent.vote_count:
        return candidate.vote_count > incumbent.vote_count
    return candidate.answer < incumbent.answer


def early_stop_check(
    attempts_so_far: list[AttemptResult],
    quorum: int = DEFAULT_QUORUM,
    trivial_max: int = DEFAULT_TRIVIAL_MAX,
) -> int | None:
    """Answer that has reached an unweighted quorum, if any.

    Only completed attempts count, and only answers strictly above
    ``trivial_max`` can stop early (trivially small answers are a common
    failure mode, not a consensus). If several answers qualify at once the
    most-voted, then smallest, wins — incremental callers never see that
    case because they check after every completion.
    """
    if quorum < 1:
        raise ValueError(f"quorum must be >= 1, got {quorum}")
    counts: dict[int, int] = {}
    for attempt in attempts_so_far:
        if attempt.status is not AttemptStatus.COMPLETED or attempt.answer is None:
            continue
        if attempt.answer <= trivial_max:
            continue
        counts[attempt.answer] = counts.get(attempt.answer, 0) + 1
    qualifying = [(c, -a) for a, c in counts.items() if c >= quorum]
    if not qualifying:
        return None
    return -max(qualifying)[1]
