"""Multi-turn tool-call loop for one inference attempt.

The model alternates between reasoning turns and code-execution requests;
code runs in a pooled sandbox worker with strict acquire and execution
timeouts, and its output feeds back as a tool message. The loop ends on a
final answer, the turn cap, the attempt deadline, or cancellation, and the
answer is the last well-formed boxed integer anywhere in the transcript.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Protocol

from ..voting import ANSWER_MAX, ANSWER_MIN, attempt_entropy

MAX_TURNS = 128
SANDBOX_ACQUIRE_TIMEOUT_S = 3.0
SANDBOX_EXEC_TIMEOUT_S = 6.0

_BOXED = re.compile(r"\\boxed\{([^{}]*)\}")
_INT = re.compile(r"^\s*\+?(\d+)\s*$")


def extract_boxed_answer(text: str | None) -> int | None:
    """Last boxed integer in [0, 99999]; malformed or out-of-range boxes
    are skipped, and models that revise get their final word."""
    if not text:
        return None
    answer = None
    for match in _BOXED.finditer(text):
        digits = _INT.match(match.group(1))
        if not digits:
            continue
        value = int(digits.group(1))
        if ANSWER_MIN <= value <= ANSWER_MAX:
            answer = value
    return answer


@dataclass(frozen=True)
class ExecOutcome:
    stdout: str
    stderr: str
    status: str  # ok | error | timeout
    elapsed_s: float = 0.0
    truncated: bool = False


class SandboxLease(Protocol):
    def execute(self, code: str, timeout_s: float) -> ExecOutcome: ...
    def reset(self) -> None: ...
    def release(self) -> None: ...


class SandboxPool(Protocol):
    def acquire(self, timeout_s: float) -> SandboxLease | None: ...


class NullSandbox:
    """No sandbox deployed: every acquire times out."""

    def acquire(self, timeout_s: float) -> SandboxLease | None:
        return None


@dataclass(frozen=True)
class ToolCall:
    id: str
    code: str


@dataclass(frozen=True)
class ModelTurn:
    """One assistant turn as seen by the loop, backend-agnostic."""

    content: str | None = None
    tool_calls: tuple[ToolCall, ...] = ()
    logprobs: list[list[tuple[str, float]]] | None = None


ChatFn = Callable[[list[dict], int, float], ModelTurn]


@dataclass
class ToolLoopState:
    messages: list[dict] = field(default_factory=list)
    turn_count: int = 0
    lease: SandboxLease | None = None


@dataclass(frozen=True)
class ToolLoopOutcome:
    answer: int | None
    entropy: float | None
    turns: int
    messages: list[dict]
    ended_by: str  # answer | no_tool_call | max_turns | deadline | cancelled


def _render_exec(outcome: ExecOutcome) -> str:
    parts = []
    if outcome.status == "timeout":
        parts.append(f"[execution timed out after {SANDBOX_EXEC_TIMEOUT_S:g}s; "
                     "partial output follows]")
    if outcome.stdout:
        parts.append(outcome.stdout)
    if outcome.stderr:
        parts.append(f"stderr:\n{outcome.stderr}")
    if outcome.truncated:
        parts.append("[output truncated]")
    return "\n".join(parts) if parts else "(no output)"


def run_tool_loop(
    chat: ChatFn,
    system_prompt: str,
    user_prompt: str,
    seed: int,
    deadline: float,
    clock,
    sandbox: SandboxPool | None = None,
    max_turns: int = MAX_TURNS,
    cancelled: Callable[[], bool] | None = None,
) -> ToolLoopOutcome:
    """Drive one attempt to completion.

    ``chat`` maps (messages, seed, remaining_s) to the next model turn.
    The sandbox lease is acquired on the first code request and held for
    the whole attempt so state persists across its executions; it is reset
    and released when the attempt ends, whatever the reason.
    """
    sandbox = sandbox or NullSandbox()
    state = ToolLoopState(
        messages=[
            {"role": "system", "content": system_prompt},
            {"role": "user", "content": user_prompt},
        ]
    )
    final_logprobs: list[list[tuple[str, float]]] | None = None
    ended_by = "max_turns"

    try:
        while state.turn_count < max_turns:
            if cancelled is not None and cancelled():
                ended_by = "cancelled"
                break
            remaining = deadline - clock.now()
            if remaining <= 0:
                ended_by = "deadline"
                break

            turn = chat(state.messages, seed, remaining)
            state.turn_count += 1

            message: dict = {"role": "assistant", "content": turn.content or ""}
            if turn.tool_calls:
                message["tool_calls"] = [
                    {
                        "id": call.id,
                        "type": "function",
                        "function": {"name": "run_python",
                                     "arguments": f'{{"code": {call.code!r}}}'},
                    }
                    for call in turn.tool_calls
                ]
            state.messages.append(message)
            if turn.content:
                final_logprobs = turn.logprobs

            if not turn.tool_calls:
                ended_by = "no_tool_call"
                break

            # at most one pending tool call per attempt
            call = turn.tool_calls[0]
            state.messages.append(
                {
                    "role": "tool",
                    "tool_call_id": call.id,
                    "content": _run_code(state, sandbox, call.code),
                }
            )
    finally:
        if state.lease is not None:
            try:
                state.lease.reset()  # next problem must not see this state
                state.lease.release()
            except Exception:
                pass
            state.lease = None

    answer = None
    for message in state.messages:
        if message["role"] != "assistant":
            continue
        boxed = extract_boxed_answer(message.get("content"))
        if boxed is not None:
            answer = boxed
    if answer is not None and ended_by == "no_tool_call":
        ended_by = "answer"

    entropy = None
    if answer is not None and final_logprobs:
        try:
            entropy = attempt_entropy(final_logprobs)
        except ValueError:
            entropy = None
    return ToolLoopOutcome(
        answer=answer,
        entropy=entropy,
        turns=state.turn_count,
        messages=state.messages,
        ended_by=ended_by,
    )


def _run_code(state: ToolLoopState, sandbox: SandboxPool, code: str) -> str:
    if state.lease is None:
        state.lease = sandbox.acquire(timeout_s=SANDBOX_ACQUIRE_TIMEOUT_S)
    if state.lease is None:
        return (f"sandbox unavailable: no worker within "
                f"{SANDBOX_ACQUIRE_TIMEOUT_S:g}s, try reasoning without code")
    try:
        outcome = state.lease.execute(code, timeout_s=SANDBOX_EXEC_TIMEOUT_S)
    except Exception as exc:
        return f"sandbox error: {exc}"
    return _render_exec(outcome)
