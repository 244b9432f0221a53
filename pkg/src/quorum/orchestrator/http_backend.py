"""Live attempt backend over an OpenAI-compatible chat-completions API.

Each attempt runs the tool loop in its own thread against the endpoint,
with a per-request seed and the sampling block (temperature, min_p, top
logprobs) sent on every call. Requests carry a single code-execution tool;
tool rounds execute through the sandbox pool. Cancellation is cooperative:
the thread checks its flag at every turn boundary.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field

import requests

from ..clock import SystemClock
from ..voting import AttemptResult, AttemptStatus
from .backend import AttemptHandle, ContestProblem
from .prompts import StrategyPromptSet, default_prompts
from .toolloop import (
    MAX_TURNS,
    ModelTurn,
    NullSandbox,
    SandboxPool,
    ToolCall,
    run_tool_loop,
)

CODE_TOOL = {
    "type": "function",
    "function": {
        "name": "run_python",
        "description": "Execute Python code in the persistent math sandbox "
                       "(sympy, numpy, mpmath available) and return its output.",
        "parameters": {
            "type": "object",
            "properties": {
                "code": {"type": "string", "description": "Python source to run"},
            },
            "required": ["code"],
        },
    },
}


@dataclass(frozen=True)
class SamplingConfig:
    temperature: float = 1.0
    min_p: float = 0.02
    top_logprobs: int = 5
    max_turns: int = MAX_TURNS
    max_tokens: int | None = None


class BackendUnreachable(RuntimeError):
    pass


@dataclass
class OpenAiChatClient:
    """Minimal chat-completions client speaking the tool-call wire format."""

    base_url: str
    model: str = "gpt-oss"
    api_key_env: str | None = None
    session_timeout_s: float = 960.0
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    session: requests.Session = field(default_factory=requests.Session)

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_key_env:
            key = os.environ.get(self.api_key_env, "")
            if key:
                headers["Authorization"] = f"Bearer {key}"
        return headers

    def health_check(self) -> bool:
        try:
            response = self.session.get(
                f"{self.base_url.rstrip('/')}/models",
                headers=self._headers(),
                timeout=10.0,
            )
            return response.ok
        except requests.RequestException:
            return False

    def chat(self, messages: list[dict], seed: int, remaining_s: float) -> ModelTurn:
        payload = {
            "model": self.model,
            "messages": messages,
            "temperature": self.sampling.temperature,
            "min_p": self.sampling.min_p,
            "seed": seed,
            "tools": [CODE_TOOL],
        }
        if self.sampling.top_logprobs > 0:
            payload["logprobs"] = True
            payload["top_logprobs"] = self.sampling.top_logprobs
        if self.sampling.max_tokens is not None:
            payload["max_tokens"] = self.sampling.max_tokens
        timeout = max(0.05, min(self.session_timeout_s, remaining_s))
        response = self.session.post(
            f"{self.base_url.rstrip('/')}/chat/completions",
            json=payload,
            headers=self._headers(),
            timeout=timeout,
        )
        response.raise_for_status()
        return parse_chat_response(response.json())


def parse_chat_response(data: dict) -> ModelTurn:
    choice = data["choices"][0]
    message = choice.get("message", {})
    tool_calls = []
    for raw in message.get("tool_calls") or []:
        arguments = raw.get("function", {}).get("arguments", "{}")
        try:
            code = json.loads(arguments).get("code", "")
        except json.JSONDecodeError:
            code = arguments  # some servers send bare code strings
        tool_calls.append(ToolCall(id=raw.get("id", "call_0"), code=code))

    logprobs = None
    content_logprobs = (choice.get("logprobs") or {}).get("content")
    if content_logprobs:
        logprobs = []
        for token_info in content_logprobs:
            top = token_info.get("top_logprobs") or []
            dist = [(t.get("token", ""), float(t["logprob"])) for t in top]
            if not dist and "logprob" in token_info:
                dist = [(token_info.get("token", ""), float(token_info["logprob"]))]
            if dist:
                logprobs.append(dist)
    return ModelTurn(
        content=message.get("content"),
        tool_calls=tuple(tool_calls),
        logprobs=logprobs,
    )


class _ThreadHandle:
    def __init__(self, thread: threading.Thread, cancel_event: threading.Event,
                 result_box: dict):
        self._thread = thread
        self._cancel = cancel_event
        self._box = result_box

    def poll(self) -> AttemptResult | None:
        if self._thread.is_alive():
            return None
        return self._box.get("result")

    def cancel(self) -> None:
        self._cancel.set()

    def eta(self) -> float | None:
        return None


@dataclass
class HttpAttemptBackend:
    """Runs attempts as tool-loop threads against a chat endpoint."""

    client: OpenAiChatClient
    prompts: StrategyPromptSet = field(default_factory=default_prompts)
    sandbox: SandboxPool = field(default_factory=NullSandbox)
    clock: SystemClock = field(default_factory=SystemClock)

    def begin_problem(self, problem: ContestProblem, n_attempts: int) -> None:
        pass

    def start_attempt(
        self,
        problem: ContestProblem,
        strategy: str,
        seed: int,
        deadline: float,
    ) -> AttemptHandle:
        system_prompt = self.prompts.system(strategy)
        user_prompt = self.prompts.user_message(str(problem.payload))
        cancel_event = threading.Event()
        box: dict = {}

        def work():
            started = self.clock.now()
            try:
                outcome = run_tool_loop(
                    self.client.chat,
                    system_prompt,
                    user_prompt,
                    seed,
                    deadline,
                    self.clock,
                    sandbox=self.sandbox,
                    max_turns=self.client.sampling.max_turns,
                    cancelled=cancel_event.is_set,
                )
                latency = self.clock.now() - started
                if cancel_event.is_set():
                    box["result"] = AttemptResult(
                        None, None, AttemptStatus.CANCELLED, latency,
                        strategy, seed, turns=outcome.turns,
                    )
                else:
                    box["result"] = AttemptResult(
                        answer=outcome.answer,
                        entropy=outcome.entropy,
                        status=AttemptStatus.COMPLETED,
                        latency_s=latency,
                        strategy=strategy,
                        seed=seed,
                        turns=outcome.turns,
                    )
            except Exception:
                box["result"] = AttemptResult(
                    None, None, AttemptStatus.FAILED,
                    self.clock.now() - started, strategy, seed,
                )

        thread = threading.Thread(target=work, daemon=True)
        thread.start()
        return _ThreadHandle(thread, cancel_event, box)
