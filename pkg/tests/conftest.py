"""Shared fixtures: a scripted OpenAI-compatible chat stub over real HTTP."""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest


class FakeModelServer:
    """Tiny chat-completions endpoint with pluggable behavior.

    Behaviors:
      * ``boxed`` — every reply is a final message with ``\\boxed{<answer>}``
        and top-logprobs for two tokens.
      * ``tool_then_boxed`` — first turn of a conversation requests a
        ``run_python`` call; once a tool message is present the reply boxes
        whatever the tool printed.
      * ``sleep`` — hold the request long enough to trip client timeouts.
    """

    def __init__(self, behavior="boxed", answer=42, sleep_s=2.0):
        self.behavior = behavior
        self.answer = answer
        self.sleep_s = sleep_s
        self.requests_seen = []
        server = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_GET(self):
                if self.path.endswith("/models"):
                    self._reply({"object": "list", "data": [{"id": "stub"}]})
                else:
                    self.send_error(404)

            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                payload = json.loads(self.rfile.read(length) or b"{}")
                server.requests_seen.append(payload)
                if server.behavior == "sleep":
                    time.sleep(server.sleep_s)
                self._reply(server.respond(payload))

            def _reply(self, body):
                data = json.dumps(body).encode()
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

        class Server(ThreadingHTTPServer):
            daemon_threads = True  # sleeping handlers must not block shutdown
            block_on_close = False

        self._httpd = Server(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)

    def respond(self, payload) -> dict:
        messages = payload.get("messages", [])
        tool_outputs = [m["content"] for m in messages if m.get("role") == "tool"]
        if self.behavior == "tool_then_boxed" and not tool_outputs:
            message = {
                "role": "assistant",
                "content": None,
                "tool_calls": [
                    {
                        "id": "call_1",
                        "type": "function",
                        "function": {
                            "name": "run_python",
                            "arguments": json.dumps({"code": "print(6*7)"}),
                        },
                    }
                ],
            }
            logprobs = None
        else:
            if self.behavior == "tool_then_boxed":
                digits = "".join(c for c in tool_outputs[-1] if c.isdigit()) or "0"
                answer = int(digits[:5])
            else:
                answer = self.answer
            message = {"role": "assistant",
                       "content": f"The answer is \\boxed{{{answer}}}."}
            logprobs = {
                "content": [
                    {
                        "token": "The",
                        "logprob": -0.1,
                        "top_logprobs": [
                            {"token": "The", "logprob": -0.1},
                            {"token": "A", "logprob": -2.4},
                        ],
                    }
                ]
            }
        choice = {"index": 0, "message": message, "finish_reason": "stop"}
        if logprobs is not None:
            choice["logprobs"] = logprobs
        return {"id": "cmpl-stub", "object": "chat.completion", "choices": [choice]}

    @property
    def base_url(self) -> str:
        host, port = self._httpd.server_address
        return f"http://{host}:{port}/v1"

    def __enter__(self):
        self._thread.start()
        return self

    def __exit__(self, *exc):
        self._httpd.shutdown()
        self._httpd.server_close()


@pytest.fixture
def fake_model():
    def factory(**kwargs):
        return FakeModelServer(**kwargs)

    return factory
