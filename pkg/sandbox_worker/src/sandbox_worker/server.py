"""Socket front end: newline-delimited JSON, one connection per lease.

Protocol, per line:

* ``{"op": "acquire", "timeout_s": 3}`` -> ``{"op": "acquire", "ok": true,
  "worker": 3}`` or ``{"ok": false, "error": "acquire_timeout"}``. The
  worker stays bound to this connection until released.
* ``{"id": "...", "code": "...", "timeout_s": 6}`` -> ``{"id", "stdout",
  "stderr", "status", "elapsed_s", "truncated"}``. Requires a lease; ids
  must be unique per connection; code must be non-empty.
* ``{"op": "reset"}`` -> ``{"ok": true}`` with a fresh namespace.
* ``{"op": "release"}`` -> ``{"ok": true}``; closing the socket releases too.
* ``{"op": "shutdown"}`` -> ``{"ok": true}`` and stops the server.
"""

from __future__ import annotations

import argparse
import json
import socketserver
import sys
import threading

from .pool import ACQUIRE_TIMEOUT_S, EXEC_TIMEOUT_S, WorkerPool
from .worker import DEFAULT_LIBS


class _Handler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        pool: WorkerPool = self.server.pool  # type: ignore[attr-defined]
        leased: int | None = None
        seen_ids: set[str] = set()
        try:
            for raw in self.rfile:
                line = raw.strip()
                if not line:
                    continue
                try:
                    message = json.loads(line)
                except json.JSONDecodeError as exc:
                    self._send({"ok": False, "error": f"bad json: {exc}"})
                    continue
                reply, leased, done = self._dispatch(pool, message, leased, seen_ids)
                self._send(reply)
                if done:
                    break
        finally:
            if leased is not None:
                pool.release(leased)

    def _dispatch(self, pool, message, leased, seen_ids):
        op = message.get("op")
        if op == "acquire":
            if leased is not None:
                return {"op": "acquire", "ok": False,
                        "error": "connection already holds a lease"}, leased, False
            timeout = float(message.get("timeout_s", ACQUIRE_TIMEOUT_S))
            worker = pool.acquire(timeout)
            if worker is None:
                return {"op": "acquire", "ok": False,
                        "error": "acquire_timeout"}, None, False
            return {"op": "acquire", "ok": True, "worker": worker}, worker, False
        if op == "release":
            if leased is not None:
                pool.release(leased)
            return {"op": "release", "ok": True}, None, False
        if op == "reset":
            if leased is None:
                return {"op": "reset", "ok": False, "error": "no lease"}, None, False
            pool.reset(leased)
            return {"op": "reset", "ok": True}, leased, False
        if op == "shutdown":
            threading.Thread(target=self.server.shutdown, daemon=True).start()
            return {"op": "shutdown", "ok": True}, leased, True
        if op is not None:
            return {"ok": False, "error": f"unknown op {op!r}"}, leased, False

        # execution request
        request_id = message.get("id")
        code = message.get("code", "")
        if leased is None:
            return {"id": request_id, "ok": False,
                    "error": "no lease; send acquire first"}, None, False
        if not isinstance(request_id, str) or not request_id:
            return {"ok": False, "error": "missing request id"}, leased, False
        if request_id in seen_ids:
            return {"id": request_id, "ok": False,
                    "error": "duplicate request id on this connection"}, leased, False
        if not code:
            return {"id": request_id, "ok": False,
                    "error": "empty code"}, leased, False
        seen_ids.add(request_id)
        timeout = float(message.get("timeout_s", EXEC_TIMEOUT_S))
        return pool.execute(leased, request_id, code, timeout), leased, False

    def _send(self, payload: dict) -> None:
        self.wfile.write(json.dumps(payload).encode() + b"\n")
        self.wfile.flush()


class SandboxServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address, pool: WorkerPool):
        super().__init__(address, _Handler)
        self.pool = pool


def serve(host: str, port: int, pool: WorkerPool) -> SandboxServer:
    """Start serving in a background thread; returns the live server."""
    server = SandboxServer((host, port), pool)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        description="Pooled persistent Python execution workers over ND-JSON.",
    )
    parser.add_argument("--workers", type=int, default=8)
    parser.add_argument("--port", type=int, default=8765)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--libs", default=",".join(DEFAULT_LIBS),
                        help="comma-separated modules preloaded into workers")
    args = parser.parse_args(argv)

    libs = tuple(name.strip() for name in args.libs.split(",") if name.strip())
    pool = WorkerPool(n_workers=args.workers, libs=libs)
    server = SandboxServer((args.host, args.port), pool)
    print(f"sandbox-worker: {args.workers} workers on {args.host}:{server.server_address[1]}",
          flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
        pool.shutdown()
    return 0


if __name__ == "__main__":
    sys.exit(main())
