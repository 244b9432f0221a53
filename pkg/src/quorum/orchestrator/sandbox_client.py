"""Client side of the code-execution worker protocol.

Newline-delimited JSON over a local TCP socket, one connection per lease:
``{"op": "acquire"}`` binds an exclusive worker to the connection (or
reports a timeout), exec requests ``{"id", "code", "timeout_s"}`` run on
that worker, ``{"op": "reset"}`` clears its namespace, and ``{"op":
"release"}`` (or simply closing the socket) frees it. Keeping the lease on
the connection means a crashed client can never leak a worker.
"""

from __future__ import annotations

import json
import socket
import uuid

from .toolloop import ExecOutcome, SandboxLease, SandboxPool


class SandboxProtocolError(RuntimeError):
    pass


class _Connection:
    def __init__(self, host: str, port: int, connect_timeout_s: float = 5.0):
        self.sock = socket.create_connection((host, port), timeout=connect_timeout_s)
        self._buffer = b""

    def send(self, message: dict) -> None:
        self.sock.sendall(json.dumps(message).encode() + b"\n")

    def recv(self, timeout_s: float) -> dict:
        self.sock.settimeout(timeout_s)
        while b"\n" not in self._buffer:
            chunk = self.sock.recv(65536)
            if not chunk:
                raise SandboxProtocolError("sandbox connection closed")
            self._buffer += chunk
        line, self._buffer = self._buffer.split(b"\n", 1)
        return json.loads(line)

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass


class TcpSandboxLease(SandboxLease):
    def __init__(self, connection: _Connection, worker_id: int):
        self._conn = connection
        self.worker_id = worker_id

    def execute(self, code: str, timeout_s: float) -> ExecOutcome:
        request_id = uuid.uuid4().hex
        self._conn.send({"id": request_id, "code": code, "timeout_s": timeout_s})
        # generous margin over the worker-side timeout
        reply = self._conn.recv(timeout_s + 10.0)
        if reply.get("id") != request_id:
            raise SandboxProtocolError(
                f"response id {reply.get('id')!r} does not match {request_id!r}"
            )
        return ExecOutcome(
            stdout=reply.get("stdout", ""),
            stderr=reply.get("stderr", ""),
            status=reply.get("status", "error"),
            elapsed_s=reply.get("elapsed_s", 0.0),
            truncated=reply.get("truncated", False),
        )

    def reset(self) -> None:
        self._conn.send({"op": "reset"})
        reply = self._conn.recv(10.0)
        if not reply.get("ok"):
            raise SandboxProtocolError(f"reset failed: {reply}")

    def release(self) -> None:
        try:
            self._conn.send({"op": "release"})
        except OSError:
            pass
        self._conn.close()


class TcpSandboxPool(SandboxPool):
    """Acquires leases from a running worker-pool server."""

    def __init__(self, host: str = "127.0.0.1", port: int = 8765):
        self.host = host
        self.port = port

    def acquire(self, timeout_s: float) -> TcpSandboxLease | None:
        try:
            conn = _Connection(self.host, self.port)
            conn.send({"op": "acquire", "timeout_s": timeout_s})
            reply = conn.recv(timeout_s + 5.0)
        except (OSError, SandboxProtocolError):
            return None
        if not reply.get("ok"):
            conn.close()
            return None
        return TcpSandboxLease(conn, reply["worker"])
