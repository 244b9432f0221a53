"""Worker child process: a persistent namespace that executes code requests.

Each worker owns one Python namespace that survives across requests (the
"persistent kernel" contract) until a reset. Execution is interrupted by a
SIGALRM-based timer, stdout/stderr are captured with a hard per-stream cap,
and the worker runs with networking disabled inside its own scratch
directory. Crashes are the parent's problem: the pool respawns.
"""

from __future__ import annotations

import io
import signal
import time
import traceback
from contextlib import redirect_stderr, redirect_stdout

OUTPUT_CAP_BYTES = 16 * 1024
DEFAULT_LIBS = ("math", "itertools", "sympy", "numpy", "mpmath")


class ExecutionTimeout(BaseException):
    """Raised by the SIGALRM handler inside a running exec."""


class CappedWriter(io.TextIOBase):
    """Write sink that keeps at most ``cap`` bytes and flags the overflow."""

    def __init__(self, cap: int = OUTPUT_CAP_BYTES):
        self.cap = cap
        self._chunks: list[str] = []
        self._size = 0
        self.truncated = False

    def writable(self) -> bool:
        return True

    def write(self, text: str) -> int:
        if self._size < self.cap:
            room = self.cap - self._size
            kept = text[:room]
            self._chunks.append(kept)
            self._size += len(kept)
            if len(kept) < len(text):
                self.truncated = True
        elif text:
            self.truncated = True
        return len(text)

    @property
    def value(self) -> str:
        return "".join(self._chunks)


def _raise_timeout(signum, frame):
    raise ExecutionTimeout()


def _disable_network() -> None:
    import socket

    def refused(*args, **kwargs):
        raise OSError("network access is disabled inside the sandbox")

    socket.socket = refused  # type: ignore[misc]
    socket.create_connection = refused  # type: ignore[misc]
    socket.socketpair = refused  # type: ignore[misc]


def build_namespace(libs: tuple[str, ...]) -> dict:
    namespace: dict = {"__name__": "__sandbox__", "__builtins__": __builtins__}
    for name in libs:
        try:
            namespace[name] = __import__(name)
        except ImportError:
            pass  # missing optional library; code importing it will say so
    return namespace


def worker_main(conn, libs: tuple[str, ...], workdir: str) -> None:
    """Request loop; runs until the pipe closes or a stop op arrives."""
    import os
    import tempfile

    os.makedirs(workdir, exist_ok=True)
    os.chdir(workdir)
    tempfile.tempdir = workdir
    _disable_network()
    signal.signal(signal.SIGALRM, _raise_timeout)

    base = build_namespace(libs)
    namespace = dict(base)

    while True:
        try:
            request = conn.recv()
        except (EOFError, OSError, KeyboardInterrupt):
            break
        op = request.get("op")
        if op == "stop":
            break
        if op == "reset":
            namespace = dict(base)
            conn.send({"ok": True})
            continue
        conn.send(_execute(request, namespace))


def _execute(request: dict, namespace: dict) -> dict:
    stdout = CappedWriter()
    stderr = CappedWriter()
    status = "ok"
    timeout_s = float(request.get("timeout_s", 6.0))
    started = time.monotonic()
    try:
        code = compile(request["code"], "<sandbox>", "exec")
        signal.setitimer(signal.ITIMER_REAL, timeout_s)
        try:
            with redirect_stdout(stdout), redirect_stderr(stderr):
                exec(code, namespace)
        finally:
            signal.setitimer(signal.ITIMER_REAL, 0.0)
    except ExecutionTimeout:
        status = "timeout"
    except BaseException:
        status = "error"
        stderr.write(traceback.format_exc(limit=20))
    elapsed = time.monotonic() - started
    if status == "timeout":
        elapsed = max(elapsed, timeout_s)  # contract: timeout implies >= limit
    return {
        "id": request.get("id"),
        "stdout": stdout.value,
        "stderr": stderr.value,
        "status": status,
        "elapsed_s": elapsed,
        "truncated": stdout.truncated or stderr.truncated,
    }
