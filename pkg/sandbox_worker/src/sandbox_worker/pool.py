"""Worker pool: spawn, lease, execute with a hard backstop, respawn.

The pool owns a fixed set of worker processes. Leases are exclusive (a
queue of free worker ids), executions are serialized per worker, and a
worker that stops answering — or dies outright — is killed and respawned
without taking the pool down. The in-child alarm normally enforces the
execution timeout; the parent-side backstop guarantees a response within
one extra second even for code the child cannot interrupt.
"""

from __future__ import annotations

import multiprocessing as mp
import queue
import tempfile
import threading
from pathlib import Path

from .worker import DEFAULT_LIBS, worker_main

ACQUIRE_TIMEOUT_S = 3.0
EXEC_TIMEOUT_S = 6.0
BACKSTOP_MARGIN_S = 0.9

_mp = mp.get_context("spawn")  # no forked locks from a threaded server


class WorkerHandle:
    """One worker process plus its pipe; serialized by a lock."""

    def __init__(self, worker_id: int, libs: tuple[str, ...], workdir: Path):
        self.worker_id = worker_id
        self.libs = libs
        self.workdir = workdir
        self.lock = threading.Lock()
        self.process: mp.Process | None = None
        self.conn = None
        self.spawn()

    def spawn(self) -> None:
        parent_conn, child_conn = _mp.Pipe(duplex=True)
        process = _mp.Process(
            target=worker_main,
            args=(child_conn, self.libs, str(self.workdir)),
            daemon=True,
        )
        process.start()
        child_conn.close()
        self.process = process
        self.conn = parent_conn

    def alive(self) -> bool:
        return self.process is not None and self.process.is_alive()

    def kill(self) -> None:
        if self.process is not None:
            self.process.kill()
            self.process.join(timeout=2.0)
        if self.conn is not None:
            self.conn.close()
        self.process = None
        self.conn = None

    def _respawn(self) -> None:
        self.kill()
        self.spawn()

    def execute(self, request_id: str, code: str,
                timeout_s: float = EXEC_TIMEOUT_S) -> dict:
        with self.lock:
            if not self.alive():
                self._respawn()
            try:
                self.conn.send({"id": request_id, "code": code,
                                "timeout_s": timeout_s})
                if self.conn.poll(timeout_s + BACKSTOP_MARGIN_S):
                    return self.conn.recv()
            except (BrokenPipeError, EOFError, OSError):
                self._respawn()
                return {
                    "id": request_id, "stdout": "", "stderr": "worker crashed during execution",
                    "status": "error", "elapsed_s": 0.0, "truncated": False,
                }
            # child never answered: uninterruptible code; replace the worker
            self._respawn()
            return {
                "id": request_id, "stdout": "",
                "stderr": "worker killed: execution exceeded the timeout and "
                          "could not be interrupted",
                "status": "timeout", "elapsed_s": timeout_s, "truncated": False,
            }

    def reset(self) -> None:
        with self.lock:
            if not self.alive():
                self._respawn()  # fresh namespace by construction
                return
            try:
                self.conn.send({"op": "reset"})
                if self.conn.poll(5.0):
                    reply = self.conn.recv()
                    if reply.get("ok"):
                        return
            except (BrokenPipeError, EOFError, OSError):
                pass
            self._respawn()

    def stop(self) -> None:
        with self.lock:
            try:
                if self.alive():
                    self.conn.send({"op": "stop"})
                    self.process.join(timeout=1.0)
            except (BrokenPipeError, OSError):
                pass
            self.kill()


class WorkerPool:
    """Fixed pool of persistent workers with exclusive leases."""

    def __init__(self, n_workers: int = 8, libs: tuple[str, ...] = DEFAULT_LIBS,
                 temp_root: str | None = None):
        if n_workers < 1:
            raise ValueError("need at least one worker")
        self._temp = tempfile.TemporaryDirectory(prefix="sandbox-pool-",
                                                 dir=temp_root)
        root = Path(self._temp.name)
        self.workers = [
            WorkerHandle(i, tuple(libs), root / f"worker-{i}")
            for i in range(n_workers)
        ]
        self._free: queue.Queue[int] = queue.Queue()
        for worker in self.workers:
            self._free.put(worker.worker_id)
        self._closed = False

    @property
    def size(self) -> int:
        return len(self.workers)

    def live_workers(self) -> int:
        return sum(worker.alive() for worker in self.workers)

    def acquire(self, timeout_s: float = ACQUIRE_TIMEOUT_S) -> int | None:
        if self._closed:
            raise RuntimeError("pool is shut down")
        try:
            return self._free.get(timeout=timeout_s)
        except queue.Empty:
            return None

    def release(self, worker_id: int) -> None:
        if not 0 <= worker_id < len(self.workers):
            raise ValueError(f"unknown worker {worker_id}")
        self._free.put(worker_id)

    def execute(self, worker_id: int, request_id: str, code: str,
                timeout_s: float = EXEC_TIMEOUT_S) -> dict:
        return self.workers[worker_id].execute(request_id, code, timeout_s)

    def reset(self, worker_id: int) -> None:
        self.workers[worker_id].reset()

    def shutdown(self) -> None:
        if self._closed:
            return
        self._closed = True
        for worker in self.workers:
            worker.stop()
        self._temp.cleanup()
