"""Wire protocol over a live socket, including the upstream client."""

from __future__ import annotations

import json
import socket

import pytest

from sandbox_worker import WorkerPool, serve


@pytest.fixture(scope="module")
def server():
    pool = WorkerPool(n_workers=2, libs=("math",))
    server = serve("127.0.0.1", 0, pool)
    yield server
    server.shutdown()
    server.server_close()
    pool.shutdown()


class LineClient:
    """Bare ND-JSON client used to exercise the protocol directly."""

    def __init__(self, server):
        host, port = server.server_address
        self.sock = socket.create_connection((host, port), timeout=15)
        self.file = self.sock.makefile("rwb")

    def call(self, message: dict) -> dict:
        self.file.write(json.dumps(message).encode() + b"\n")
        self.file.flush()
        return json.loads(self.file.readline())

    def close(self):
        self.file.close()  # makefile holds the fd; close it to EOF the server
        self.sock.close()


@pytest.fixture
def client(server):
    client = LineClient(server)
    yield client
    client.close()


class TestProtocol:
    def test_acquire_exec_release_cycle(self, client):
        reply = client.call({"op": "acquire", "timeout_s": 3})
        assert reply["ok"] and reply["worker"] in (0, 1)
        result = client.call({"id": "r1", "code": "print(6*7)", "timeout_s": 6})
        assert result["id"] == "r1"
        assert result["status"] == "ok"
        assert result["stdout"] == "42\n"
        assert set(result) >= {"id", "stdout", "stderr", "status",
                               "elapsed_s", "truncated"}
        assert client.call({"op": "release"})["ok"]

    def test_exec_without_lease_is_rejected(self, client):
        reply = client.call({"id": "r1", "code": "print(1)"})
        assert reply["ok"] is False
        assert "lease" in reply["error"]

    def test_duplicate_request_id_rejected(self, client):
        client.call({"op": "acquire"})
        client.call({"id": "dup", "code": "print(1)"})
        reply = client.call({"id": "dup", "code": "print(2)"})
        assert reply["ok"] is False and "duplicate" in reply["error"]

    def test_empty_code_rejected(self, client):
        client.call({"op": "acquire"})
        reply = client.call({"id": "empty", "code": ""})
        assert reply["ok"] is False and "empty" in reply["error"]

    def test_double_acquire_on_one_connection_rejected(self, client):
        assert client.call({"op": "acquire"})["ok"]
        assert client.call({"op": "acquire"})["ok"] is False

    def test_reset_over_the_wire(self, client):
        client.call({"op": "acquire"})
        client.call({"id": "a", "code": "z = 9"})
        assert client.call({"op": "reset"})["ok"]
        reply = client.call({"id": "b", "code": "print(z)"})
        assert reply["status"] == "error"

    def test_bad_json_reported(self, client):
        client.file.write(b"{nope\n")
        client.file.flush()
        reply = json.loads(client.file.readline())
        assert reply["ok"] is False

    def test_connection_close_releases_worker(self, server):
        first = LineClient(server)
        second = LineClient(server)
        try:
            assert first.call({"op": "acquire"})["ok"]
            assert second.call({"op": "acquire"})["ok"]
            # both workers held; a third client cannot get one quickly
            third = LineClient(server)
            reply = third.call({"op": "acquire", "timeout_s": 0.2})
            assert reply["ok"] is False and reply["error"] == "acquire_timeout"
            third.close()
            first.close()  # implicit release
            fourth = LineClient(server)
            assert fourth.call({"op": "acquire", "timeout_s": 3})["ok"]
            fourth.close()
        finally:
            second.close()


class TestUpstreamClientInterop:
    """The orchestrator's wire client against this server."""

    def test_quorum_sandbox_client_round_trip(self, server):
        quorum_client = pytest.importorskip("quorum.orchestrator.sandbox_client")
        host, port = server.server_address
        pool = quorum_client.TcpSandboxPool(host, port)
        lease = pool.acquire(timeout_s=3.0)
        assert lease is not None
        try:
            outcome = lease.execute("print(6*7)", timeout_s=6.0)
            assert outcome.status == "ok"
            assert outcome.stdout == "42\n"
            lease.execute("w = 1", timeout_s=6.0)
            assert "1" in lease.execute("print(w)", timeout_s=6.0).stdout
            lease.reset()
            assert lease.execute("print(w)", timeout_s=6.0).status == "error"
        finally:
            lease.release()

    def test_acquire_timeout_signalled_to_upstream_client(self, server):
        quorum_client = pytest.importorskip("quorum.orchestrator.sandbox_client")
        host, port = server.server_address
        pool = quorum_client.TcpSandboxPool(host, port)
        held = [pool.acquire(timeout_s=3.0) for _ in range(2)]
        assert all(lease is not None for lease in held)
        try:
            assert pool.acquire(timeout_s=0.3) is None
        finally:
            for lease in held:
                lease.release()
