"""serve command: health endpoint, port conflicts, graceful SIGINT drain."""

import json
import signal
import socket
import subprocess
import sys
import time

import httpx

import shop_script
from conftest import FIXTURES


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def start_server(tmp_path, port):
    rules_file = tmp_path / "rules.json"
    shop_script.write_rules_file(rules_file)
    process = subprocess.Popen(
        [
            sys.executable, "-m", "autoeda.cli",
            "--data-dir", str(tmp_path / "ws"),
            "serve", "--port", str(port), "--provider", f"scripted:{rules_file}",
        ],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
    )
    deadline = time.monotonic() + 15
    while time.monotonic() < deadline:
        if process.poll() is not None:
            raise AssertionError(f"server died early:\n{process.stdout.read().decode()}")
        try:
            if httpx.get(f"http://127.0.0.1:{port}/health", timeout=0.5).status_code == 200:
                return process
        except httpx.HTTPError:
            time.sleep(0.1)
    process.kill()
    raise AssertionError("server did not come up")


def test_serve_health_and_graceful_sigint_drains_jobs(tmp_path):
    port = free_port()
    process = start_server(tmp_path, port)
    try:
        base = f"http://127.0.0.1:{port}"
        response = httpx.post(base + "/datasources", json={"target": str(FIXTURES)}, timeout=5)
        assert response.status_code == 202
        job_id = response.json()["job_id"]
        process.send_signal(signal.SIGINT)
        process.wait(timeout=20)
        assert process.returncode == 0, process.stdout.read().decode()
        # The drained job persisted nothing half-written: either no result yet
        # (failed before interrupt handling) or a complete artifacts bundle.
        ds_dirs = list((tmp_path / "ws" / "datasources").glob("*/artifacts.json"))
        for artifacts in ds_dirs:
            bundle = json.loads(artifacts.read_text())
            assert "columns" in bundle and "tables" in bundle
    finally:
        if process.poll() is None:
            process.kill()


def test_serve_refuses_port_in_use(tmp_path):
    port = free_port()
    blocker = socket.socket()
    blocker.bind(("127.0.0.1", port))
    blocker.listen(1)
    try:
        rules_file = tmp_path / "rules.json"
        shop_script.write_rules_file(rules_file)
        process = subprocess.run(
            [
                sys.executable, "-m", "autoeda.cli",
                "--data-dir", str(tmp_path / "ws"),
                "serve", "--port", str(port), "--provider", f"scripted:{rules_file}",
            ],
            capture_output=True,
            timeout=30,
        )
        assert process.returncode != 0
    finally:
        blocker.close()
