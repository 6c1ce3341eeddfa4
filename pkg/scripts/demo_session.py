#!/usr/bin/env python3
"""Scripted end-to-end session against a locally spawned gateway.

Spawns the service on a free port with a throwaway journal, walks the full
authorization-code flow, submits one OpenQASM and one Pauli-rotation job,
lists jobs, downloads a CSV, and reads the telemetry ring. Prints each step.

Usage: python3 scripts/demo_session.py
"""

import json
import socket
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import httpx

BELL = """OPENQASM 2.0;
include "qelib1.inc";
qreg q[2];
creg c[2];
h q[0];
cx q[0],q[1];
measure q[0] -> c[0];
measure q[1] -> c[1];
"""

ANSATZ = """# two-qubit entangler, one tunable angle
ZZ 0.5
XX 1.0 a
"""


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def step(title: str) -> None:
    print(f"\n== {title}")


def main() -> int:
    tmp = Path(tempfile.mkdtemp(prefix="qgateway-demo-"))
    journal = tmp / "demo.journal"
    port = free_port()
    base = f"http://127.0.0.1:{port}"

    step("seed users (admin + external researcher) into the journal")
    for args in (
        ["admin", "--password", "demo-admin-pw", "--group", "internal", "--roles", "admin"],
        ["alice", "--password", "demo-alice-pw", "--group", "external", "--roles", "user"],
    ):
        subprocess.run(
            [sys.executable, "-m", "qgateway", "user", "add", *args, "--journal", str(journal)],
            check=True,
            stdout=subprocess.DEVNULL,
        )
        print(f"   added {args[0]}")

    config = tmp / "config.json"
    config.write_text(
        json.dumps(
            {
                "token_secret": "demo-secret",
                "listen_port": port,
                "journal_path": str(journal),
                "sample_interval_s": 1.0,
            }
        )
    )

    step(f"start gateway on {base}")
    proc = subprocess.Popen(
        [sys.executable, "-m", "qgateway", "serve", "--config", str(config)],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    try:
        deadline = time.monotonic() + 15
        while True:
            try:
                httpx.get(base + "/", timeout=1)
                break
            except httpx.TransportError:
                if time.monotonic() > deadline or proc.poll() is not None:
                    print("gateway failed to start", file=sys.stderr)
                    return 1
                time.sleep(0.05)

        with httpx.Client(base_url=base, timeout=30) as client:
            step("authorization-code flow for alice")
            r = client.get(
                "/auth/authorize",
                params={"client_id": "webui", "redirect_uri": "/callback", "state": "demo"},
            )
            handle = r.json()["login_handle"]
            print(f"   login handle: {handle[:12]}…")
            r = client.post(
                "/auth/login",
                json={"login_handle": handle, "username": "alice", "password": "demo-alice-pw"},
            )
            code = r.json()["code"]
            print(f"   one-time code: {code[:12]}…")
            r = client.post(
                "/auth/token",
                data={
                    "grant_type": "authorization_code",
                    "code": code,
                    "client_id": "webui",
                    "redirect_uri": "/callback",
                },
            )
            tokens = r.json()
            auth = {"Authorization": f"Bearer {tokens['access_token']}"}
            r = client.get("/api/user/me", headers=auth)
            print(f"   authenticated as: {r.json()}")

            step("submit Bell state (OpenQASM), 2048 shots")
            r = client.post(
                "/api/qc/qasm/code", headers=auth, json={"code": BELL, "shots": 2048, "seed": 7}
            )
            bell = r.json()
            print(f"   job {bell['job_id']}: counts {bell['counts']}")

            step("submit Pauli-rotation program with a bound parameter")
            r = client.post(
                "/api/qc/pauli/code",
                headers=auth,
                json={"code": ANSATZ, "parameters": {"a": 0.8}, "shots": 2048, "seed": 7},
            )
            pauli = r.json()
            print(f"   job {pauli['job_id']}: counts {pauli['counts']}")
            print("   lowered OpenQASM:")
            for line in pauli["generated_qasm"].splitlines():
                print(f"     {line}")

            step("list jobs (newest first)")
            r = client.get("/api/qc/jobs", headers=auth)
            for record in r.json():
                print(f"   {record['submitted_at']}  {record['job_id']}  {record['input_format']}")

            step("download the Bell counts as CSV")
            r = client.get(f"/api/qc/jobs/{bell['job_id']}/result.csv", headers=auth)
            print("   " + r.text.replace("\n", "\n   ").rstrip())

            step("telemetry ring (admin only)")
            time.sleep(1.2)  # let the sampler tick once more after the traffic above
            r = client.post(
                "/auth/token",
                data={"grant_type": "password", "username": "admin", "password": "demo-admin-pw"},
            )
            admin_auth = {"Authorization": f"Bearer {r.json()['access_token']}"}
            r = client.get("/api/monitor/stats", headers=admin_auth)
            sample = r.json()[-1]
            mem = sample["mem_bytes"] / 2**20 if sample["mem_bytes"] else float("nan")
            print(
                f"   {len(r.json())} sample(s); latest: rss {mem:.0f} MiB, "
                f"rx {sample['net_rx_bytes']} B, tx {sample['net_tx_bytes']} B"
            )

            r = client.get("/api/monitor/stats", headers=auth)
            print(f"   external user gets {r.status_code} ({r.json()['error_code']})")
    finally:
        proc.terminate()
        proc.wait(timeout=10)
    print("\ndemo complete")
    return 0


if __name__ == "__main__":
    sys.exit(main())
