"""Durable principal and job storage plus CSV export.

The engine is a single-writer append-only journal of length-prefixed JSON
records (4-byte big-endian length, then UTF-8 JSON). Every write is flushed
and fsynced before the call returns, so an acknowledged record survives an
abrupt kill. On startup the journal is replayed into an in-memory index; a
truncated final record (torn write from a crash) is ignored.
"""

from __future__ import annotations

import json
import os
import struct
import threading
from pathlib import Path

from .errors import DuplicateJobId, JobNotFound, NotCompleted, StorageFailure

_PREFIX = struct.Struct(">I")


def _scan_records(raw: bytes) -> tuple[list[dict], int]:
    """Decode records up to the first torn or undecodable one.

    Returns the intact records and the byte offset where they end, so the
    caller can truncate a torn tail before appending new records after it.
    """
    records: list[dict] = []
    pos = 0
    while pos + _PREFIX.size <= len(raw):
        (length,) = _PREFIX.unpack_from(raw, pos)
        start = pos + _PREFIX.size
        if start + length > len(raw):
            break  # torn tail from an interrupted write
        try:
            records.append(json.loads(raw[start : start + length]))
        except ValueError:
            break
        pos = start + length
    return records, pos


class Store:
    """Append-only journal with an in-memory index; one writer, many readers."""

    def __init__(self, path: str | os.PathLike):
        self._path = Path(path)
        self._lock = threading.RLock()
        self._jobs: dict[str, dict] = {}
        self._job_order: list[str] = []
        self._users: dict[str, dict] = {}
        try:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            torn_at = None
            if self._path.exists():
                raw = self._path.read_bytes()
                records, valid_end = _scan_records(raw)
                self._replay(records)
                if valid_end < len(raw):
                    torn_at = valid_end
            self._fh = open(self._path, "ab")
            if torn_at is not None:
                # drop the torn tail so new appends stay reachable on replay
                self._fh.truncate(torn_at)
        except OSError as exc:
            raise StorageFailure(f"cannot open journal {self._path}: {exc}") from exc

    def _replay(self, records: list[dict]) -> None:
        for record in records:
            kind = record.get("kind")
            if kind == "user":
                self._users[record["user"]["username"]] = record["user"]
            elif kind == "job":
                job = record["job"]
                if job["job_id"] not in self._jobs:
                    self._jobs[job["job_id"]] = job
                    self._job_order.append(job["job_id"])

    def _append(self, record: dict) -> None:
        body = json.dumps(record, separators=(",", ":"), sort_keys=True).encode()
        try:
            self._fh.write(_PREFIX.pack(len(body)) + body)
            self._fh.flush()
            os.fsync(self._fh.fileno())
        except (OSError, ValueError) as exc:
            raise StorageFailure(f"journal write failed: {exc}") from exc

    # principals

    def put_user(self, user_record: dict) -> None:
        with self._lock:
            self._append({"kind": "user", "user": user_record})
            self._users[user_record["username"]] = user_record

    def users(self) -> list[dict]:
        with self._lock:
            return sorted(self._users.values(), key=lambda u: u["username"])

    def get_user(self, username: str) -> dict | None:
        with self._lock:
            return self._users.get(username)

    # jobs

    def put_job(self, job_record: dict) -> str:
        job_id = job_record["job_id"]
        with self._lock:
            if job_id in self._jobs:
                raise DuplicateJobId(f"job id {job_id!r} already stored")
            self._append({"kind": "job", "job": job_record})
            self._jobs[job_id] = job_record
            self._job_order.append(job_id)
        return job_id

    def get_job(self, job_id: str) -> dict:
        with self._lock:
            job = self._jobs.get(job_id)
        if job is None:
            raise JobNotFound(f"no job with id {job_id!r}")
        return job

    def list_jobs(self, owner: str | None = None) -> list[dict]:
        with self._lock:
            ids = list(reversed(self._job_order))
            jobs = [self._jobs[i] for i in ids]
        if owner is not None:
            jobs = [j for j in jobs if j.get("owner") == owner]
        return jobs

    def close(self) -> None:
        with self._lock:
            try:
                self._fh.close()
            except OSError:
                pass


def export_csv(result: dict) -> str:
    """Counts as ``bitstring,count`` rows, keys sorted, LF endings."""
    if result.get("status") != "completed":
        raise NotCompleted("only completed results can be exported")
    lines = ["bitstring,count"]
    for key in sorted(result.get("counts", {})):
        lines.append(f"{key},{result['counts'][key]}")
    return "".join(line + "\n" for line in lines)
