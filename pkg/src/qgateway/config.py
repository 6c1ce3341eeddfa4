"""Service configuration: one dataclass, loadable from a JSON file."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ServiceConfig:
    listen_address: str = "127.0.0.1"
    listen_port: int = 8000
    tls_cert: str | None = None
    tls_key: str | None = None
    token_secret: str = ""
    issuer: str = "qgateway"
    access_ttl_s: int = 300
    refresh_ttl_s: int = 86400
    auth_code_ttl_s: int = 60
    allow_password_grant: bool = True  # CLI/testing convenience, off for hardened deploys
    workers: int = 0  # 0 = available cores
    shots_cap: int = 1_000_000
    source_cap_bytes: int = 1 << 20
    max_qubits: int = 20
    journal_path: str = "qgateway.journal"
    sample_interval_s: float = 5.0
    ring_size: int = 720
    # OAuth client registrations: client_id -> exact redirect_uri
    clients: dict = field(default_factory=lambda: {"webui": "/callback"})
    # policy matrix override; None = built-in default
    policy: dict | None = None
    # directory with the built browser UI; served at / when set
    static_dir: str | None = None

    def effective_workers(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 2)

    def validate(self) -> "ServiceConfig":
        if not isinstance(self.token_secret, str) or not self.token_secret:
            raise ConfigError("token_secret must be a non-empty string")
        bounded = [
            ("listen_port", self.listen_port, 1, 65535),
            ("access_ttl_s", self.access_ttl_s, 1, None),
            ("refresh_ttl_s", self.refresh_ttl_s, 1, None),
            ("auth_code_ttl_s", self.auth_code_ttl_s, 1, None),
            ("workers", self.workers, 0, None),
            ("shots_cap", self.shots_cap, 1, None),
            ("source_cap_bytes", self.source_cap_bytes, 1, None),
            ("max_qubits", self.max_qubits, 1, None),
            ("ring_size", self.ring_size, 1, None),
        ]
        for name, value, lo, hi in bounded:
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
            if value < lo or (hi is not None and value > hi):
                raise ConfigError(f"{name} {value} out of range")
        if not isinstance(self.sample_interval_s, (int, float)) or self.sample_interval_s <= 0:
            raise ConfigError("sample_interval_s must be positive")
        if (self.tls_cert is None) != (self.tls_key is None):
            raise ConfigError("tls_cert and tls_key must be set together")
        return self


def config_from_dict(data: dict) -> ServiceConfig:
    known = {f.name for f in fields(ServiceConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    return ServiceConfig(**data).validate()


def load_config(path: str | os.PathLike) -> ServiceConfig:
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = json.loads(raw)
    except ValueError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return config_from_dict(data)
