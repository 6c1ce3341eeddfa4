"""Command-line driver: serve the gateway, convert/run programs, manage users.

stdout carries JSON (or QASM for convert) only; diagnostics go to stderr with
a machine-parseable first line ``error_code: message``. Exit codes: 1 program
or store errors, 2 unusable configuration/usage, 3 port bind failure, 4
HTTP-level failures in remote mode.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import socket
import sys
from pathlib import Path

from .circuit import bind_parameters, emit_qasm
from .compiler import compile_program
from .config import ConfigError, load_config
from .errors import GatewayError, PositionedError, StorageFailure
from .identity import GROUPS, IdentityProvider, Principal
from .jobstore import Store
from .pauli import parse_pauli_program
from .pipeline import prepare
from .simulator import execute


def _fail(exit_code: int, error_code: str, message: str) -> int:
    print(f"{error_code}: {message}", file=sys.stderr)
    return exit_code


def _error_line(exc: GatewayError) -> tuple[str, str]:
    # positioned errors carry line/column in str(exc), plain ones in .message
    return exc.code, str(exc)


def _load_params(path: str | None):
    if path is None:
        return None
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read params file {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"params file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, (dict, list)):
        raise ConfigError("params file must hold a JSON object or array")
    return data


def cmd_serve(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        return _fail(2, "BadConfig", str(exc))
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        probe.bind((config.listen_address, config.listen_port))
    except OSError as exc:
        return _fail(3, "PortBindFailure", f"cannot bind {config.listen_address}:{config.listen_port}: {exc}")
    finally:
        probe.close()
    from .api import create_app

    try:
        app = create_app(config)
    except StorageFailure as exc:
        return _fail(2, "BadConfig", exc.message)
    scheme = "https" if config.tls_cert else "http"
    print(f"listening on {scheme}://{config.listen_address}:{config.listen_port}", flush=True)
    import uvicorn

    uvicorn.run(
        app,
        host=config.listen_address,
        port=config.listen_port,
        log_level="warning",
        ssl_certfile=config.tls_cert,
        ssl_keyfile=config.tls_key,
    )
    return 0


def cmd_convert(args) -> int:
    try:
        source = Path(args.input).read_text()
    except OSError as exc:
        return _fail(1, "IOError", str(exc))
    try:
        params = _load_params(args.params)
    except ConfigError as exc:
        return _fail(1, "BadParams", str(exc))
    try:
        circuit = compile_program(parse_pauli_program(source))
        if params is not None:
            circuit = bind_parameters(circuit, params)
        qasm = emit_qasm(circuit)
    except GatewayError as exc:
        return _fail(1, *_error_line(exc))
    if args.output:
        try:
            Path(args.output).write_text(qasm)
        except OSError as exc:
            return _fail(1, "IOError", str(exc))
    else:
        sys.stdout.write(qasm)
    return 0


def _sniff_format(source: str) -> str:
    for line in source.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith(("#", "//")):
            continue
        return "qasm" if stripped.startswith("OPENQASM") else "pauli"
    return "pauli"


def _local_job_id(fmt: str, source: str, params, shots: int, seed) -> str:
    blob = json.dumps([fmt, source, params, shots, seed], sort_keys=True).encode()
    return "local-" + hashlib.sha256(blob).hexdigest()[:24]


def _run_local(args, fmt: str, source: str, params) -> int:
    try:
        prepared = prepare(fmt, source, params)
    except GatewayError as exc:
        return _fail(1, *_error_line(exc))
    result = execute(
        prepared.circuit,
        None,
        args.shots,
        args.seed,
        source=source,
        generated_qasm=prepared.generated_qasm,
        warnings=prepared.warnings,
        job_id=_local_job_id(fmt, source, params, args.shots, args.seed),
    )
    # prepare() already bound the circuit; echo the request parameters
    result = dataclasses.replace(result, parameters=params)
    # local runs have no service clock worth reporting; keep reruns byte-identical
    result.metadata["wall_time_ms"] = None
    print(json.dumps(result.to_dict(), indent=2))
    return 0 if result.status == "completed" else 1


def _run_remote(args, fmt: str, source: str, params) -> int:
    import httpx

    body = {"code": source, "parameters": params, "shots": args.shots, "seed": args.seed}
    url = args.url.rstrip("/") + f"/api/qc/{fmt}/code"
    try:
        response = httpx.post(
            url,
            json=body,
            headers={"Authorization": f"Bearer {args.token}"},
            timeout=120.0,
        )
    except httpx.HTTPError as exc:
        return _fail(4, "ConnectionError", str(exc))
    if response.status_code >= 400:
        try:
            err = response.json()
            code, message = err.get("error_code", "HttpError"), err.get("message", "")
        except ValueError:
            code, message = "HttpError", response.text[:200]
        return _fail(4, code, f"HTTP {response.status_code}: {message}")
    print(json.dumps(response.json(), indent=2))
    return 0


def cmd_run(args) -> int:
    if args.local == bool(args.url):
        return _fail(2, "Usage", "exactly one of --local or --url/--token is required")
    if args.url and not args.token:
        return _fail(2, "Usage", "--url requires --token")
    try:
        source = Path(args.file).read_text()
    except OSError as exc:
        return _fail(1, "IOError", str(exc))
    try:
        params = _load_params(args.params)
    except ConfigError as exc:
        return _fail(1, "BadParams", str(exc))
    fmt = args.format or _sniff_format(source)
    if args.local:
        return _run_local(args, fmt, source, params)
    return _run_remote(args, fmt, source, params)


def _open_local_identity(journal: str) -> tuple[Store, IdentityProvider]:
    store = Store(journal)
    identity = IdentityProvider(
        secret="offline-admin",  # no tokens are issued in this mode
        clients={},
        on_principal_change=lambda p: store.put_user(p.to_record()),
    )
    for record in store.users():
        identity.load_principal(Principal.from_record(record))
    return store, identity


def cmd_user_add(args) -> int:
    roles = tuple(r for r in args.roles.split(",") if r)
    if args.journal:
        try:
            store, identity = _open_local_identity(args.journal)
            principal = identity.create_user(args.username, args.password, args.group, roles)
            store.close()
        except GatewayError as exc:
            return _fail(1, *_error_line(exc))
        print(json.dumps(principal.summary(), indent=2))
        return 0
    import httpx

    try:
        response = httpx.post(
            args.url.rstrip("/") + "/api/admin/users",
            json={
                "username": args.username,
                "password": args.password,
                "group": args.group,
                "roles": list(roles),
            },
            headers={"Authorization": f"Bearer {args.token}"},
            timeout=30.0,
        )
    except httpx.HTTPError as exc:
        return _fail(4, "ConnectionError", str(exc))
    if response.status_code >= 400:
        try:
            err = response.json()
            return _fail(4, err.get("error_code", "HttpError"), f"HTTP {response.status_code}: {err.get('message', '')}")
        except ValueError:
            return _fail(4, "HttpError", f"HTTP {response.status_code}")
    print(json.dumps(response.json(), indent=2))
    return 0


def cmd_user_list(args) -> int:
    if args.journal:
        try:
            store = Store(args.journal)
        except GatewayError as exc:
            return _fail(1, *_error_line(exc))
        users = [
            {"username": u["username"], "group": u["group"], "roles": u["roles"]}
            for u in store.users()
        ]
        store.close()
        print(json.dumps(users, indent=2))
        return 0
    import httpx

    try:
        response = httpx.get(
            args.url.rstrip("/") + "/api/admin/users",
            headers={"Authorization": f"Bearer {args.token}"},
            timeout=30.0,
        )
    except httpx.HTTPError as exc:
        return _fail(4, "ConnectionError", str(exc))
    if response.status_code >= 400:
        try:
            err = response.json()
            return _fail(4, err.get("error_code", "HttpError"), f"HTTP {response.status_code}: {err.get('message', '')}")
        except ValueError:
            return _fail(4, "HttpError", f"HTTP {response.status_code}")
    print(json.dumps(response.json(), indent=2))
    return 0


def _add_remote_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--journal", help="operate directly on a journal file (service must be stopped)")
    parser.add_argument("--url", help="gateway base URL for remote mode")
    parser.add_argument("--token", help="bearer token for remote mode")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qgateway", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the gateway service")
    serve.add_argument("--config", required=True, help="JSON config file path")
    serve.set_defaults(func=cmd_serve)

    convert = sub.add_parser("convert", help="compile a Pauli program to OpenQASM")
    convert.add_argument("input", help="Pauli program file")
    convert.add_argument("-o", "--output", help="output path (stdout when omitted)")
    convert.add_argument("--params", help="JSON file with a named mapping or array of values")
    convert.set_defaults(func=cmd_convert)

    run = sub.add_parser("run", help="execute a program locally or against a gateway")
    run.add_argument("file", help="program file (QASM or Pauli)")
    run.add_argument("--format", choices=("qasm", "pauli"), help="program format (sniffed when omitted)")
    run.add_argument("--shots", type=int, default=1024)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--params", help="JSON file with a named mapping or array of values")
    run.add_argument("--local", action="store_true", help="run in-process without a gateway")
    run.add_argument("--url", help="gateway base URL")
    run.add_argument("--token", help="bearer token")
    run.set_defaults(func=cmd_run)

    user = sub.add_parser("user", help="manage principals")
    user_sub = user.add_subparsers(dest="user_command", required=True)
    add = user_sub.add_parser("add")
    add.add_argument("username")
    add.add_argument("--password", required=True)
    add.add_argument("--group", required=True, choices=GROUPS)
    add.add_argument("--roles", required=True, help="comma-separated roles, e.g. user or user,admin")
    _add_remote_flags(add)
    add.set_defaults(func=cmd_user_add)
    lst = user_sub.add_parser("list")
    _add_remote_flags(lst)
    lst.set_defaults(func=cmd_user_list)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "func", None) in (cmd_user_add, cmd_user_list):
        local = bool(args.journal)
        remote = bool(args.url or args.token)
        if local == remote:
            return _fail(2, "Usage", "exactly one of --journal or --url/--token is required")
        if remote and not (args.url and args.token):
            return _fail(2, "Usage", "remote mode requires both --url and --token")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
