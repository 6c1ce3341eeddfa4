"""HTTP gateway: single entry point for auth, submission, jobs, telemetry.

Every non-2xx response body has the ApiError shape {http_status, error_code,
message, detail?}. Authentication is a route dependency (functions tagged
``requires_auth`` so the route table is auditable). Simulation runs on a
bounded worker pool, never on the event loop. All traffic is metered by a
byte-counting ASGI wrapper feeding the monitor, making network telemetry
exact by construction.
"""

from __future__ import annotations

import asyncio
import dataclasses
import uuid
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from datetime import datetime, timezone
from functools import partial
from pathlib import Path
from typing import Optional, Union

from fastapi import Depends, FastAPI, File, Form, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import FileResponse, JSONResponse, Response
from pydantic import BaseModel, Field
from starlette.exceptions import HTTPException as StarletteHTTPException
from starlette.staticfiles import StaticFiles

from .config import ServiceConfig
from .errors import (
    ArityMismatch,
    DuplicateUser,
    GatewayError,
    InvalidCode,
    InvalidCredentials,
    InvalidRefreshToken,
    InvalidRole,
    JobNotFound,
    NotCompleted,
    PositionedError,
    StorageFailure,
    UnboundParameters,
    UnknownParameter,
    UnsupportedFeature,
    WeakPassword,
)
from .identity import IdentityProvider, Principal
from .jobstore import Store, export_csv
from .monitor import Monitor, NetMeter
from .pipeline import prepare
from .simulator import BACKEND_NAME, execute


class ApiException(Exception):
    """Raised by handlers; rendered as an ApiError body."""

    def __init__(self, http_status: int, error_code: str, message: str, detail=None):
        super().__init__(message)
        self.http_status = http_status
        self.error_code = error_code
        self.message = message
        self.detail = detail


def _error_response(status: int, code: str, message: str, detail=None) -> JSONResponse:
    body = {"http_status": status, "error_code": code, "message": message}
    if detail is not None:
        body["detail"] = detail
    return JSONResponse(status_code=status, content=body)


_STATUS_CODES = {
    401: "Unauthorized",
    403: "Forbidden",
    404: "NotFound",
    405: "MethodNotAllowed",
    413: "SourceTooLarge",
}


class ByteMeterMiddleware:
    """Counts request and response bytes (canonical HTTP/1.1 framing) exactly."""

    def __init__(self, app, meter: NetMeter):
        self.app = app
        self.meter = meter

    @staticmethod
    def _header_bytes(headers) -> int:
        # name: value\r\n per header, plus the blank separator line
        return sum(len(k) + len(v) + 4 for k, v in headers) + 2

    async def __call__(self, scope, receive, send):
        if scope["type"] != "http":
            await self.app(scope, receive, send)
            return
        request_line = (
            len(scope.get("method", "GET"))
            + len(scope.get("raw_path", scope.get("path", "/").encode()))
            + len(scope.get("query_string", b""))
            + len(b" ? HTTP/1.1\r\n")
        )
        self.meter.add_rx(request_line + self._header_bytes(scope.get("headers", [])))

        async def metered_receive():
            message = await receive()
            if message["type"] == "http.request":
                self.meter.add_rx(len(message.get("body", b"")))
            return message

        async def metered_send(message):
            if message["type"] == "http.response.start":
                status_line = len(b"HTTP/1.1 200 OK\r\n")
                self.meter.add_tx(status_line + self._header_bytes(message.get("headers", [])))
            elif message["type"] == "http.response.body":
                self.meter.add_tx(len(message.get("body", b"")))
            await send(message)

        await self.app(scope, metered_receive, metered_send)


# request bodies

Parameters = Union[dict[str, float], list[float], None]


class SubmitBody(BaseModel):
    code: str
    parameters: Parameters = None
    shots: int = Field(default=1024, ge=1)
    seed: Optional[int] = None
    backend: str = BACKEND_NAME


class CreateUserBody(BaseModel):
    username: str = Field(min_length=1)
    password: str
    group: str
    roles: list[str]


# auth dependencies


def _claims_from_request(request: Request) -> dict:
    header = request.headers.get("authorization", "")
    if not header.lower().startswith("bearer "):
        raise ApiException(401, "Unauthorized", "missing bearer token")
    token = header[7:].strip()
    try:
        return request.app.state.identity.validate_access_token(token)
    except GatewayError as exc:
        raise ApiException(401, exc.code, exc.message) from exc


def require_claims(request: Request) -> dict:
    return _claims_from_request(request)


require_claims.requires_auth = True


def require_action(action: str):
    def dependency(request: Request) -> dict:
        claims = _claims_from_request(request)
        if not request.app.state.identity.check_permission(claims, action):
            raise ApiException(403, "Forbidden", f"{action} is not permitted for this principal")
        return claims

    dependency.requires_auth = True
    dependency.__name__ = f"require_{action}"
    return dependency


def _username(claims: dict) -> str:
    return claims.get("preferred_username") or claims.get("sub") or ""


async def _read_submit_form(
    file: UploadFile, parameters: str | None, shots: int, seed: int | None, backend: str, cap: int
) -> SubmitBody:
    import json as _json

    raw = await file.read()
    if len(raw) > cap:
        raise ApiException(413, "SourceTooLarge", f"source exceeds the {cap} byte cap")
    try:
        code = raw.decode()
    except UnicodeDecodeError:
        raise ApiException(400, "ValidationError", "uploaded file is not valid UTF-8") from None
    params = None
    if parameters is not None and parameters.strip():
        try:
            params = _json.loads(parameters)
        except ValueError:
            raise ApiException(400, "ValidationError", "parameters field is not valid JSON") from None
        if not isinstance(params, (dict, list)):
            raise ApiException(400, "ValidationError", "parameters must be an object or array")
    return SubmitBody(code=code, parameters=params, shots=shots, seed=seed, backend=backend)


def create_app(
    config: ServiceConfig,
    *,
    store: Store | None = None,
    identity: IdentityProvider | None = None,
    monitor: Monitor | None = None,
    start_sampler: bool = True,
) -> FastAPI:
    store = store or Store(config.journal_path)
    meter = monitor.meter if monitor is not None else NetMeter()
    monitor = monitor or Monitor(
        meter,
        interval_s=config.sample_interval_s,
        ring_size=config.ring_size,
    )
    if identity is None:
        identity = IdentityProvider(
            secret=config.token_secret,
            clients=config.clients,
            issuer=config.issuer,
            access_ttl=config.access_ttl_s,
            refresh_ttl=config.refresh_ttl_s,
            code_ttl=config.auth_code_ttl_s,
            policy=config.policy,
            on_principal_change=lambda p: store.put_user(p.to_record()),
        )
        for record in store.users():
            identity.load_principal(Principal.from_record(record))

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if start_sampler:
            monitor.start()
        yield
        monitor.stop()
        app.state.pool.shutdown(wait=True)
        store.close()

    app = FastAPI(title="qgateway", lifespan=lifespan)
    app.state.config = config
    app.state.store = store
    app.state.identity = identity
    app.state.monitor = monitor
    app.state.meter = meter
    app.state.pool = ThreadPoolExecutor(
        max_workers=config.effective_workers(), thread_name_prefix="sim-worker"
    )
    app.add_middleware(ByteMeterMiddleware, meter=meter)

    # error rendering

    @app.exception_handler(ApiException)
    async def _api_exception(request: Request, exc: ApiException):
        return _error_response(exc.http_status, exc.error_code, exc.message, exc.detail)

    @app.exception_handler(RequestValidationError)
    async def _validation(request: Request, exc: RequestValidationError):
        detail = [
            {"loc": [str(p) for p in err.get("loc", ())], "msg": err.get("msg", "")}
            for err in exc.errors()
        ]
        return _error_response(400, "ValidationError", "request body failed validation", detail)

    @app.exception_handler(StarletteHTTPException)
    async def _http_exception(request: Request, exc: StarletteHTTPException):
        code = _STATUS_CODES.get(exc.status_code, "HttpError")
        return _error_response(exc.status_code, code, str(exc.detail))

    @app.exception_handler(GatewayError)
    async def _gateway_error(request: Request, exc: GatewayError):
        status = 500 if isinstance(exc, StorageFailure) else 400
        return _error_response(status, exc.code, exc.message)

    @app.exception_handler(Exception)
    async def _unhandled(request: Request, exc: Exception):
        return _error_response(500, "InternalError", "internal server error")

    # auth endpoints (public)

    @app.get("/auth/authorize")
    async def authorize(client_id: str, redirect_uri: str, state: str = ""):
        try:
            pending = identity.begin_authorization(client_id, redirect_uri, state)
        except GatewayError as exc:
            raise ApiException(400, exc.code, exc.message) from exc
        return {"login_handle": pending.handle}

    @app.post("/auth/login")
    async def login(request: Request):
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("application/json"):
            try:
                data = await request.json()
            except ValueError:
                raise ApiException(400, "ValidationError", "body is not valid JSON") from None
        else:
            data = dict(await request.form())
        handle = data.get("handle") or data.get("login_handle")
        username, password = data.get("username"), data.get("password")
        if not handle or username is None or password is None:
            raise ApiException(400, "ValidationError", "handle, username and password are required")
        try:
            result = identity.complete_login(str(handle), str(username), str(password))
        except InvalidCredentials as exc:
            raise ApiException(401, exc.code, exc.message) from exc
        except GatewayError as exc:
            raise ApiException(400, exc.code, exc.message) from exc
        return {"code": result.code, "state": result.state, "redirect_uri": result.redirect_uri}

    @app.post("/auth/token")
    async def token(request: Request):
        form = dict(await request.form())
        grant = form.get("grant_type")
        try:
            if grant == "authorization_code":
                required = ("code", "client_id", "redirect_uri")
                if any(k not in form for k in required):
                    raise ApiException(400, "ValidationError", "code, client_id and redirect_uri are required")
                tokens = identity.exchange_code(form["code"], form["client_id"], form["redirect_uri"])
            elif grant == "password":
                if not config.allow_password_grant:
                    raise ApiException(400, "UnsupportedGrant", "password grant is disabled")
                if "username" not in form or "password" not in form:
                    raise ApiException(400, "ValidationError", "username and password are required")
                principal = identity.authenticate(form["username"], form["password"])
                tokens = identity.issue_tokens(principal)
            elif grant == "refresh_token":
                if "refresh_token" not in form:
                    raise ApiException(400, "ValidationError", "refresh_token is required")
                tokens = identity.refresh(form["refresh_token"])
            else:
                raise ApiException(400, "UnsupportedGrant", f"unsupported grant_type {grant!r}")
        except InvalidCredentials as exc:
            raise ApiException(401, exc.code, exc.message) from exc
        except (InvalidCode, InvalidRefreshToken) as exc:
            raise ApiException(400, exc.code, exc.message) from exc
        return tokens.to_dict()

    # user info

    @app.get("/api/user/me")
    async def me(claims: dict = Depends(require_claims)):
        groups = claims.get("groups") or [None]
        return {"username": _username(claims), "group": groups[0], "roles": claims.get("roles", [])}

    # submission

    async def _submit(fmt: str, body: SubmitBody, claims: dict) -> dict:
        if len(body.code.encode()) > config.source_cap_bytes:
            raise ApiException(
                413, "SourceTooLarge", f"source exceeds the {config.source_cap_bytes} byte cap"
            )
        if body.shots > config.shots_cap:
            raise ApiException(
                400, "ValidationError", f"shots must be within [1, {config.shots_cap}]"
            )
        if body.backend != BACKEND_NAME:
            raise ApiException(400, "UnknownBackend", f"unknown backend {body.backend!r}")
        try:
            prepared = prepare(fmt, body.code, body.parameters)
        except PositionedError as exc:
            raise ApiException(400, exc.code, str(exc), detail=exc.position()) from exc
        except UnsupportedFeature as exc:
            detail = None
            if exc.line is not None:
                detail = {"line": exc.line, "column": exc.column or 1}
            raise ApiException(400, exc.code, exc.message, detail=detail) from exc
        except UnknownParameter as exc:
            raise ApiException(400, exc.code, exc.message) from exc
        except (ArityMismatch, UnboundParameters) as exc:
            raise ApiException(422, exc.code, exc.message) from exc
        loop = asyncio.get_running_loop()
        result = await loop.run_in_executor(
            app.state.pool,
            partial(
                execute,
                prepared.circuit,
                None,
                body.shots,
                body.seed,
                None,
                source=body.code,
                generated_qasm=prepared.generated_qasm,
                warnings=prepared.warnings,
                job_id=uuid.uuid4().hex,
                max_qubits=config.max_qubits,
            ),
        )
        # prepare() already bound the circuit; echo the request values here
        result = dataclasses.replace(result, parameters=body.parameters)
        record = {
            "job_id": result.job_id,
            "owner": _username(claims),
            "submitted_at": datetime.now(timezone.utc).isoformat(),
            "input_format": fmt,
            "request": {
                "source": body.code,
                "parameters": body.parameters,
                "shots": body.shots,
                "seed": body.seed,
            },
            "result": result.to_dict(),
        }
        try:
            store.put_job(record)
        except StorageFailure as exc:
            raise ApiException(500, exc.code, exc.message) from exc
        return result.to_dict()

    submit_guard = require_action("submit_job")

    @app.post("/api/qc/qasm/code")
    async def qasm_code(body: SubmitBody, claims: dict = Depends(submit_guard)):
        return await _submit("qasm", body, claims)

    @app.post("/api/qc/pauli/code")
    async def pauli_code(body: SubmitBody, claims: dict = Depends(submit_guard)):
        return await _submit("pauli", body, claims)

    @app.post("/api/qc/qasm/upload")
    async def qasm_upload(
        file: UploadFile = File(...),
        parameters: Optional[str] = Form(None),
        shots: int = Form(1024),
        seed: Optional[int] = Form(None),
        backend: str = Form(BACKEND_NAME),
        claims: dict = Depends(submit_guard),
    ):
        body = await _read_submit_form(file, parameters, shots, seed, backend, config.source_cap_bytes)
        return await _submit("qasm", body, claims)

    @app.post("/api/qc/pauli/upload")
    async def pauli_upload(
        file: UploadFile = File(...),
        parameters: Optional[str] = Form(None),
        shots: int = Form(1024),
        seed: Optional[int] = Form(None),
        backend: str = Form(BACKEND_NAME),
        claims: dict = Depends(submit_guard),
    ):
        body = await _read_submit_form(file, parameters, shots, seed, backend, config.source_cap_bytes)
        return await _submit("pauli", body, claims)

    # jobs

    jobs_guard = require_action("read_own_jobs")

    def _fetch_job(job_id: str, claims: dict) -> dict:
        message = f"no job with id {job_id!r}"
        try:
            job = store.get_job(job_id)
        except JobNotFound:
            raise ApiException(404, "NotFound", message) from None
        if job.get("owner") != _username(claims) and not identity.check_permission(
            claims, "read_all_jobs"
        ):
            # foreign job without read_all_jobs: indistinguishable from absent
            raise ApiException(404, "NotFound", message)
        return job

    @app.get("/api/qc/jobs")
    async def list_jobs(scope: str = "own", claims: dict = Depends(jobs_guard)):
        if scope not in ("own", "all"):
            raise ApiException(400, "ValidationError", "scope must be 'own' or 'all'")
        if scope == "all":
            if not identity.check_permission(claims, "read_all_jobs"):
                raise ApiException(403, "Forbidden", "read_all_jobs is not permitted for this principal")
            return store.list_jobs()
        return store.list_jobs(owner=_username(claims))

    @app.get("/api/qc/jobs/{job_id}")
    async def get_job(job_id: str, claims: dict = Depends(jobs_guard)):
        return _fetch_job(job_id, claims)

    @app.get("/api/qc/jobs/{job_id}/result.csv")
    async def job_csv(job_id: str, claims: dict = Depends(jobs_guard)):
        job = _fetch_job(job_id, claims)
        try:
            csv_text = export_csv(job["result"])
        except NotCompleted as exc:
            raise ApiException(409, exc.code, exc.message) from exc
        return Response(
            content=csv_text,
            media_type="text/csv",
            headers={"Content-Disposition": f'attachment; filename="{job_id}.csv"'},
        )

    # monitoring

    @app.get("/api/monitor/stats")
    async def monitor_stats(window_s: float = 300.0, claims: dict = Depends(require_action("read_monitor"))):
        if window_s <= 0:
            raise ApiException(400, "ValidationError", "window_s must be positive")
        return [s.to_dict() for s in monitor.window(window_s)]

    # user administration

    admin_guard = require_action("manage_users")

    @app.post("/api/admin/users", status_code=201)
    async def create_user(body: CreateUserBody, claims: dict = Depends(admin_guard)):
        try:
            principal = identity.create_user(body.username, body.password, body.group, body.roles)
        except DuplicateUser as exc:
            raise ApiException(409, exc.code, exc.message) from exc
        except (WeakPassword, InvalidRole) as exc:
            raise ApiException(400, exc.code, exc.message) from exc
        return principal.summary()

    @app.get("/api/admin/users")
    async def list_users(claims: dict = Depends(admin_guard)):
        return [p.summary() for p in identity.list_users()]

    # browser UI bundle (optional)

    if config.static_dir:
        static_root = Path(config.static_dir)
        index = static_root / "index.html"
        if index.is_file():

            @app.get("/callback", include_in_schema=False)
            async def spa_callback():
                return FileResponse(index)

            app.mount("/", StaticFiles(directory=static_root, html=True), name="ui")

    return app
