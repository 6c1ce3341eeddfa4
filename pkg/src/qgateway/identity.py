"""Embedded identity provider: users, credentials, tokens, and policy.

Implements the authorization-code login sequence, a password grant for CLI
and test use, refresh-token rotation, and HMAC-SHA256 signed claims tokens in
JWT wire format. Unknown-user and wrong-password failures are deliberately
indistinguishable, as are consumed/expired/mismatched auth codes.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import secrets
import threading
import time
from base64 import urlsafe_b64decode, urlsafe_b64encode
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .errors import (
    DuplicateUser,
    InvalidCode,
    InvalidCredentials,
    InvalidRefreshToken,
    InvalidRole,
    InvalidSignature,
    MalformedToken,
    RedirectMismatch,
    TokenExpired,
    UnknownAction,
    UnknownClient,
    WeakPassword,
)

GROUPS = ("internal", "external")
ROLES = ("user", "admin")
ACTIONS = ("submit_job", "read_own_jobs", "read_all_jobs", "read_monitor", "manage_users")

MIN_PASSWORD_LENGTH = 8
DEFAULT_ITERATIONS = 100_000
SCHEME_ID = "pbkdf2-sha256"

# role -> actions, plus extra actions granted to a (group, role) pair
DEFAULT_POLICY = {
    "roles": {
        "user": ["submit_job", "read_own_jobs"],
        "admin": list(ACTIONS),
    },
    "group_role_grants": {
        "internal": {"user": ["read_monitor"]},
    },
}


@dataclass(frozen=True)
class Credential:
    salt: str  # hex
    hash: str  # hex
    scheme: str = SCHEME_ID
    iterations: int = DEFAULT_ITERATIONS


@dataclass(frozen=True)
class Principal:
    username: str
    group: str
    roles: tuple[str, ...]
    credential: Credential

    def summary(self) -> dict:
        return {"username": self.username, "group": self.group, "roles": list(self.roles)}

    def to_record(self) -> dict:
        return {
            "username": self.username,
            "group": self.group,
            "roles": list(self.roles),
            "credential": {
                "salt": self.credential.salt,
                "hash": self.credential.hash,
                "scheme": self.credential.scheme,
                "iterations": self.credential.iterations,
            },
        }

    @classmethod
    def from_record(cls, record: dict) -> "Principal":
        cred = record["credential"]
        return cls(
            username=record["username"],
            group=record["group"],
            roles=tuple(record["roles"]),
            credential=Credential(
                salt=cred["salt"],
                hash=cred["hash"],
                scheme=cred.get("scheme", SCHEME_ID),
                iterations=int(cred.get("iterations", DEFAULT_ITERATIONS)),
            ),
        )


def hash_password(password: str, iterations: int = DEFAULT_ITERATIONS) -> Credential:
    salt = secrets.token_bytes(16)
    digest = hashlib.pbkdf2_hmac("sha256", password.encode(), salt, iterations)
    return Credential(salt=salt.hex(), hash=digest.hex(), iterations=iterations)


def verify_password(credential: Credential, password: str) -> bool:
    digest = hashlib.pbkdf2_hmac(
        "sha256", password.encode(), bytes.fromhex(credential.salt), credential.iterations
    )
    return hmac.compare_digest(digest.hex(), credential.hash)


# JWT wire format: base64url(header).base64url(payload).base64url(hmac-sha256)


def _b64(data: bytes) -> str:
    return urlsafe_b64encode(data).rstrip(b"=").decode()


def _unb64(text: str) -> bytes:
    pad = -len(text) % 4
    return urlsafe_b64decode(text + "=" * pad)


def sign_claims(claims: dict, secret: str) -> str:
    header = _b64(json.dumps({"alg": "HS256", "typ": "JWT"}, separators=(",", ":")).encode())
    payload = _b64(json.dumps(claims, separators=(",", ":"), sort_keys=True).encode())
    signing_input = f"{header}.{payload}".encode()
    sig = hmac.new(secret.encode(), signing_input, hashlib.sha256).digest()
    return f"{header}.{payload}.{_b64(sig)}"


def decode_token(token: str, secret: str, issuer: str, now: float) -> dict:
    parts = token.split(".")
    if len(parts) != 3:
        raise MalformedToken("token must have three dot-separated segments")
    header_b64, payload_b64, sig_b64 = parts
    try:
        header = json.loads(_unb64(header_b64))
        payload = json.loads(_unb64(payload_b64))
    except (ValueError, UnicodeDecodeError):
        raise MalformedToken("token segments are not valid base64url JSON") from None
    if not isinstance(header, dict) or header.get("alg") != "HS256":
        raise MalformedToken("unsupported token header")
    if not isinstance(payload, dict):
        raise MalformedToken("token payload is not an object")
    expected = hmac.new(
        secret.encode(), f"{header_b64}.{payload_b64}".encode(), hashlib.sha256
    ).digest()
    # compare against the canonical encoding so non-canonical base64 variants
    # of a valid signature are rejected too
    if not hmac.compare_digest(sig_b64, _b64(expected)):
        raise InvalidSignature("token signature does not verify")
    if payload.get("iss") != issuer:
        raise InvalidSignature(f"token issuer {payload.get('iss')!r} is not trusted")
    exp = payload.get("exp")
    if not isinstance(exp, (int, float)) or exp <= now:
        raise TokenExpired("token has expired")
    return payload


@dataclass(frozen=True)
class TokenSet:
    access_token: str
    id_token: str
    refresh_token: str
    expires_in: int
    token_type: str = "Bearer"

    def to_dict(self) -> dict:
        return {
            "access_token": self.access_token,
            "id_token": self.id_token,
            "refresh_token": self.refresh_token,
            "expires_in": self.expires_in,
            "token_type": self.token_type,
        }


@dataclass
class AuthCode:
    code: str
    subject: str
    client_id: str
    redirect_uri: str
    issued_at: float
    ttl: float
    consumed: bool = False


@dataclass(frozen=True)
class PendingLogin:
    handle: str
    client_id: str
    redirect_uri: str
    state: str
    created_at: float


@dataclass(frozen=True)
class LoginResult:
    code: str
    redirect_uri: str
    state: str


def check_permission(claims: Mapping, action: str, policy: dict | None = None) -> bool:
    """Evaluate the policy matrix against a token's roles and groups claims."""
    if action not in ACTIONS:
        raise UnknownAction(f"unknown action {action!r}")
    policy = policy or DEFAULT_POLICY
    roles = claims.get("roles") or ()
    groups = claims.get("groups") or ()
    allowed: set[str] = set()
    for role in roles:
        allowed.update(policy["roles"].get(role, ()))
        for group in groups:
            allowed.update(policy.get("group_role_grants", {}).get(group, {}).get(role, ()))
    return action in allowed


_PENDING_TTL = 600.0


class IdentityProvider:
    """User store plus token issuance; mutations serialize on one lock.

    The lock is never held across credential hashing. ``on_principal_change``
    lets the owner persist principals (the journal store in the service);
    ``load_principal`` rebuilds state at startup without re-persisting.
    """

    def __init__(
        self,
        secret: str,
        clients: Mapping[str, str],
        *,
        issuer: str = "qgateway",
        access_ttl: int = 300,
        refresh_ttl: int = 86400,
        code_ttl: int = 60,
        iterations: int = DEFAULT_ITERATIONS,
        policy: dict | None = None,
        now_fn: Callable[[], float] = time.time,
        on_principal_change: Callable[[Principal], None] | None = None,
    ):
        if not secret:
            raise ValueError("token secret must be non-empty")
        self._secret = secret
        self._clients = dict(clients)
        self._issuer = issuer
        self._access_ttl = access_ttl
        self._refresh_ttl = refresh_ttl
        self._code_ttl = code_ttl
        self._iterations = iterations
        self._policy = policy or DEFAULT_POLICY
        self._now = now_fn
        self._on_change = on_principal_change
        self._lock = threading.RLock()
        self._users: dict[str, Principal] = {}
        self._codes: dict[str, AuthCode] = {}
        self._refresh: dict[str, tuple[str, float]] = {}
        self._pending: dict[str, PendingLogin] = {}
        # burned on unknown usernames so lookup failures cost a real hash
        self._decoy = hash_password(secrets.token_hex(16), iterations)

    # user store

    def load_principal(self, principal: Principal) -> None:
        with self._lock:
            self._users[principal.username] = principal

    def create_user(self, username: str, password: str, group: str, roles: Iterable[str]) -> Principal:
        roles = tuple(roles)
        if group not in GROUPS:
            raise InvalidRole(f"group must be one of {GROUPS}, not {group!r}")
        if not roles or any(r not in ROLES for r in roles):
            raise InvalidRole(f"roles must be a non-empty subset of {ROLES}")
        if len(password) < MIN_PASSWORD_LENGTH:
            raise WeakPassword(f"password must be at least {MIN_PASSWORD_LENGTH} characters")
        with self._lock:
            if username in self._users:
                raise DuplicateUser(f"username {username!r} is already taken")
        credential = hash_password(password, self._iterations)
        principal = Principal(username, group, roles, credential)
        with self._lock:
            if username in self._users:
                raise DuplicateUser(f"username {username!r} is already taken")
            self._users[username] = principal
        if self._on_change is not None:
            self._on_change(principal)
        return principal

    def list_users(self) -> list[Principal]:
        with self._lock:
            return sorted(self._users.values(), key=lambda p: p.username)

    def authenticate(self, username: str, password: str) -> Principal:
        with self._lock:
            principal = self._users.get(username)
        if principal is None:
            verify_password(self._decoy, password)
            raise InvalidCredentials("invalid username or password")
        if not verify_password(principal.credential, password):
            raise InvalidCredentials("invalid username or password")
        return principal

    # authorization-code flow

    def begin_authorization(self, client_id: str, redirect_uri: str, state: str) -> PendingLogin:
        registered = self._clients.get(client_id)
        if registered is None:
            raise UnknownClient(f"client {client_id!r} is not registered")
        if redirect_uri != registered:
            raise RedirectMismatch("redirect_uri does not match the registration")
        pending = PendingLogin(
            handle=secrets.token_urlsafe(16),
            client_id=client_id,
            redirect_uri=redirect_uri,
            state=state,
            created_at=self._now(),
        )
        with self._lock:
            self._prune()
            self._pending[pending.handle] = pending
        return pending

    def complete_login(self, handle: str, username: str, password: str) -> LoginResult:
        with self._lock:
            self._prune()
            pending = self._pending.get(handle)
        if pending is None:
            raise InvalidCode("login session is unknown or expired")
        principal = self.authenticate(username, password)
        code = AuthCode(
            code=secrets.token_urlsafe(32),
            subject=principal.username,
            client_id=pending.client_id,
            redirect_uri=pending.redirect_uri,
            issued_at=self._now(),
            ttl=self._code_ttl,
        )
        with self._lock:
            self._pending.pop(handle, None)
            self._codes[code.code] = code
        return LoginResult(code=code.code, redirect_uri=pending.redirect_uri, state=pending.state)

    def exchange_code(self, code: str, client_id: str, redirect_uri: str) -> TokenSet:
        now = self._now()
        with self._lock:
            self._prune()
            entry = self._codes.get(code)
            if (
                entry is None
                or entry.consumed
                or now - entry.issued_at > entry.ttl
                or entry.client_id != client_id
                or entry.redirect_uri != redirect_uri
            ):
                raise InvalidCode("authorization code is invalid")
            entry.consumed = True
            principal = self._users.get(entry.subject)
        if principal is None:
            raise InvalidCode("authorization code is invalid")
        return self.issue_tokens(principal)

    def issue_tokens(self, principal: Principal) -> TokenSet:
        now = int(self._now())
        base = {
            "sub": principal.username,
            "preferred_username": principal.username,
            "groups": [principal.group],
            "roles": list(principal.roles),
            "iat": now,
            "iss": self._issuer,
        }
        access = dict(base, exp=now + self._access_ttl, token_use="access")
        ident = dict(base, exp=now + self._access_ttl, token_use="id")
        refresh = secrets.token_urlsafe(32)
        with self._lock:
            self._refresh[refresh] = (principal.username, self._now() + self._refresh_ttl)
        return TokenSet(
            access_token=sign_claims(access, self._secret),
            id_token=sign_claims(ident, self._secret),
            refresh_token=refresh,
            expires_in=self._access_ttl,
        )

    def refresh(self, refresh_token: str) -> TokenSet:
        now = self._now()
        with self._lock:
            entry = self._refresh.pop(refresh_token, None)
            if entry is None or entry[1] <= now:
                raise InvalidRefreshToken("refresh token is invalid")
            principal = self._users.get(entry[0])
        if principal is None:
            raise InvalidRefreshToken("refresh token is invalid")
        return self.issue_tokens(principal)

    def validate_access_token(self, token: str) -> dict:
        return decode_token(token, self._secret, self._issuer, self._now())

    def check_permission(self, claims: Mapping, action: str) -> bool:
        return check_permission(claims, action, self._policy)

    def _prune(self) -> None:
        # caller holds the lock
        now = self._now()
        dead = [c for c, e in self._codes.items() if now - e.issued_at > e.ttl]
        for c in dead:
            del self._codes[c]
        stale = [h for h, p in self._pending.items() if now - p.created_at > _PENDING_TTL]
        for h in stale:
            del self._pending[h]
