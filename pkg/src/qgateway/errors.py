"""Error types shared across the service, keyed by machine-readable codes.

Every deliberate failure raises a subclass of ``GatewayError``. The ``code``
attribute is what API error bodies and the CLI's first stderr line carry.
"""

from __future__ import annotations


class GatewayError(Exception):
    code = "InternalError"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class PositionedError(GatewayError):
    """Parse-stage error carrying a 1-based source position."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column

    def position(self) -> dict:
        return {"line": self.line, "column": self.column}


# Pauli program format

class InvalidOperatorChar(PositionedError):
    code = "InvalidOperatorChar"


class InconsistentWidth(PositionedError):
    code = "InconsistentWidth"


class MalformedCoefficient(PositionedError):
    code = "MalformedCoefficient"


class PauliSyntaxError(PositionedError):
    code = "PauliSyntaxError"


# OpenQASM subset

class QasmSyntaxError(PositionedError):
    code = "SyntaxError"


class UnknownGate(PositionedError):
    code = "UnknownGate"


class IndexOutOfRange(PositionedError):
    code = "IndexOutOfRange"


class UnsupportedFeature(GatewayError):
    """Input uses a construct outside the declared subset.

    Raised with a position by the parser and without one by the simulator
    (mid-circuit measurement).
    """

    code = "UnsupportedFeature"

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"line {line}, column {column or 1}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


# Parameter binding

class UnknownParameter(GatewayError):
    code = "UnknownParameter"


class ArityMismatch(GatewayError):
    code = "ArityMismatch"


class UnboundParameters(GatewayError):
    code = "UnboundParameters"


# Simulator

class TooManyQubits(GatewayError):
    code = "TooManyQubits"


# Identity and access

class DuplicateUser(GatewayError):
    code = "DuplicateUser"


class InvalidRole(GatewayError):
    code = "InvalidRole"


class WeakPassword(GatewayError):
    code = "WeakPassword"


class InvalidCredentials(GatewayError):
    code = "InvalidCredentials"


class UnknownClient(GatewayError):
    code = "UnknownClient"


class RedirectMismatch(GatewayError):
    code = "RedirectMismatch"


class InvalidCode(GatewayError):
    code = "InvalidCode"


class InvalidSignature(GatewayError):
    code = "InvalidSignature"


class TokenExpired(GatewayError):
    code = "Expired"


class MalformedToken(GatewayError):
    code = "Malformed"


class InvalidRefreshToken(GatewayError):
    code = "InvalidRefreshToken"


class UnknownAction(GatewayError):
    code = "UnknownAction"


# Monitor

class SamplerUnavailable(GatewayError):
    code = "SamplerUnavailable"


# Job store

class DuplicateJobId(GatewayError):
    code = "DuplicateJobId"


class StorageFailure(GatewayError):
    code = "StorageFailure"


class JobNotFound(GatewayError):
    code = "NotFound"


class NotCompleted(GatewayError):
    code = "NotCompleted"
