"""Shot-sampling statevector backend.

Bit conventions, pinned by tests: qubit i is bit i of the basis-state index
(qubit 0 = least significant), and counts keys put clbit 0 in the leftmost
character. Sampling uses numpy's PCG64 generator seeded with the integer seed
so identical (circuit, shots, seed, noise) inputs reproduce identical counts.
"""

from __future__ import annotations

import cmath
import math
import secrets
import time
import uuid
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .circuit import Circuit, bind_parameters, circuit_stats
from .errors import GatewayError, TooManyQubits, UnboundParameters, UnsupportedFeature

BACKEND_NAME = "statevector-sim"
GENERATOR_NAME = "PCG64"
DEFAULT_MAX_QUBITS = 20

_SQ2 = 1.0 / math.sqrt(2.0)

_FIXED = {
    "h": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "s": np.array([[1, 0], [0, 1j]], dtype=complex),
    "sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
    "t": np.array([[1, 0], [0, cmath.exp(0.25j * math.pi)]], dtype=complex),
    "tdg": np.array([[1, 0], [0, cmath.exp(-0.25j * math.pi)]], dtype=complex),
}

_PAULIS = (_FIXED["x"], _FIXED["y"], _FIXED["z"])


def _rx(t):
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def _ry(t):
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(t):
    return np.array([[cmath.exp(-0.5j * t), 0], [0, cmath.exp(0.5j * t)]], dtype=complex)


def _u1(lam):
    return np.array([[1, 0], [0, cmath.exp(1j * lam)]], dtype=complex)


def _u3(theta, phi, lam):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [
            [c, -cmath.exp(1j * lam) * s],
            [cmath.exp(1j * phi) * s, cmath.exp(1j * (phi + lam)) * c],
        ],
        dtype=complex,
    )


def _matrix_for(op) -> np.ndarray:
    if op.kind in _FIXED:
        return _FIXED[op.kind]
    vals = [a.evaluate({}) for a in op.angles]
    if op.kind == "rx":
        return _rx(vals[0])
    if op.kind == "ry":
        return _ry(vals[0])
    if op.kind == "rz":
        return _rz(vals[0])
    if op.kind == "u1":
        return _u1(vals[0])
    if op.kind == "u2":
        return _u3(math.pi / 2, vals[0], vals[1])
    if op.kind == "u3":
        return _u3(vals[0], vals[1], vals[2])
    raise ValueError(f"no matrix for {op.kind}")


def _apply_1q(amps: np.ndarray, n: int, mat: np.ndarray, qubit: int) -> np.ndarray:
    # basis index bit q lives on tensor axis n-1-q
    axis = n - 1 - qubit
    t = np.tensordot(mat, amps.reshape((2,) * n), axes=(1, axis))
    return np.moveaxis(t, 0, axis).reshape(-1)


def _apply_cx(amps: np.ndarray, n: int, control: int, target: int) -> np.ndarray:
    t = amps.reshape((2,) * n).copy()
    ac, at = n - 1 - control, n - 1 - target
    sl: list = [slice(None)] * n
    sl[ac] = 1
    at_sub = at if at < ac else at - 1
    t[tuple(sl)] = np.flip(t[tuple(sl)], axis=at_sub)
    return t.reshape(-1)


def _apply(amps: np.ndarray, n: int, op) -> np.ndarray:
    if op.kind == "cx":
        return _apply_cx(amps, n, op.qubits[0], op.qubits[1])
    return _apply_1q(amps, n, _matrix_for(op), op.qubits[0])


def _check_runnable(circuit: Circuit, max_qubits: int) -> None:
    if circuit.free_params:
        names = ", ".join(circuit.free_params)
        raise UnboundParameters(f"unbound parameter(s): {names}")
    if circuit.n_qubits > max_qubits:
        raise TooManyQubits(
            f"{circuit.n_qubits} qubits exceeds the configured maximum of {max_qubits}"
        )


def _split_terminal(circuit: Circuit) -> tuple[list, dict[int, int]]:
    """Evolution ops plus clbit -> source-qubit map; rejects mid-circuit measurement."""
    gates = []
    measured: set[int] = set()
    clbit_source: dict[int, int] = {}
    for op in circuit.ops:
        if op.kind == "measure":
            measured.add(op.qubits[0])
            clbit_source[op.clbits[0]] = op.qubits[0]
        elif op.kind == "barrier":
            continue
        else:
            if measured & set(op.qubits):
                raise UnsupportedFeature(
                    "mid-circuit measurement: a gate follows a measurement on the same qubit"
                )
            gates.append(op)
    return gates, clbit_source


def run_statevector(circuit: Circuit, max_qubits: int = DEFAULT_MAX_QUBITS) -> np.ndarray:
    """Amplitudes of U|0...0> for the circuit's unitary; measures/barriers ignored."""
    _check_runnable(circuit, max_qubits)
    n = circuit.n_qubits
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = 1.0
    for op in circuit.ops:
        if op.kind in ("measure", "barrier"):
            continue
        amps = _apply(amps, n, op)
    return amps


def unitary_of(circuit: Circuit, max_qubits: int = 10) -> np.ndarray:
    """Full 2^n x 2^n unitary built column by column; circuit must not measure."""
    _check_runnable(circuit, max_qubits)
    if any(op.kind == "measure" for op in circuit.ops):
        raise ValueError("unitary_of requires a measurement-free circuit")
    n = circuit.n_qubits
    dim = 2**n
    unitary = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        amps = np.zeros(dim, dtype=complex)
        amps[col] = 1.0
        for op in circuit.ops:
            if op.kind == "barrier":
                continue
            amps = _apply(amps, n, op)
        unitary[:, col] = amps
    return unitary


@dataclass(frozen=True)
class NoiseSpec:
    """Depolarizing probabilities per 1-qubit and per 2-qubit gate; (0,0) = noiseless."""

    p1: float = 0.0
    p2: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.p1 <= 1.0 and 0.0 <= self.p2 <= 1.0):
            raise ValueError("noise probabilities must lie in [0, 1]")

    @property
    def is_noiseless(self) -> bool:
        return self.p1 == 0.0 and self.p2 == 0.0


def _keys_for_indices(indices, weights, n_clbits, clbit_source) -> dict[str, int]:
    out: dict[str, int] = {}
    for index, weight in zip(indices, weights):
        chars = ["0"] * n_clbits
        for c, q in clbit_source.items():
            chars[c] = "1" if (int(index) >> q) & 1 else "0"
        key = "".join(chars)
        out[key] = out.get(key, 0) + int(weight)
    return dict(sorted(out.items()))


def sample_counts(
    circuit: Circuit,
    shots: int,
    seed: int,
    noise: NoiseSpec | None = None,
    max_qubits: int = DEFAULT_MAX_QUBITS,
) -> dict[str, int]:
    """Sampled clbit-string occurrence counts; deterministic for fixed inputs.

    Noiseless circuits evolve once and sample the final distribution, which is
    observationally identical to per-shot runs because measurements are
    terminal. With noise on, each shot is its own trajectory: after every gate
    each touched qubit takes a uniformly chosen non-identity Pauli with
    probability p1 (p2 for cx).
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    _check_runnable(circuit, max_qubits)
    noise = noise or NoiseSpec()
    gates, clbit_source = _split_terminal(circuit)
    n = circuit.n_qubits
    dim = 2**n
    rng = np.random.Generator(np.random.PCG64(seed))
    if noise.is_noiseless:
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
        for op in gates:
            amps = _apply(amps, n, op)
        probs = np.abs(amps) ** 2
        probs = probs / probs.sum()
        samples = rng.choice(dim, size=shots, p=probs)
        indices, weights = np.unique(samples, return_counts=True)
        return _keys_for_indices(indices, weights, circuit.n_clbits, clbit_source)
    tallies: dict[int, int] = {}
    for _ in range(shots):
        amps = np.zeros(dim, dtype=complex)
        amps[0] = 1.0
        for op in gates:
            amps = _apply(amps, n, op)
            p = noise.p2 if op.kind == "cx" else noise.p1
            for q in op.qubits:
                if rng.random() < p:
                    amps = _apply_1q(amps, n, _PAULIS[rng.integers(3)], q)
        probs = np.abs(amps) ** 2
        probs = probs / probs.sum()
        index = int(rng.choice(dim, p=probs))
        tallies[index] = tallies.get(index, 0) + 1
    return _keys_for_indices(tallies.keys(), tallies.values(), circuit.n_clbits, clbit_source)


@dataclass
class ResultObject:
    """Execution outcome in the wire schema used by the HTTP API and CLI."""

    job_id: str
    status: str
    backend: str
    shots: int
    counts: dict[str, int]
    parameters: object
    source: str
    generated_qasm: str | None
    metadata: dict

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "status": self.status,
            "backend": self.backend,
            "shots": self.shots,
            "counts": self.counts,
            "parameters": self.parameters,
            "source": self.source,
            "generated_qasm": self.generated_qasm,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ResultObject":
        return cls(**{k: data.get(k) for k in (
            "job_id", "status", "backend", "shots", "counts",
            "parameters", "source", "generated_qasm", "metadata",
        )})


def execute(
    circuit: Circuit,
    bindings: Mapping[str, float] | Sequence[float] | None,
    shots: int,
    seed: int | None = None,
    noise: NoiseSpec | None = None,
    *,
    source: str = "",
    generated_qasm: str | None = None,
    warnings: Sequence[str] = (),
    job_id: str | None = None,
    max_qubits: int = DEFAULT_MAX_QUBITS,
) -> ResultObject:
    """Bind, sample, and assemble a ResultObject.

    Simulation errors come back as status="failed" with the machine-readable
    reason in metadata["reason"]; they are never raised to the caller.
    """
    started = time.perf_counter()
    job_id = job_id or uuid.uuid4().hex
    seed = secrets.randbits(32) if seed is None else seed
    echo = bindings
    status = "completed"
    counts: dict[str, int] = {}
    reason = None
    target = circuit
    try:
        if bindings is not None:
            target = bind_parameters(circuit, bindings)
        if target.free_params:
            names = ", ".join(target.free_params)
            raise UnboundParameters(f"unbound parameter(s): {names}")
        counts = sample_counts(target, shots, seed, noise, max_qubits)
    except GatewayError as exc:
        status = "failed"
        reason = {"error_code": exc.code, "message": exc.message}
    stats = circuit_stats(target)
    metadata = {
        "n_qubits": stats["n_qubits"],
        "depth": stats["depth"],
        "gate_counts": stats["gate_counts"],
        "seed": seed,
        "wall_time_ms": int(round((time.perf_counter() - started) * 1000)),
        "warnings": list(warnings),
        "generator": GENERATOR_NAME,
    }
    if reason is not None:
        metadata["reason"] = reason
    return ResultObject(
        job_id=job_id,
        status=status,
        backend=BACKEND_NAME,
        shots=shots,
        counts=counts,
        parameters=echo,
        source=source,
        generated_qasm=generated_qasm,
        metadata=metadata,
    )
