#!/usr/bin/env python3
"""Timing sweep for the sampling simulator and the Pauli lowering path.

Usage: python3 scripts/benchmark_simulator.py [--max-qubits N] [--shots S]
"""

import argparse
import time

import numpy as np

from qgateway.circuit import Circuit
from qgateway.compiler import compile_program
from qgateway.pauli import parse_pauli_program
from qgateway.simulator import sample_counts


def random_layered_circuit(rng: np.random.Generator, n_qubits: int, layers: int) -> Circuit:
    from qgateway.circuit import GateOp, num

    ops = []
    for _ in range(layers):
        for q in range(n_qubits):
            ops.append(GateOp("rz", (q,), (), (num(float(rng.uniform(0, 2 * np.pi))),)))
            ops.append(GateOp("h", (q,)))
        for q in range(0, n_qubits - 1, 2):
            ops.append(GateOp("cx", (q, q + 1)))
    for q in range(n_qubits):
        ops.append(GateOp("measure", (q,), (q,)))
    return Circuit(n_qubits, n_qubits, tuple(ops))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-qubits", type=int, default=16)
    parser.add_argument("--shots", type=int, default=8192)
    parser.add_argument("--layers", type=int, default=6)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    print(f"{'qubits':>6} {'gates':>6} {'statevec+sample':>16} {'shots/s':>12}")
    for n in range(2, args.max_qubits + 1, 2):
        circuit = random_layered_circuit(rng, n, args.layers)
        started = time.perf_counter()
        sample_counts(circuit, args.shots, seed=1)
        elapsed = time.perf_counter() - started
        print(f"{n:>6} {len(circuit.ops):>6} {elapsed * 1e3:>13.1f} ms {args.shots / elapsed:>12.0f}")

    terms = 64
    width = 8
    lines = []
    for t in range(terms):
        ops = "".join(rng.choice(list("IXYZ"), size=width))
        if set(ops) == {"I"}:
            ops = "Z" + ops[1:]
        lines.append(f"{ops} {float(rng.uniform(-1, 1))!r} p{t}")
    source = "\n".join(lines) + "\n"

    started = time.perf_counter()
    program = parse_pauli_program(source)
    circuit = compile_program(program)
    elapsed = time.perf_counter() - started
    print(
        f"\nlowering: {terms} terms on {width} qubits -> "
        f"{len(circuit.ops)} ops in {elapsed * 1e3:.1f} ms"
    )


if __name__ == "__main__":
    main()
