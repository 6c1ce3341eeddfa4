import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import phase_aligned_deviation, rotation_oracle
from qgateway.circuit import BinOp, Circuit, GateOp, Num, Param, bind_parameters, num
from qgateway.compiler import compile_program, lower_pauli_term, peephole_optimize
from qgateway.pauli import PauliProgram, PauliTerm, parse_pauli_program
from qgateway.simulator import unitary_of

NATIVE = {"h", "s", "sdg", "rz", "cx", "measure"}


# lowering

def test_lower_iixy_frozen_sequence():
    ops = lower_pauli_term(PauliTerm("IIXY", 1.0, "1"), 4)
    assert [(op.kind, op.qubits) for op in ops] == [
        ("h", (2,)),
        ("sdg", (3,)),
        ("h", (3,)),
        ("cx", (2, 3)),
        ("rz", (3,)),
        ("cx", (2, 3)),
        ("h", (3,)),
        ("s", (3,)),
        ("h", (2,)),
    ]
    assert ops[4].angles == (BinOp("*", Num(1.0), Param("1")),)


def test_lower_zz_frozen_sequence():
    ops = lower_pauli_term(PauliTerm("ZZ", 0.5), 2)
    assert [(op.kind, op.qubits) for op in ops] == [
        ("cx", (0, 1)),
        ("rz", (1,)),
        ("cx", (0, 1)),
    ]
    assert ops[1].angles == (Num(0.5),)


def test_lower_single_z_is_bare_rz():
    (op,) = lower_pauli_term(PauliTerm("Z", 2.0, "a"), 1)
    assert op == GateOp("rz", (0,), (), (BinOp("*", Num(2.0), Param("a")),))


def test_lower_identity_term_is_empty():
    assert lower_pauli_term(PauliTerm("II", 1.0), 2) == ()


def test_lower_width_mismatch():
    with pytest.raises(ValueError):
        lower_pauli_term(PauliTerm("XX", 1.0), 3)


def test_lower_rotation_axis_is_highest_active_qubit():
    ops = lower_pauli_term(PauliTerm("ZIZ", 1.0), 3)
    rz = [op for op in ops if op.kind == "rz"]
    assert rz[0].qubits == (2,)
    assert [(op.kind, op.qubits) for op in ops if op.kind == "cx"] == [
        ("cx", (0, 2)),
        ("cx", (0, 2)),
    ]


@given(
    st.text(alphabet="IXYZ", min_size=1, max_size=3).filter(lambda s: set(s) != {"I"}),
    st.floats(min_value=-2, max_value=2, allow_nan=False),
    st.floats(min_value=0, max_value=2 * np.pi, allow_nan=False),
)
def test_lowered_term_matches_rotation_oracle(operators, coeff, theta):
    circuit = Circuit(
        len(operators), 0, lower_pauli_term(PauliTerm(operators, coeff, "t"), len(operators))
    )
    u = unitary_of(bind_parameters(circuit, {"t": theta}))
    expected = rotation_oracle(operators, coeff * theta)
    assert phase_aligned_deviation(u, expected) <= 1e-9


# program compilation

def test_compile_appends_terminal_measurement():
    program = parse_pauli_program("XX 1.0 a\nZZ 0.5\n")
    c = compile_program(program)
    assert (c.n_qubits, c.n_clbits) == (2, 2)
    assert c.ops[-2:] == (GateOp("measure", (0,), (0,)), GateOp("measure", (1,), (1,)))
    assert c.free_params == ("a",)


def test_compile_empty_program():
    assert compile_program(PauliProgram((), 0)) == Circuit(0, 0, ())


def test_compile_emits_only_native_gates():
    program = parse_pauli_program("XYZI 0.3 a\nIIZZ -1.0\nXXXX 0.25 b\n")
    c = compile_program(program)
    assert {op.kind for op in c.ops} <= NATIVE


def test_compile_identity_only_program_still_measures():
    c = compile_program(parse_pauli_program("II 1.0\n"))
    assert [op.kind for op in c.ops] == ["measure", "measure"]


# peephole

def test_peephole_cancels_inverse_pairs():
    c = Circuit(1, 0, (GateOp("h", (0,)), GateOp("h", (0,))))
    assert peephole_optimize(c).ops == ()


def test_peephole_cascades():
    c = Circuit(
        1, 0, (GateOp("h", (0,)), GateOp("x", (0,)), GateOp("x", (0,)), GateOp("h", (0,)))
    )
    assert peephole_optimize(c).ops == ()


def test_peephole_merges_adjacent_rz_and_folds_constants():
    c = Circuit(1, 0, (GateOp("rz", (0,), (), (num(1.5),)), GateOp("rz", (0,), (), (num(0.5),))))
    assert peephole_optimize(c).ops == (GateOp("rz", (0,), (), (num(2.0),)),)


def test_peephole_merges_symbolic_rz_without_folding():
    c = Circuit(
        1, 0, (GateOp("rz", (0,), (), (Param("a"),)), GateOp("rz", (0,), (), (num(0.5),)))
    )
    (op,) = peephole_optimize(c).ops
    assert op.angles[0].render() == "a+0.5"


def test_peephole_cancels_identical_cx_only():
    same = Circuit(2, 0, (GateOp("cx", (0, 1)), GateOp("cx", (0, 1))))
    assert peephole_optimize(same).ops == ()
    reversed_cx = Circuit(2, 0, (GateOp("cx", (0, 1)), GateOp("cx", (1, 0))))
    assert len(peephole_optimize(reversed_cx).ops) == 2


def test_peephole_skips_over_disjoint_wires():
    c = Circuit(2, 0, (GateOp("h", (0,)), GateOp("x", (1,)), GateOp("h", (0,))))
    assert peephole_optimize(c).ops == (GateOp("x", (1,)),)


def test_peephole_blocked_by_shared_wire():
    c = Circuit(2, 0, (GateOp("h", (0,)), GateOp("cx", (0, 1)), GateOp("h", (0,))))
    assert len(peephole_optimize(c).ops) == 3


def test_peephole_blocked_by_measure():
    c = Circuit(1, 1, (GateOp("h", (0,)), GateOp("measure", (0,), (0,)), GateOp("h", (0,))))
    assert len(peephole_optimize(c).ops) == 3


def test_peephole_preserves_registers():
    c = Circuit(3, 2, (GateOp("h", (1,)), GateOp("h", (1,))))
    out = peephole_optimize(c)
    assert (out.n_qubits, out.n_clbits) == (3, 2)


@given(
    st.lists(
        st.sampled_from(["h", "x", "y", "z", "s", "sdg", "t", "tdg"]), min_size=0, max_size=8
    )
)
def test_peephole_preserves_unitary_and_never_grows(kinds):
    c = Circuit(1, 0, tuple(GateOp(k, (0,)) for k in kinds))
    out = peephole_optimize(c)
    assert len(out.ops) <= len(c.ops)
    if c.ops:
        deviation = phase_aligned_deviation(unitary_of(out), unitary_of(c))
        assert deviation <= 1e-9


def test_compiled_program_peephole_equivalence():
    program = parse_pauli_program("XY 0.7 a\nYX -0.7 a\nZZ 0.5\n")
    raw = compile_program(program)
    slim = peephole_optimize(raw)
    assert len(slim.ops) <= len(raw.ops)
    gates_only_raw = Circuit(2, 0, tuple(op for op in raw.ops if op.kind != "measure"))
    gates_only_slim = Circuit(2, 0, tuple(op for op in slim.ops if op.kind != "measure"))
    bound_raw = bind_parameters(gates_only_raw, {"a": 0.31})
    bound_slim = bind_parameters(gates_only_slim, {"a": 0.31})
    assert phase_aligned_deviation(unitary_of(bound_slim), unitary_of(bound_raw)) <= 1e-9
