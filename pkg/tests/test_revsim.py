"""
Reversible circuit simulator and arithmetic backends
"""

import numpy as np
import pytest
import sympy

from core.arith import ArithmeticMode, as_fraction, exact_equal, parse_mode, to_scalar, to_text
from core.errors import CapExceededError, InstanceError, PreconditionError
from core.revsim import (
    CCX,
    CNOT,
    X,
    Gate,
    GateKind,
    ReversibleCircuit,
    apply,
    bits_to_int,
    compose,
    controlled,
    controlled_swap,
    identity,
    int_to_bits,
    load_circuit,
    random_circuit,
    relabel
)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


class TestGates:
    """Gate validation"""

    def test_arity_checked(self):
        with pytest.raises(InstanceError):
            Gate(GateKind.CNOT, (0,))

    def test_repeated_qubit_rejected(self):
        with pytest.raises(InstanceError):
            CCX(0, 0, 1)

    def test_out_of_range_gate_rejected(self):
        with pytest.raises(InstanceError):
            ReversibleCircuit(2, (CNOT(0, 2),))


class TestApply:
    """Basis-string semantics, qubit 0 written first"""

    def test_bit_conventions(self):
        assert bits_to_int("10") == 1
        assert int_to_bits(1, 3) == "100"

    def test_toffoli_flips_only_when_both_controls_set(self):
        circuit = ReversibleCircuit(3, (CCX(0, 1, 2),))
        assert apply(circuit, "110") == "111"
        assert apply(circuit, "100") == "100"
        assert apply(circuit, "011") == "011"

    def test_integer_input_keeps_integer_output(self):
        circuit = ReversibleCircuit(2, (X(1),))
        assert apply(circuit, 0) == 2

    def test_wrong_length_input(self):
        with pytest.raises(InstanceError):
            apply(identity(3), "01")

    def test_compose_runs_first_then_second(self):
        first = ReversibleCircuit(2, (X(0),))
        second = ReversibleCircuit(2, (CNOT(0, 1),))
        assert apply(compose(first, second), "00") == "11"
        assert apply(compose(second, first), "00") == "10"

    def test_compose_width_mismatch(self):
        with pytest.raises(InstanceError):
            compose(identity(2), identity(3))


class TestPermutation:
    """Every circuit is a bijection and its inverse undoes it"""

    def test_random_circuits_are_bijective(self, rng):
        for width in range(1, 7):
            assert random_circuit(width, 20, rng).is_bijective()

    def test_inverse_round_trip(self, rng):
        circuit = random_circuit(5, 30, rng)
        round_trip = compose(circuit, circuit.inverse()).permutation()
        assert np.array_equal(round_trip, np.arange(32))

    def test_array_matches_scalar_apply(self, rng):
        circuit = random_circuit(6, 25, rng)
        xs = np.arange(64, dtype=np.int64)
        assert [circuit.apply(int(x)) for x in xs] == circuit.apply_array(xs).tolist()

    def test_permutation_cap(self):
        with pytest.raises(CapExceededError):
            identity(21).permutation()


class TestControlled:
    """Controlled circuits act only when the control is set"""

    def test_controlled_toffoli_with_ancilla(self, rng):
        base = ReversibleCircuit(5, (CCX(0, 1, 2), X(0), CNOT(1, 2)))
        wrapped = controlled(base, control=3, ancilla=4)
        for x in range(8):
            off = x
            on = x | (1 << 3)
            assert wrapped.apply(off) == off
            assert wrapped.apply(on) == base.apply(x) | (1 << 3)

    def test_controlled_toffoli_needs_ancilla(self):
        with pytest.raises(PreconditionError):
            controlled(ReversibleCircuit(4, (CCX(0, 1, 2),)), control=3)

    def test_control_used_by_circuit(self):
        with pytest.raises(PreconditionError):
            controlled(ReversibleCircuit(2, (CNOT(0, 1),)), control=0)

    def test_controlled_swap(self):
        circuit = ReversibleCircuit(3, tuple(controlled_swap(0, 1, 2)))
        assert apply(circuit, "110") == "101"
        assert apply(circuit, "010") == "010"


class TestRelabel:
    def test_relabel_moves_qubits(self):
        circuit = ReversibleCircuit(2, (CNOT(0, 1),))
        moved = relabel(circuit, [3, 1], 4)
        assert moved.gates == (CNOT(3, 1),)
        assert moved.width == 4


class TestLoadCircuit:
    """Circuit JSON"""

    def test_loads_gates(self):
        circuit = load_circuit({"width": 3, "gates": [{"kind": "CCX", "qubits": [0, 1, 2]}, {"kind": "X", "qubits": [0]}]})
        assert len(circuit) == 2
        assert circuit.count() == {"X": 1, "CNOT": 0, "CCX": 1}

    @pytest.mark.parametrize("data", [
        {"gates": []},
        {"width": 2, "gates": [{"kind": "H", "qubits": [0]}]},
        {"width": 2, "gates": [{"kind": "X", "qubits": [5]}]},
        {"width": 2, "gates": [{"kind": "CNOT", "qubits": [0, "1"]}]},
    ])
    def test_malformed(self, data):
        with pytest.raises(InstanceError):
            load_circuit(data)


class TestArithmetic:
    """Scalar backends"""

    def test_rational_strings_stay_exact(self):
        value = to_scalar("1/3", ArithmeticMode.RATIONAL)
        assert value == sympy.Rational(1, 3)
        assert to_text(value) == "1/3"

    def test_radicals_compare_exactly(self):
        assert exact_equal(sympy.sqrt(2) / 2, 1 / sympy.sqrt(2))

    def test_as_fraction_rejects_irrational(self):
        with pytest.raises(ValueError):
            as_fraction(sympy.sqrt(2))

    def test_parse_mode(self):
        assert parse_mode("Rational") is ArithmeticMode.RATIONAL
        with pytest.raises(InstanceError):
            parse_mode("complex")
