"""
Circuit builder: predicate cubes, ladders, controlled blocks and layout
"""

import pytest
import sympy

from core.arith import ArithmeticMode
from core.builder import CircuitBuilder, overlap_verifier, range_cubes, value_cubes
from core.errors import InstanceError, PreconditionError
from core.revsim import ReversibleCircuit
from core.states import NonNegativeState
from core.verifier import StoqVerifier, VerifierLayout, acceptance_probability

RATIONAL = ArithmeticMode.RATIONAL


def covers(cube, register, value: int) -> bool:
    positions = {q: b for b, q in enumerate(register)}
    return all((value >> positions[q]) & 1 == bit for q, bit in cube)


@pytest.fixture
def builder():
    return CircuitBuilder(1, 5)


class TestCubes:
    """Dyadic cube covers of value sets"""

    def test_range_cubes_cover_exactly(self):
        register = CircuitBuilder(1, 3).witness_block(0)
        cubes = range_cubes(register, 1, 6)
        assert len(cubes) == 3
        for value in range(8):
            hits = sum(covers(c, register, value) for c in cubes)
            assert hits == (1 if 1 <= value < 6 else 0)

    def test_range_outside_register(self):
        register = CircuitBuilder(1, 2).witness_block(0)
        with pytest.raises(PreconditionError):
            range_cubes(register, 0, 5)

    def test_value_cubes_merge(self):
        register = CircuitBuilder(1, 2).witness_block(0)
        assert value_cubes(register, [0, 1]) == [((register[1], 0),)]

    def test_full_register_is_one_free_cube(self):
        register = CircuitBuilder(1, 2).witness_block(0)
        assert value_cubes(register, range(4)) == [()]


class TestGates:
    """Ladders restore their work ancillas"""

    def test_four_control_ladder(self, builder):
        w = builder.witness_block(0)
        builder.mcx(w[:4], w[4])
        circuit, layout = builder.finish()
        assert layout.n0 == 2
        assert circuit.width == 7
        for x in range(32):
            expected = x ^ (1 << 4) if x & 0b1111 == 0b1111 else x
            assert circuit.apply(x) == expected

    def test_collision(self, builder):
        w = builder.witness_block(0)
        with pytest.raises(PreconditionError):
            builder.mcx([w[0], w[1]], w[1])

    def test_permute_blocks(self):
        b = CircuitBuilder(3, 1)
        b.permute_blocks([b.witness_block(i) for i in range(3)], [2, 0, 1])
        circuit, _ = b.finish()
        assert circuit.apply(0b001) == 0b010
        assert circuit.apply(0b100) == 0b001

    def test_witness_out_of_range(self, builder):
        with pytest.raises(InstanceError):
            builder.witness(1, 0)


class TestControlledBlocks:
    """Nested controls fold into a clean ancilla"""

    def test_nested_control(self):
        b = CircuitBuilder(1, 3)
        w = b.witness_block(0)
        with b.controlled_by(w[0]):
            with b.controlled_by(w[1]):
                b.x(w[2])
        circuit, layout = b.finish()
        assert layout.n0 == 1
        for x in range(8):
            expected = x ^ 0b100 if x & 0b11 == 0b11 else x
            assert circuit.apply(x) == expected

    def test_controlled_swap(self):
        b = CircuitBuilder(1, 3)
        w = b.witness_block(0)
        with b.controlled_by(w[0]):
            b.swap(w[1], w[2])
        circuit, _ = b.finish()
        assert circuit.apply(0b011) == 0b101
        assert circuit.apply(0b010) == 0b010

    def test_finish_inside_block(self, builder):
        with pytest.raises(PreconditionError):
            with builder.controlled_by(builder.witness(0, 0)):
                builder.finish()

    def test_mark_and_flag(self):
        b = CircuitBuilder(1, 2)
        w = b.witness_block(0)
        target = b.zeros(1)[0]
        b.mark(value_cubes(w, [1, 2]), target)
        circuit, _ = b.finish(output=target)
        for x in range(4):
            assert (circuit.apply(x) >> 2) & 1 == (1 if x in (1, 2) else 0)


class TestOverlapVerifier:
    """Gamma maps become branch-overlap verifiers"""

    def test_swap_gamma(self):
        b = CircuitBuilder(2, 1)
        b.swap(b.witness(0, 0), b.witness(1, 0))
        gamma, layout = b.finish()
        v = overlap_verifier(gamma, layout)
        assert acceptance_probability(v, NonNegativeState.basis(2, 0, RATIONAL)) == 1
        assert acceptance_probability(v, NonNegativeState.basis(2, 1, RATIONAL)) == sympy.Rational(1, 2)

    def test_append_gamma_checks_shape(self):
        layout = VerifierLayout(2, 1, 0, 0, 0)
        v = StoqVerifier(ReversibleCircuit(2, ()), layout)
        b = CircuitBuilder(1, 2)
        with pytest.raises(InstanceError):
            b.append_gamma(v, [b.witness_block(0)], [], [])
