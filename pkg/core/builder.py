"""
Circuit Builder
Virtual-register assembly of stoquastic circuits: predicate oracles, controlled blocks, embedding
"""

from contextlib import contextmanager
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

from loguru import logger

from core.errors import InstanceError, PreconditionError
from core.revsim import CCX, CNOT, GateKind, ReversibleCircuit, X, identity
from core.verifier import StoqVerifier, VerifierLayout, build_branch_overlap_verifier, gamma_form


class RegisterKind(str, Enum):
    WITNESS = "witness"
    ZERO = "zero"
    PLUS = "plus"


@dataclass(frozen=True)
class Qubit:
    """Virtual qubit; physical indices are assigned by CircuitBuilder.finish"""
    kind: RegisterKind
    index: int


# A cube fixes some qubits to bit values; the free qubits are unconstrained.
Cube = Tuple[Tuple[Qubit, int], ...]


def range_cubes(register: Sequence[Qubit], lo: int, hi: int) -> List[Cube]:
    """
    Disjoint aligned dyadic cubes covering the integers [lo, hi) on a register

    The register is little-endian: register[0] carries bit 0.
    """
    width = len(register)
    if not 0 <= lo <= hi <= (1 << width):
        raise PreconditionError(f"range [{lo}, {hi}) outside a {width}-qubit register")
    cubes = []
    while lo < hi:
        size = 0
        while size < width and lo % (1 << (size + 1)) == 0 and lo + (1 << (size + 1)) <= hi:
            size += 1
        cubes.append(tuple((register[b], (lo >> b) & 1) for b in range(size, width)))
        lo += 1 << size
    return cubes


def value_cubes(register: Sequence[Qubit], values: Iterable[int]) -> List[Cube]:
    """Point cubes for a set of register values, merged where two differ in one free bit"""
    width = len(register)
    current = {((1 << width) - 1, int(v)) for v in values}
    merged = True
    while merged:
        merged = False
        used, result = set(), set()
        for mask, val in sorted(current):
            if (mask, val) in used:
                continue
            for b in range(width):
                bit = 1 << b
                partner = (mask, val | bit)
                if mask & bit and not val & bit and partner in current and partner not in used:
                    used.update({(mask, val), partner})
                    result.add((mask & ~bit, val))
                    merged = True
                    break
        current = result | (current - used)
    return [tuple((register[b], (val >> b) & 1) for b in range(width) if mask >> b & 1)
            for mask, val in sorted(current)]


def joint_cubes(registers: Sequence[Sequence[Qubit]], assignments: Iterable[Sequence[int]]) -> List[Cube]:
    """Point cubes for tuples of register values, one value per register"""
    flat = [q for reg in registers for q in reg]
    values = []
    for assignment in assignments:
        code, shift = 0, 0
        for reg, val in zip(registers, assignment):
            code |= int(val) << shift
            shift += len(reg)
        values.append(code)
    return value_cubes(flat, values)


class CircuitBuilder:
    """
    Records a reversible circuit over virtual witness, zero and plus qubits

    Every emitted gate honours the active control. Controls nest by folding
    into a fresh clean ancilla, so at most one control qubit is ever active.
    Multi-controlled X gates are expanded into Toffoli ladders on clean
    ancillas that are restored and pooled for reuse.
    """

    def __init__(self, k: int, ell: int):
        if k < 1 or ell < 0:
            raise InstanceError(f"invalid witness shape k={k}, ell={ell}")
        self.k = k
        self.ell = ell
        self._counts = {RegisterKind.ZERO: 0, RegisterKind.PLUS: 0}
        self._gates: List[Tuple[GateKind, Tuple[Qubit, ...]]] = []
        self._control: Optional[Qubit] = None
        self._pool: List[Qubit] = []

    # Registers

    def witness(self, prover: int, i: int) -> Qubit:
        if not (0 <= prover < self.k and 0 <= i < self.ell):
            raise InstanceError(f"witness qubit ({prover}, {i}) outside k={self.k}, ell={self.ell}")
        return Qubit(RegisterKind.WITNESS, prover * self.ell + i)

    def witness_block(self, prover: int) -> List[Qubit]:
        return [self.witness(prover, i) for i in range(self.ell)]

    def _allocate(self, kind: RegisterKind, n: int) -> List[Qubit]:
        start = self._counts[kind]
        self._counts[kind] += n
        return [Qubit(kind, start + i) for i in range(n)]

    def zeros(self, n: int) -> List[Qubit]:
        return self._allocate(RegisterKind.ZERO, n)

    def pluses(self, n: int) -> List[Qubit]:
        return self._allocate(RegisterKind.PLUS, n)

    def borrow_clean(self) -> Qubit:
        """A zero ancilla the caller must return to |0> before release_clean"""
        return self._pool.pop() if self._pool else self.zeros(1)[0]

    def release_clean(self, qubit: Qubit) -> None:
        self._pool.append(qubit)

    # Gates

    def _raw(self, kind: GateKind, qubits: Tuple[Qubit, ...]) -> None:
        self._gates.append((kind, qubits))

    def _ladder(self, controls: List[Qubit], target: Qubit) -> None:
        if len(controls) == 0:
            self._raw(GateKind.X, (target,))
        elif len(controls) == 1:
            self._raw(GateKind.CNOT, (controls[0], target))
        elif len(controls) == 2:
            self._raw(GateKind.CCX, (controls[0], controls[1], target))
        else:
            work = [self.borrow_clean() for _ in range(len(controls) - 2)]
            chain = [(controls[0], controls[1], work[0])]
            for i in range(1, len(work)):
                chain.append((work[i - 1], controls[i + 1], work[i]))
            for gate in chain:
                self._raw(GateKind.CCX, gate)
            self._raw(GateKind.CCX, (work[-1], controls[-1], target))
            for gate in reversed(chain):
                self._raw(GateKind.CCX, gate)
            for q in reversed(work):
                self.release_clean(q)

    def mcx(self, controls: Sequence[Qubit], target: Qubit, raw: bool = False) -> None:
        """Flip target when every control (and the active block control) is 1"""
        controls = list(controls)
        if not raw and self._control is not None:
            controls.append(self._control)
        if target in controls or len(set(controls)) != len(controls):
            raise PreconditionError(f"qubit collision in multi-controlled X on {target}")
        self._ladder(controls, target)

    def x(self, target: Qubit) -> None:
        self.mcx([], target)

    def cnot(self, control: Qubit, target: Qubit) -> None:
        self.mcx([control], target)

    def ccx(self, c1: Qubit, c2: Qubit, target: Qubit) -> None:
        self.mcx([c1, c2], target)

    def swap(self, a: Qubit, b: Qubit) -> None:
        """SWAP, or a Fredkin expansion under an active control"""
        if a == b:
            return
        self._raw(GateKind.CNOT, (b, a))
        self.mcx([a], b)
        self._raw(GateKind.CNOT, (b, a))

    def swap_blocks(self, a: Sequence[Qubit], b: Sequence[Qubit]) -> None:
        if len(a) != len(b):
            raise PreconditionError("swapped blocks differ in length")
        for qa, qb in zip(a, b):
            self.swap(qa, qb)

    def permute_blocks(self, blocks: Sequence[Sequence[Qubit]], perm: Sequence[int]) -> None:
        """Afterwards block i holds what block perm[i] held before"""
        current = list(range(len(blocks)))
        for i, wanted in enumerate(perm):
            j = current.index(wanted)
            if j != i:
                self.swap_blocks(blocks[i], blocks[j])
                current[i], current[j] = current[j], current[i]

    @contextmanager
    def controlled_by(self, control: Qubit) -> Iterator[Qubit]:
        """Every gate recorded inside the block is controlled on `control`"""
        outer = self._control
        if outer is None:
            self._control = control
            try:
                yield control
            finally:
                self._control = None
            return
        combined = self.borrow_clean()
        self._raw(GateKind.CCX, (outer, control, combined))
        self._control = combined
        try:
            yield combined
        finally:
            self._control = outer
            self._raw(GateKind.CCX, (outer, control, combined))
            self.release_clean(combined)

    # Predicates

    def mark(self, cubes: Sequence[Cube], target: Qubit, raw: bool = False) -> None:
        """target ^= [state lies in the union of the disjoint cubes]"""
        for cube in cubes:
            flips = [q for q, bit in cube if bit == 0]
            for q in flips:
                self._raw(GateKind.X, (q,))
            self.mcx([q for q, _ in cube], target, raw=raw)
            for q in flips:
                self._raw(GateKind.X, (q,))

    @contextmanager
    def flag(self, cubes: Sequence[Cube]) -> Iterator[Qubit]:
        """A clean ancilla holding the predicate for the duration of the block"""
        flag = self.borrow_clean()
        self.mark(cubes, flag, raw=True)
        try:
            yield flag
        finally:
            self.mark(cubes, flag, raw=True)
            self.release_clean(flag)

    # Embedding

    def append(self, circuit: ReversibleCircuit, mapping: Sequence[Qubit]) -> None:
        """Replay a physical circuit with qubit i sent to mapping[i]"""
        if len(mapping) != circuit.width:
            raise InstanceError(f"mapping covers {len(mapping)} of {circuit.width} qubits")
        for gate in circuit.gates:
            qubits = [mapping[q] for q in gate.qubits]
            self.mcx(qubits[:-1], qubits[-1])

    def embed_mapping(self, v: StoqVerifier, blocks: Sequence[Sequence[Qubit]],
                      zeros: Sequence[Qubit], pluses: Sequence[Qubit]) -> List[Qubit]:
        layout = v.layout
        if len(blocks) != layout.k or any(len(b) != layout.ell for b in blocks):
            raise InstanceError(f"blocks do not match verifier shape k={layout.k}, ell={layout.ell}")
        if len(zeros) != layout.n0 or len(pluses) != layout.nplus:
            raise InstanceError("ancilla registers do not match the verifier layout")
        return [q for b in blocks for q in b] + list(zeros) + list(pluses)

    def append_gamma(self, v: StoqVerifier, blocks: Sequence[Sequence[Qubit]],
                     zeros: Sequence[Qubit], pluses: Sequence[Qubit]) -> None:
        """Replay V^dagger X_O V with V's witness blocks routed to `blocks`"""
        self.append(gamma_form(v), self.embed_mapping(v, blocks, zeros, pluses))

    # Output

    @property
    def gate_count(self) -> int:
        return len(self._gates)

    def physical(self, qubit: Qubit) -> int:
        if qubit.kind is RegisterKind.WITNESS:
            return qubit.index
        if qubit.kind is RegisterKind.ZERO:
            return self.k * self.ell + qubit.index
        return self.k * self.ell + self._counts[RegisterKind.ZERO] + qubit.index

    def finish(self, output: Optional[Qubit] = None) -> Tuple[ReversibleCircuit, VerifierLayout]:
        """
        Physical circuit and layout: witness, then zero, then plus qubits

        Without an output the layout points at qubit 0; such circuits are
        Gamma maps meant for overlap_verifier.
        """
        if self._control is not None:
            raise PreconditionError("finish called inside a controlled block")
        n0 = self._counts[RegisterKind.ZERO]
        nplus = self._counts[RegisterKind.PLUS]
        layout = VerifierLayout(self.k, self.ell, n0, nplus, 0 if output is None else self.physical(output))
        gates = []
        for kind, qubits in self._gates:
            phys = [self.physical(q) for q in qubits]
            gates.append(X(*phys) if kind is GateKind.X else CNOT(*phys) if kind is GateKind.CNOT else CCX(*phys))
        circuit = ReversibleCircuit(layout.width, tuple(gates))
        logger.debug(f"[Builder] width={layout.width} (n0={n0}, nplus={nplus}) gates={len(gates)}")
        return circuit, layout


def overlap_verifier(gamma: ReversibleCircuit, layout: VerifierLayout) -> StoqVerifier:
    """Branch-overlap verifier for the pair (Gamma, I)"""
    return build_branch_overlap_verifier(identity(layout.width), gamma, layout)
