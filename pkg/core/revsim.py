"""
Reversible Circuit Simulator
X / CNOT / Toffoli circuits viewed as permutations of basis strings
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from core.errors import CapExceededError, InstanceError, PreconditionError

BitString = Union[str, int]

PERMUTATION_WIDTH_CAP = 20


class GateKind(str, Enum):
    """Gate set of stoquastic verification circuits"""
    X = "X"
    CNOT = "CNOT"
    CCX = "CCX"


ARITY = {GateKind.X: 1, GateKind.CNOT: 2, GateKind.CCX: 3}


@dataclass(frozen=True)
class Gate:
    """A single gate; the last qubit is the target"""
    kind: GateKind
    qubits: Tuple[int, ...]

    def __post_init__(self):
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(self.qubits) != ARITY[kind]:
            raise InstanceError(f"{kind.value} takes {ARITY[kind]} qubits, got {list(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise InstanceError(f"repeated qubit in {kind.value}{list(self.qubits)}")
        if any(q < 0 for q in self.qubits):
            raise InstanceError(f"negative qubit index in {kind.value}{list(self.qubits)}")

    @property
    def controls(self) -> Tuple[int, ...]:
        return self.qubits[:-1]

    @property
    def target(self) -> int:
        return self.qubits[-1]

    @property
    def control_mask(self) -> int:
        mask = 0
        for q in self.controls:
            mask |= 1 << q
        return mask

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "qubits": list(self.qubits)}

    def __str__(self) -> str:
        return f"{self.kind.value}({','.join(str(q) for q in self.qubits)})"


def X(target: int) -> Gate:
    return Gate(GateKind.X, (target,))


def CNOT(control: int, target: int) -> Gate:
    return Gate(GateKind.CNOT, (control, target))


def CCX(control1: int, control2: int, target: int) -> Gate:
    return Gate(GateKind.CCX, (control1, control2, target))


@dataclass(frozen=True)
class ReversibleCircuit:
    """
    Gate list over a fixed width; gates act left to right.

    Basis strings are integers with qubit i stored in bit i. The textual form
    writes qubit 0 first, so "10" is the integer 1.
    """
    width: int
    gates: Tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.width < 0:
            raise InstanceError(f"negative width {self.width}")
        for gate in self.gates:
            if max(gate.qubits) >= self.width:
                raise InstanceError(f"gate {gate} out of range for width {self.width}")

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: "ReversibleCircuit") -> "ReversibleCircuit":
        return compose(self, other)

    def apply(self, x: int) -> int:
        for gate in self.gates:
            mask = gate.control_mask
            if x & mask == mask:
                x ^= 1 << gate.target
        return x

    def apply_array(self, xs: np.ndarray) -> np.ndarray:
        """Vectorised application to an int64 array of basis strings"""
        ys = np.array(xs, dtype=np.int64, copy=True)
        for gate in self.gates:
            mask = np.int64(gate.control_mask)
            bit = np.int64(1 << gate.target)
            if mask == 0:
                ys ^= bit
            else:
                hit = (ys & mask) == mask
                ys ^= hit.astype(np.int64) * bit
        return ys

    def inverse(self) -> "ReversibleCircuit":
        return ReversibleCircuit(self.width, tuple(reversed(self.gates)))

    def permutation(self) -> np.ndarray:
        """Image of every basis string, indexed by input"""
        if self.width > PERMUTATION_WIDTH_CAP:
            raise CapExceededError(f"permutation table of width {self.width} exceeds cap {PERMUTATION_WIDTH_CAP}")
        return self.apply_array(np.arange(1 << self.width, dtype=np.int64))

    def is_bijective(self) -> bool:
        image = self.permutation()
        return len(np.unique(image)) == len(image)

    def qubits_used(self) -> List[int]:
        return sorted({q for gate in self.gates for q in gate.qubits})

    def count(self) -> Dict[str, int]:
        counts = {kind.value: 0 for kind in GateKind}
        for gate in self.gates:
            counts[gate.kind.value] += 1
        return counts

    def to_dict(self) -> Dict[str, Any]:
        return {"width": self.width, "gates": [gate.to_dict() for gate in self.gates]}

    def __str__(self) -> str:
        body = " ".join(str(gate) for gate in self.gates) or "<identity>"
        return f"ReversibleCircuit[{self.width}]: {body}"


def bits_to_int(bits: str) -> int:
    if any(ch not in "01" for ch in bits):
        raise InstanceError(f"not a bit string: {bits!r}")
    value = 0
    for i, ch in enumerate(bits):
        if ch == "1":
            value |= 1 << i
    return value


def int_to_bits(value: int, width: int) -> str:
    return "".join("1" if (value >> i) & 1 else "0" for i in range(width))


def apply(circuit: ReversibleCircuit, value: BitString) -> BitString:
    """
    Image of a basis string under the circuit's permutation

    Args:
        circuit: Circuit to run
        value: Bit string of length width, or its integer encoding

    Returns:
        Same representation as the input
    """
    if isinstance(value, str):
        if len(value) != circuit.width:
            raise InstanceError(f"input has {len(value)} bits, circuit width is {circuit.width}")
        return int_to_bits(circuit.apply(bits_to_int(value)), circuit.width)
    if value < 0 or value >= (1 << circuit.width):
        raise InstanceError(f"input {value} out of range for width {circuit.width}")
    return circuit.apply(int(value))


def inverse(circuit: ReversibleCircuit) -> ReversibleCircuit:
    return circuit.inverse()


def compose(first: ReversibleCircuit, second: ReversibleCircuit) -> ReversibleCircuit:
    """first acts, then second"""
    if first.width != second.width:
        raise InstanceError(f"width mismatch: {first.width} vs {second.width}")
    return ReversibleCircuit(first.width, first.gates + second.gates)


def controlled_gates(gate: Gate, control: int, ancilla: Optional[int] = None) -> List[Gate]:
    """Gate sequence applying gate only when control is 1"""
    if control in gate.qubits:
        raise PreconditionError(f"control {control} collides with {gate}")
    if gate.kind is GateKind.X:
        return [CNOT(control, gate.target)]
    if gate.kind is GateKind.CNOT:
        return [CCX(control, gate.controls[0], gate.target)]
    if ancilla is None:
        raise PreconditionError(f"controlling {gate} needs a clean ancilla")
    if ancilla in gate.qubits or ancilla == control:
        raise PreconditionError(f"ancilla {ancilla} collides with {gate} or control {control}")
    c1, c2 = gate.controls
    return [CCX(c1, c2, ancilla), CCX(control, ancilla, gate.target), CCX(c1, c2, ancilla)]


def controlled(circuit: ReversibleCircuit, control: int, ancilla: Optional[int] = None) -> ReversibleCircuit:
    """
    Control every gate of a circuit on one qubit

    Args:
        circuit: Circuit to control
        control: Control qubit, disjoint from the circuit's qubits
        ancilla: Clean zero qubit used to decompose controlled Toffolis

    Returns:
        Circuit of the same width
    """
    if control >= circuit.width:
        raise InstanceError(f"control {control} out of range for width {circuit.width}")
    if control in circuit.qubits_used():
        raise PreconditionError(f"control {control} is used by the circuit")
    if ancilla is not None:
        if ancilla >= circuit.width:
            raise InstanceError(f"ancilla {ancilla} out of range for width {circuit.width}")
        if ancilla in circuit.qubits_used():
            raise PreconditionError(f"ancilla {ancilla} is used by the circuit")
    gates: List[Gate] = []
    for gate in circuit.gates:
        gates.extend(controlled_gates(gate, control, ancilla))
    return ReversibleCircuit(circuit.width, tuple(gates))


def controlled_swap(control: int, a: int, b: int) -> List[Gate]:
    """Fredkin gate as two CNOTs around a Toffoli"""
    return [CNOT(b, a), CCX(control, a, b), CNOT(b, a)]


def relabel(circuit: ReversibleCircuit, mapping: Union[Sequence[int], Mapping[int, int]], width: int) -> ReversibleCircuit:
    """Move qubit i of circuit to mapping[i] inside a register of the given width"""
    remapped = [Gate(g.kind, tuple(mapping[q] for q in g.qubits)) for g in circuit.gates]
    return ReversibleCircuit(width, tuple(remapped))


def identity(width: int) -> ReversibleCircuit:
    return ReversibleCircuit(width, ())


def random_circuit(width: int, n_gates: int, rng: np.random.Generator,
                   kinds: Iterable[GateKind] = tuple(GateKind)) -> ReversibleCircuit:
    """Uniformly random gate list; kinds wider than the register are skipped"""
    allowed = [kind for kind in kinds if ARITY[kind] <= width]
    if not allowed:
        raise PreconditionError(f"no gate kind fits width {width}")
    gates = []
    for _ in range(n_gates):
        kind = allowed[int(rng.integers(len(allowed)))]
        qubits = rng.choice(width, size=ARITY[kind], replace=False)
        gates.append(Gate(kind, tuple(int(q) for q in qubits)))
    return ReversibleCircuit(width, tuple(gates))


def load_circuit(data: Dict[str, Any]) -> ReversibleCircuit:
    """
    Parse the circuit JSON form {"width": n, "gates": [{"kind": ..., "qubits": [...]}]}

    Raises:
        InstanceError: on malformed kinds, arities or indices
    """
    if not isinstance(data, dict) or "width" not in data:
        raise InstanceError("circuit JSON needs a 'width' field")
    try:
        width = int(data["width"])
    except (TypeError, ValueError):
        raise InstanceError(f"bad circuit width: {data.get('width')!r}")
    gates = []
    for index, raw in enumerate(data.get("gates", [])):
        try:
            kind = GateKind(raw["kind"])
        except (KeyError, TypeError, ValueError):
            raise InstanceError(f"gate {index}: unknown kind {raw!r}")
        qubits = raw.get("qubits")
        if not isinstance(qubits, list) or not all(isinstance(q, int) and not isinstance(q, bool) for q in qubits):
            raise InstanceError(f"gate {index}: qubits must be a list of integers")
        gates.append(Gate(kind, tuple(qubits)))
    circuit = ReversibleCircuit(width, tuple(gates))
    logger.debug(f"Loaded circuit: width={width}, gates={len(gates)}")
    return circuit
