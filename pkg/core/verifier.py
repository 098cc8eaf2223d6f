"""
Stoquastic Verifier Semantics
Register layouts, exact acceptance, SWAP and branch-overlap tests, Gamma form
"""

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np
from loguru import logger

from core.arith import ArithmeticMode, Scalar, half, inverse_power_of_two, parse_mode, total
from core.errors import CapExceededError, InstanceError, PreconditionError
from core.revsim import X, GateKind, ReversibleCircuit, compose, controlled_gates, inverse, load_circuit, relabel
from core.sepval import PartitionedMatrix
from core.states import DensityMatrix, NonNegativeState

DENSE_WIDTH_CAP = 22
SPARSE_SUPPORT_CAP = 1 << 16
SPARSE_PLUS_CAP = 10
MATRIX_WIDTH_CAP = 22
MATRIX_WITNESS_CAP = 12
CHUNK_SIZE = 1 << 20


@dataclass(frozen=True)
class VerifierLayout:
    """
    Qubit order: witness blocks [0, k*ell), then n0 zero ancillas, then nplus
    plus ancillas. Prover i owns [i*ell, (i+1)*ell).
    """
    k: int
    ell: int
    n0: int
    nplus: int
    output: int

    def __post_init__(self):
        if min(self.k, self.ell, self.n0, self.nplus) < 0 or self.k < 1:
            raise InstanceError(f"invalid layout {self}")
        if not 0 <= self.output < self.width:
            raise InstanceError(f"output {self.output} outside width {self.width}")

    @property
    def witness_width(self) -> int:
        return self.k * self.ell

    @property
    def zero_offset(self) -> int:
        return self.witness_width

    @property
    def plus_offset(self) -> int:
        return self.witness_width + self.n0

    @property
    def width(self) -> int:
        return self.witness_width + self.n0 + self.nplus

    @property
    def witness_mask(self) -> int:
        return (1 << self.witness_width) - 1

    @property
    def zero_mask(self) -> int:
        return ((1 << self.n0) - 1) << self.zero_offset

    def block(self, prover: int):
        return list(range(prover * self.ell, (prover + 1) * self.ell))

    def to_dict(self) -> Dict[str, int]:
        return {"k": self.k, "ell": self.ell, "n0": self.n0, "nplus": self.nplus, "output": self.output}


@dataclass(frozen=True)
class StoqVerifier:
    """Reversible circuit plus register layout"""
    circuit: ReversibleCircuit
    layout: VerifierLayout

    def __post_init__(self):
        if self.circuit.width != self.layout.width:
            raise InstanceError(f"circuit width {self.circuit.width} != layout width {self.layout.width}")

    @property
    def k(self) -> int:
        return self.layout.k

    @property
    def ell(self) -> int:
        return self.layout.ell

    def to_dict(self) -> Dict[str, Any]:
        data = self.circuit.to_dict()
        data["layout"] = self.layout.to_dict()
        return data


@dataclass(frozen=True)
class Thresholds:
    """Completeness c and soundness s of a promise problem"""
    c: Fraction
    s: Fraction

    def __post_init__(self):
        object.__setattr__(self, "c", Fraction(self.c).limit_denominator(1 << 40))
        object.__setattr__(self, "s", Fraction(self.s).limit_denominator(1 << 40))
        if not Fraction(1, 2) <= self.s < self.c <= 1:
            raise PreconditionError(f"thresholds need 1/2 <= s < c <= 1, got c={self.c}, s={self.s}")

    @property
    def delta(self) -> Fraction:
        return self.c - self.s


def load_verifier(data: Dict[str, Any]) -> StoqVerifier:
    """Parse circuit JSON extended with a 'layout' block"""
    if "layout" not in data:
        raise InstanceError("verifier JSON needs a 'layout' block")
    raw = data["layout"]
    try:
        layout = VerifierLayout(int(raw["k"]), int(raw["ell"]), int(raw["n0"]), int(raw["nplus"]), int(raw["output"]))
    except (KeyError, TypeError, ValueError) as e:
        raise InstanceError(f"bad layout block: {e}")
    return StoqVerifier(load_circuit(data), layout)


def _check_caps(layout: VerifierLayout, support: int) -> None:
    if layout.width > 62:
        raise CapExceededError(f"width {layout.width} exceeds the 62-qubit integer encoding")
    if layout.width <= DENSE_WIDTH_CAP:
        return
    if support > SPARSE_SUPPORT_CAP or support << layout.nplus > SPARSE_SUPPORT_CAP << SPARSE_PLUS_CAP:
        raise CapExceededError(
            f"width {layout.width} with support {support} and {layout.nplus} plus ancillas exceeds simulation caps"
        )


def gamma_overlap(circuit: ReversibleCircuit, layout: VerifierLayout, witness: NonNegativeState,
                  mode: Optional[Union[str, ArithmeticMode]] = None) -> Scalar:
    """
    <Psi|P_Gamma|Psi> for Psi = witness (x) |0...0> (x) |+...+>

    Enumerates witness support times plus branches; images whose zero ancillas
    are not all 0 contribute nothing.
    """
    mode = witness.mode if mode is None else parse_mode(mode)
    if circuit.width != layout.width:
        raise InstanceError(f"circuit width {circuit.width} != layout width {layout.width}")
    if witness.width != layout.witness_width:
        raise InstanceError(f"witness width {witness.width} != k*ell = {layout.witness_width}")
    keys = witness.keys_array()
    n_keys = len(keys)
    _check_caps(layout, n_keys)

    amps = witness.values()
    amps_f = np.array([float(a) for a in amps])
    n_plus = 1 << layout.nplus
    per_chunk = max(1, CHUNK_SIZE // n_keys)
    zero_mask = np.int64(layout.zero_mask)
    witness_mask = np.int64(layout.witness_mask)
    pairs: Counter = Counter()
    acc = 0.0

    for start in range(0, n_plus, per_chunk):
        plus_vals = np.arange(start, min(n_plus, start + per_chunk), dtype=np.int64)
        xs = (keys[:, None] | (plus_vals[None, :] << np.int64(layout.plus_offset))).ravel()
        src = np.repeat(np.arange(n_keys), len(plus_vals))
        ys = circuit.apply_array(xs)
        yw = ys & witness_mask
        pos = np.minimum(np.searchsorted(keys, yw), n_keys - 1)
        hit = ((ys & zero_mask) == 0) & (keys[pos] == yw)
        if mode is ArithmeticMode.FLOAT:
            acc += float(np.dot(amps_f[src[hit]], amps_f[pos[hit]]))
        else:
            combined, counts = np.unique(src[hit] * n_keys + pos[hit], return_counts=True)
            for code, count in zip(combined.tolist(), counts.tolist()):
                pairs[code] += count

    if mode is ArithmeticMode.FLOAT:
        return acc / n_plus
    terms = [count * amps[code // n_keys] * amps[code % n_keys] for code, count in sorted(pairs.items())]
    return total(terms, mode) * inverse_power_of_two(layout.nplus, mode)


def gamma_form(v: StoqVerifier) -> ReversibleCircuit:
    """Gamma = V^dagger X_O V as a gate list"""
    gates = v.circuit.gates + (X(v.layout.output),) + tuple(reversed(v.circuit.gates))
    return ReversibleCircuit(v.circuit.width, gates)


def acceptance_probability(v: StoqVerifier, witness: NonNegativeState,
                           mode: Optional[Union[str, ArithmeticMode]] = None) -> Scalar:
    """
    Probability that the output qubit is measured as + in the Hadamard basis

    Args:
        v: Verifier
        witness: Non-negative state on the k*ell witness qubits
        mode: Arithmetic backend (defaults to the witness's)

    Returns:
        1/2 + 1/2 <Psi|V^dagger X_O V|Psi>
    """
    mode = witness.mode if mode is None else parse_mode(mode)
    overlap = gamma_overlap(gamma_form(v), v.layout, witness, mode)
    return half(mode) + half(mode) * overlap


def branch_overlap_acceptance(r0: ReversibleCircuit, r1: ReversibleCircuit, witness: NonNegativeState,
                              layout: VerifierLayout, mode: Optional[Union[str, ArithmeticMode]] = None) -> Scalar:
    """(1 + <R0 Psi|R1 Psi>) / 2"""
    mode = witness.mode if mode is None else parse_mode(mode)
    if r0.width != layout.width or r1.width != layout.width:
        raise InstanceError(f"branch circuits must have layout width {layout.width}")
    overlap = gamma_overlap(compose(r1, inverse(r0)), layout, witness, mode)
    return half(mode) + half(mode) * overlap


def build_branch_overlap_verifier(r0: ReversibleCircuit, r1: ReversibleCircuit, layout: VerifierLayout) -> StoqVerifier:
    """
    Explicit verifier X_F; C_F(R0); X_F; C_F(R1) with a fresh plus control F as output

    A clean zero ancilla is appended to the zero register when either branch
    holds a Toffoli.
    """
    if r0.width != layout.width or r1.width != layout.width:
        raise InstanceError(f"branch circuits must have layout width {layout.width}")
    needs_helper = any(g.kind is GateKind.CCX for g in r0.gates + r1.gates)
    extra_zero = 1 if needs_helper else 0
    n0 = layout.n0 + extra_zero
    width = layout.width + extra_zero + 1
    mapping = [q if q < layout.plus_offset else q + extra_zero for q in range(layout.width)]
    helper = layout.plus_offset if needs_helper else None
    control = width - 1

    gates = []
    if r0.gates:
        gates.append(X(control))
        for gate in relabel(r0, mapping, width).gates:
            gates.extend(controlled_gates(gate, control, helper))
        gates.append(X(control))
    for gate in relabel(r1, mapping, width).gates:
        gates.extend(controlled_gates(gate, control, helper))

    new_layout = VerifierLayout(layout.k, layout.ell, n0, layout.nplus + 1, control)
    logger.debug(f"Branch-overlap verifier: width={width}, gates={len(gates)}")
    return StoqVerifier(ReversibleCircuit(width, tuple(gates)), new_layout)


def swap_test_acceptance(rho0: DensityMatrix, rho1: DensityMatrix) -> float:
    if rho0.dimension != rho1.dimension:
        raise InstanceError(f"dimension mismatch: {rho0.dimension} vs {rho1.dimension}")
    return 0.5 + 0.5 * float(np.trace(rho0.entries @ rho1.entries))


def close_image_fidelity(r: ReversibleCircuit, layout: VerifierLayout, witness: NonNegativeState,
                         zero_qubits: Sequence[int], plus_qubits: Sequence[int] = (),
                         mode: Optional[Union[str, ArithmeticMode]] = None) -> Scalar:
    """
    F^2 between the reduced output state of R(Psi) and |0>^{r0} (x) |+>^{r+}

    Args:
        r: Circuit producing the image state
        layout: Register layout of r
        witness: Witness state
        zero_qubits: Output qubits compared with |0>
        plus_qubits: Output qubits compared with |+>
    """
    mode = witness.mode if mode is None else parse_mode(mode)
    designated = list(zero_qubits) + list(plus_qubits)
    if len(set(designated)) != len(designated) or any(not 0 <= q < layout.width for q in designated):
        raise InstanceError(f"bad output designation {designated}")
    if r.width != layout.width or witness.width != layout.witness_width:
        raise InstanceError("circuit, layout and witness widths disagree")
    _check_caps(layout, len(witness.amplitudes))

    zmask = sum(1 << q for q in zero_qubits)
    out_mask = sum(1 << q for q in designated)
    keys = witness.keys_array()
    amps = witness.values()
    n_plus = 1 << layout.nplus
    xs = (keys[:, None] | (np.arange(n_plus, dtype=np.int64)[None, :] << np.int64(layout.plus_offset))).ravel()
    src = np.repeat(np.arange(len(keys)), n_plus)
    ys = r.apply_array(xs)
    keep = (ys & np.int64(zmask)) == 0
    buckets: Dict[int, list] = {}
    for rest, i in zip((ys[keep] & ~np.int64(out_mask)).tolist(), src[keep].tolist()):
        buckets.setdefault(rest, []).append(amps[i])
    squares = [total(vals, mode) ** 2 for _, vals in sorted(buckets.items())]
    # each amplitude carries 2^{-nplus/2}; the |+> pattern contributes 2^{-r+/2}
    return total(squares, mode) * inverse_power_of_two(layout.nplus + len(plus_qubits), mode)


def close_image_acceptance(fidelity_squared: Scalar) -> Scalar:
    return (1 + fidelity_squared) / 2


def _factor_order(matrix: np.ndarray, k: int, d: int) -> np.ndarray:
    """Reindex a little-endian witness matrix so factor 0 is prover 0"""
    if k == 1:
        return matrix
    tensor = matrix.reshape([d] * (2 * k))
    axes = list(range(k - 1, -1, -1)) + list(range(2 * k - 1, k - 1, -1))
    return tensor.transpose(axes).reshape(d ** k, d ** k)


def overlap_matrix(gamma: ReversibleCircuit, layout: VerifierLayout) -> PartitionedMatrix:
    """
    Non-negative M with <Psi|P_Gamma|Psi> = psi^T M psi on witnesses psi

    The matrix is indexed with prover 0 as the most significant factor, so
    product witnesses psi_1 (x) ... (x) psi_k map to np.kron(psi_1, ..., psi_k).
    """
    if layout.witness_width > MATRIX_WITNESS_CAP or layout.witness_width + layout.nplus > MATRIX_WIDTH_CAP:
        raise CapExceededError(f"acceptance matrix over {layout.witness_width} witness qubits and "
                               f"{layout.nplus} plus ancillas exceeds caps {MATRIX_WITNESS_CAP}/{MATRIX_WIDTH_CAP}")
    if gamma.width != layout.width:
        raise InstanceError(f"circuit width {gamma.width} != layout width {layout.width}")
    dim = 1 << layout.witness_width
    n_plus = 1 << layout.nplus
    cols = np.repeat(np.arange(dim, dtype=np.int64), n_plus)
    xs = cols | (np.tile(np.arange(n_plus, dtype=np.int64), dim) << np.int64(layout.plus_offset))
    ys = gamma.apply_array(xs)
    hit = (ys & np.int64(layout.zero_mask)) == 0
    m = np.zeros((dim, dim))
    np.add.at(m, ((ys[hit] & np.int64(layout.witness_mask)), cols[hit]), 1.0)
    m /= n_plus
    m = 0.5 * (m + m.T)
    d = 1 << layout.ell
    return PartitionedMatrix([d] * layout.k, _factor_order(m, layout.k, d))


def acceptance_matrix(v: StoqVerifier) -> PartitionedMatrix:
    """Non-negative M with acceptance(psi) = 1/2 + 1/2 psi^T M psi on witnesses"""
    return overlap_matrix(gamma_form(v), v.layout)


def witness_vector(witness: NonNegativeState, k: int, ell: int) -> np.ndarray:
    """Dense witness vector in the factor order used by acceptance_matrix"""
    vec = witness.to_vector()
    if k == 1:
        return vec
    return vec.reshape([1 << ell] * k).transpose(list(range(k - 1, -1, -1))).ravel()


def acceptance_from_matrix(m: PartitionedMatrix, vector: np.ndarray) -> float:
    return 0.5 + 0.5 * float(vector @ m.entries @ vector)
