"""
Non-Negative States and Distances
Witness states, subset states, distributions and the distance / entropy toolkit
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import sympy
from loguru import logger

from core.arith import (
    FLOAT_TOLERANCE,
    ArithmeticMode,
    Scalar,
    exact_equal,
    parse_mode,
    sqrt,
    to_scalar,
    total,
)
from core.errors import InstanceError, PreconditionError
from core.revsim import bits_to_int, int_to_bits


def _is_exact(value: Any) -> bool:
    return isinstance(value, sympy.Basic)


@dataclass(frozen=True)
class NonNegativeState:
    """Sparse non-negative unit vector over basis strings of a fixed width"""
    width: int
    amplitudes: Dict[int, Scalar]
    mode: ArithmeticMode = ArithmeticMode.FLOAT

    def __post_init__(self):
        cleaned = {}
        for key, amp in self.amplitudes.items():
            key = int(key)
            if key < 0 or key >= (1 << self.width):
                raise InstanceError(f"basis index {key} out of range for width {self.width}")
            amp = to_scalar(amp, self.mode)
            if float(amp) < -FLOAT_TOLERANCE:
                raise InstanceError(f"negative amplitude {amp} on {int_to_bits(key, self.width)}")
            if amp != 0:
                cleaned[key] = amp
        if not cleaned:
            raise InstanceError("state has empty support")
        object.__setattr__(self, "amplitudes", dict(sorted(cleaned.items())))
        norm = self.norm_squared()
        if self.mode is ArithmeticMode.RATIONAL:
            if not exact_equal(norm, 1):
                raise InstanceError(f"state is not normalized: squared norm {norm}")
        elif abs(float(norm) - 1.0) > FLOAT_TOLERANCE:
            raise InstanceError(f"state is not normalized: squared norm {float(norm):.12g}")

    # Constructors

    @classmethod
    def basis(cls, width: int, index: int, mode: ArithmeticMode = ArithmeticMode.FLOAT) -> "NonNegativeState":
        return cls(width, {index: 1}, mode)

    @classmethod
    def plus(cls, width: int, mode: ArithmeticMode = ArithmeticMode.FLOAT) -> "NonNegativeState":
        return cls.subset(width, range(1 << width), mode)

    @classmethod
    def subset(cls, width: int, support: Iterable[int], mode: ArithmeticMode = ArithmeticMode.FLOAT) -> "NonNegativeState":
        keys = sorted({int(s) for s in support})
        if not keys:
            raise InstanceError("subset state needs a non-empty support")
        amp = sqrt(to_scalar(1, mode) / len(keys), mode)
        return cls(width, {key: amp for key in keys}, mode)

    @classmethod
    def from_vector(cls, vector: Sequence[float], mode: ArithmeticMode = ArithmeticMode.FLOAT) -> "NonNegativeState":
        vector = list(vector)
        width = max(0, (len(vector) - 1).bit_length())
        if 1 << width != len(vector):
            raise InstanceError(f"vector length {len(vector)} is not a power of two")
        return cls(width, {i: v for i, v in enumerate(vector) if v != 0}, mode)

    # Views

    @property
    def support(self) -> List[int]:
        return list(self.amplitudes)

    def keys_array(self) -> np.ndarray:
        return np.fromiter(self.amplitudes.keys(), dtype=np.int64, count=len(self.amplitudes))

    def values(self) -> List[Scalar]:
        return list(self.amplitudes.values())

    def amplitude(self, index: int) -> Scalar:
        return self.amplitudes.get(index, to_scalar(0, self.mode))

    def norm_squared(self) -> Scalar:
        return total((a * a for a in self.amplitudes.values()), self.mode)

    def to_vector(self) -> np.ndarray:
        vec = np.zeros(1 << self.width)
        for key, amp in self.amplitudes.items():
            vec[key] = float(amp)
        return vec

    def to_dict(self) -> Dict[str, Any]:
        amps = {}
        for key, amp in self.amplitudes.items():
            amps[int_to_bits(key, self.width)] = str(amp) if _is_exact(amp) else float(amp)
        return {"width": self.width, "amplitudes": amps}

    def as_mode(self, mode: ArithmeticMode) -> "NonNegativeState":
        if mode is self.mode:
            return self
        if mode is ArithmeticMode.FLOAT:
            return NonNegativeState(self.width, {k: float(v) for k, v in self.amplitudes.items()}, mode)
        return NonNegativeState(self.width, dict(self.amplitudes), mode)


@dataclass(frozen=True)
class Distribution:
    """Finite distribution; outcomes absent from the mapping have probability 0"""
    probabilities: Dict[Hashable, Scalar]

    def __post_init__(self):
        probs = {k: v for k, v in self.probabilities.items() if v != 0}
        if any(float(v) < -FLOAT_TOLERANCE for v in probs.values()):
            raise InstanceError("negative probability")
        mass = sum(float(v) for v in probs.values())
        if abs(mass - 1.0) > 1e-9:
            raise InstanceError(f"probabilities sum to {mass:.12g}")
        object.__setattr__(self, "probabilities", probs)

    @classmethod
    def uniform(cls, outcomes: Iterable[Hashable], exact: bool = False) -> "Distribution":
        outcomes = list(outcomes)
        p = sympy.Rational(1, len(outcomes)) if exact else 1.0 / len(outcomes)
        return cls({o: p for o in outcomes})

    @property
    def support(self) -> List[Hashable]:
        return list(self.probabilities)

    def __getitem__(self, outcome: Hashable) -> Scalar:
        return self.probabilities.get(outcome, 0)

    def items(self):
        return self.probabilities.items()


@dataclass
class DensityMatrix:
    """Real symmetric PSD matrix of trace 1"""
    entries: np.ndarray
    tolerance: float = field(default=1e-9, repr=False)

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=float)
        m = self.entries
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InstanceError(f"density matrix must be square, got shape {m.shape}")
        if not np.allclose(m, m.T, atol=self.tolerance):
            raise InstanceError("density matrix is not symmetric")
        if abs(np.trace(m) - 1.0) > self.tolerance:
            raise InstanceError(f"density matrix has trace {np.trace(m):.12g}")
        if np.linalg.eigvalsh(m).min() < -self.tolerance:
            raise InstanceError("density matrix is not positive semi-definite")

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def pure(cls, state: NonNegativeState) -> "DensityMatrix":
        vec = state.to_vector()
        return cls(np.outer(vec, vec))

    @classmethod
    def from_vector(cls, vector: Sequence[float]) -> "DensityMatrix":
        vec = np.asarray(vector, dtype=float)
        return cls(np.outer(vec, vec))


# Operations on states

def tensor(a: NonNegativeState, b: NonNegativeState) -> NonNegativeState:
    """a occupies the low qubits, b the high ones"""
    mode = ArithmeticMode.RATIONAL if ArithmeticMode.RATIONAL in (a.mode, b.mode) else ArithmeticMode.FLOAT
    amps = {}
    for ka, va in a.amplitudes.items():
        for kb, vb in b.amplitudes.items():
            amps[ka | (kb << a.width)] = va * vb
    return NonNegativeState(a.width + b.width, amps, mode)


def tensor_all(states: Sequence[NonNegativeState]) -> NonNegativeState:
    if not states:
        raise PreconditionError("tensor of an empty list")
    result = states[0]
    for state in states[1:]:
        result = tensor(result, state)
    return result


def inner_product(a: NonNegativeState, b: NonNegativeState) -> Scalar:
    if a.width != b.width:
        raise InstanceError(f"width mismatch: {a.width} vs {b.width}")
    mode = ArithmeticMode.RATIONAL if ArithmeticMode.RATIONAL in (a.mode, b.mode) else ArithmeticMode.FLOAT
    small, large = (a, b) if len(a.amplitudes) <= len(b.amplitudes) else (b, a)
    terms = [v * large.amplitudes[k] for k, v in small.amplitudes.items() if k in large.amplitudes]
    return total(terms, mode)


def squared_distribution(state: NonNegativeState) -> Distribution:
    return Distribution({key: amp * amp for key, amp in state.amplitudes.items()})


def absolutize(vector: Any, mode: ArithmeticMode = ArithmeticMode.FLOAT, width: Optional[int] = None) -> NonNegativeState:
    """
    Entrywise absolute value of a signed unit vector

    Args:
        vector: Dense sequence of amplitudes, or a mapping index -> amplitude
        mode: Arithmetic backend of the result
        width: Register width, required for the mapping form
    """
    if isinstance(vector, dict):
        if width is None:
            raise PreconditionError("absolutize of a sparse vector needs its width")
        return NonNegativeState(width, {int(k): abs(to_scalar(v, mode)) for k, v in vector.items()}, mode)
    return NonNegativeState.from_vector([abs(to_scalar(v, mode)) for v in vector], mode)


def _aligned(p: Distribution, q: Distribution) -> Tuple[np.ndarray, np.ndarray]:
    outcomes = list(dict.fromkeys(list(p.support) + list(q.support)))
    return (np.array([float(p[o]) for o in outcomes]), np.array([float(q[o]) for o in outcomes]))


def tv(p: Distribution, q: Distribution) -> float:
    a, b = _aligned(p, q)
    return 0.5 * float(np.abs(a - b).sum())


def hellinger2(p: Distribution, q: Distribution) -> float:
    """Squared Hellinger distance 1 - sum sqrt(p q)"""
    a, b = _aligned(p, q)
    return max(0.0, 1.0 - float(np.sqrt(a * b).sum()))


def kl(p: Distribution, q: Distribution) -> float:
    """Relative entropy in bits; +inf when p charges an outcome q does not"""
    a, b = _aligned(p, q)
    mask = a > 0
    if np.any(b[mask] <= 0):
        return math.inf
    return float(np.sum(a[mask] * np.log2(a[mask] / b[mask])))


def entropy(p: Distribution) -> float:
    probs = np.array([float(v) for v in p.probabilities.values()])
    probs = probs[probs > 0]
    return float(-np.sum(probs * np.log2(probs)))


def fidelity_pure_mixed(pure: NonNegativeState, rho: DensityMatrix) -> float:
    vec = pure.to_vector()
    if len(vec) != rho.dimension:
        raise InstanceError(f"dimension mismatch: state {len(vec)} vs density matrix {rho.dimension}")
    return float(vec @ rho.entries @ vec)


def trace_distance_pure(a: NonNegativeState, b: NonNegativeState) -> Scalar:
    overlap = inner_product(a, b)
    mode = ArithmeticMode.RATIONAL if _is_exact(overlap) else ArithmeticMode.FLOAT
    gap = 1 - overlap * overlap
    if mode is ArithmeticMode.FLOAT:
        gap = max(0.0, float(gap))
    return sqrt(gap, mode)


# JSON

def load_state(data: Dict[str, Any], mode: Optional[Any] = None) -> NonNegativeState:
    """
    Parse {"width": n, "amplitudes": {"bits": value}} or {"width": n, "subset": [...]}

    Raises:
        InstanceError: malformed input or non-normalized state
    """
    mode = parse_mode(mode)
    if not isinstance(data, dict) or "width" not in data:
        raise InstanceError("state JSON needs a 'width' field")
    width = int(data["width"])

    def index(bits: Any) -> int:
        if isinstance(bits, int):
            return bits
        if len(bits) != width:
            raise InstanceError(f"basis string {bits!r} does not have width {width}")
        return bits_to_int(bits)

    if "subset" in data:
        state = NonNegativeState.subset(width, [index(b) for b in data["subset"]], mode)
    elif "amplitudes" in data:
        state = NonNegativeState(width, {index(b): v for b, v in data["amplitudes"].items()}, mode)
    else:
        raise InstanceError("state JSON needs 'amplitudes' or 'subset'")
    logger.debug(f"Loaded state: width={width}, support={len(state.amplitudes)}")
    return state
