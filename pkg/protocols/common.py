"""
Protocol Building Blocks
Dyadic weights, the balanced branch map, permutation orderings and convex mixing of Gamma maps
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Sequence, Tuple

from loguru import logger

from core.arith import Scalar, half, parse_mode
from core.builder import CircuitBuilder, overlap_verifier, range_cubes
from core.errors import InstanceError, PreconditionError
from core.revsim import ReversibleCircuit
from core.states import NonNegativeState
from core.sepval import HsepResult, PartitionedMatrix, hsep
from core.verifier import StoqVerifier, VerifierLayout, gamma_overlap, overlap_matrix


@dataclass(frozen=True)
class DyadicWeight:
    """numerator / 2^bits, rounded down from a requested target"""
    numerator: int
    bits: int
    target: Fraction

    @property
    def value(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.bits)

    @property
    def truncation(self) -> Fraction:
        return self.target - self.value

    def to_dict(self) -> Dict[str, Any]:
        return {"value": str(self.value), "bits": self.bits, "target": str(self.target),
                "truncation": float(self.truncation)}


def dyadic_floor(target: Any, bits: int) -> DyadicWeight:
    """
    Largest dyadic with at most `bits` bits not above target, in lowest terms

    Raises:
        PreconditionError: target outside [0, 1] or rounding to zero
    """
    target = Fraction(target).limit_denominator(1 << 60) if not isinstance(target, Fraction) else target
    if not 0 <= target <= 1:
        raise PreconditionError(f"dyadic weight {target} outside [0, 1]")
    numerator = math.floor(target * (1 << bits))
    if numerator == 0 and target > 0:
        raise PreconditionError(f"weight {target} vanishes at {bits} dyadic bits")
    while bits > 0 and numerator % 2 == 0:
        numerator //= 2
        bits -= 1
    weight = DyadicWeight(numerator, bits, target)
    if weight.truncation > 0:
        logger.warning(f"[Dyadic] {target} truncated to {weight.value} (slack {float(weight.truncation):.3e})")
    return weight


def dyadic_weight(target: Any, min_bits: int) -> DyadicWeight:
    """dyadic_floor with enough bits that a positive target never vanishes"""
    target = Fraction(target).limit_denominator(1 << 60) if not isinstance(target, Fraction) else target
    bits = min_bits
    if target > 0:
        bits = max(bits, ceil_log2(math.ceil(1 / target)))
    return dyadic_floor(target, bits)


@dataclass(frozen=True)
class DyadicBranchPlan:
    """
    Maps 2^q plus-register branches onto the K = k! permutations as evenly as possible
    """
    k: int
    b: int

    def __post_init__(self):
        if self.k < 1 or self.b < 0:
            raise PreconditionError(f"invalid dyadic plan k={self.k}, b={self.b}")

    @property
    def K(self) -> int:
        return math.factorial(self.k)

    @property
    def q(self) -> int:
        return (self.K - 1).bit_length() + self.b

    @property
    def N(self) -> int:
        return 1 << self.q

    @property
    def a(self) -> int:
        return self.N // self.K

    @property
    def r(self) -> int:
        return self.N % self.K

    @property
    def zeta(self) -> Fraction:
        return Fraction(self.r * (self.K - self.r), self.K * self.N)

    def branch_ranges(self) -> List[Tuple[int, int]]:
        """[lo, hi) of branch indices mapped to each permutation, in permutation order"""
        ranges, lo = [], 0
        for t in range(self.K):
            size = self.a + 1 if t < self.r else self.a
            ranges.append((lo, lo + size))
            lo += size
        return ranges

    def weights(self) -> List[Fraction]:
        return [Fraction(hi - lo, self.N) for lo, hi in self.branch_ranges()]

    def to_dict(self) -> Dict[str, Any]:
        return {"k": self.k, "K": self.K, "b": self.b, "q": self.q, "N": self.N, "a": self.a, "r": self.r,
                "zeta": str(self.zeta)}


def balanced_map(j: int, K: int, N: int) -> int:
    """Permutation index of dyadic branch j; the first N mod K permutations get one extra branch"""
    if K < 1 or N < K:
        raise PreconditionError(f"balanced map needs 1 <= K <= N, got K={K}, N={N}")
    if not 0 <= j < N:
        raise InstanceError(f"branch {j} outside [0, {N})")
    a, r = divmod(N, K)
    if j < r * (a + 1):
        return j // (a + 1)
    return r + (j - r * (a + 1)) // a


def permutations(k: int) -> List[Tuple[int, ...]]:
    """S_k in lexicographic order; pi[i] names the block moved into position i"""
    return list(itertools.permutations(range(k)))


def mix(builder: CircuitBuilder, weight: DyadicWeight,
        first: Callable[[], None], second: Callable[[], None]) -> None:
    """
    Convex combination of two Gamma maps on fresh plus qubits

    `first` runs on a weight.value fraction of the selector branches and
    `second` on the rest; both emit into `builder`.
    """
    selector = builder.pluses(weight.bits)
    size = 1 << weight.bits
    for lo, hi, emit in ((0, weight.numerator, first), (weight.numerator, size, second)):
        if lo == hi:
            continue
        with builder.flag(range_cubes(selector, lo, hi)) as f:
            with builder.controlled_by(f):
                emit()


def ceil_log2(value: int) -> int:
    return max(0, (int(value) - 1).bit_length())


def block_split(qubits: Sequence[Any], size: int) -> List[List[Any]]:
    return [list(qubits[i:i + size]) for i in range(0, len(qubits), size)]


@dataclass
class Construction:
    """
    A constructed verifier with its Gamma map

    Acceptance on a witness is 1/2 + 1/2 <Psi|Gamma|Psi>, which equals the
    acceptance of `verifier`; the Gamma route skips the overlap wrapper.
    """
    verifier: StoqVerifier
    gamma: ReversibleCircuit
    gamma_layout: VerifierLayout
    params: Dict[str, Any]

    def acceptance(self, witness: NonNegativeState, mode: Any = None) -> Scalar:
        mode = witness.mode if mode is None else parse_mode(mode)
        return half(mode) + half(mode) * gamma_overlap(self.gamma, self.gamma_layout, witness, mode)

    def matrix(self) -> PartitionedMatrix:
        return overlap_matrix(self.gamma, self.gamma_layout)

    def to_dict(self) -> Dict[str, Any]:
        return {"verifier": self.verifier.to_dict(), "params": self.params}


def finish_construction(builder: CircuitBuilder, params: Dict[str, Any]) -> Construction:
    gamma, layout = builder.finish()
    verifier = overlap_verifier(gamma, layout)
    params = dict(params, width=verifier.layout.width, gates=len(verifier.circuit))
    return Construction(verifier, gamma, layout, params)


def product_soundness(construction: Construction, seed: int = 0, grid: int = 64, lattice: int = 40,
                      restarts: int = 20) -> Tuple[float, HsepResult]:
    """
    Largest acceptance found over product witnesses, with the hsep certificate

    Runs only at toy sizes where the induced witness matrix fits in memory.
    """
    matrix = construction.matrix()
    best = hsep(matrix, seed=seed, grid=grid, lattice=lattice, restarts=restarts)
    logger.debug(f"[Soundness] product max overlap {best.value:.6f} ({best.method})")
    return 0.5 + 0.5 * best.value, best
