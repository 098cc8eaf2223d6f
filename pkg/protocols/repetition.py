"""
Parallel Repetition
Weak and strong conjunctions of verifiers, repetition counts and amplified thresholds
"""

import math
from fractions import Fraction
from typing import Any, List, Sequence, Tuple

from loguru import logger

from core.builder import CircuitBuilder, Qubit
from core.errors import InstanceError, PreconditionError
from core.verifier import StoqVerifier
from protocols.common import Construction, finish_construction


def _common_ell(verifiers: Sequence[StoqVerifier]) -> Tuple[int, int]:
    if not verifiers:
        raise InstanceError("conjunction of an empty verifier list")
    ells = {v.ell for v in verifiers}
    if len(ells) != 1:
        raise InstanceError(f"conjoined verifiers need a common block size, got {sorted(ells)}")
    return sum(v.k for v in verifiers), ells.pop()


def _blocks(builder: CircuitBuilder, verifiers: Sequence[StoqVerifier]) -> List[List[List[Qubit]]]:
    """Consecutive witness blocks handed to each verifier in turn"""
    out, offset = [], 0
    for v in verifiers:
        out.append([builder.witness_block(offset + i) for i in range(v.k)])
        offset += v.k
    return out


def weak_conjunction_construction(verifiers: Sequence[StoqVerifier]) -> Construction:
    """
    Run every V_j, then SWAP-test the outputs against fresh plus qubits

    Gamma = V^dagger SWAP(O, P) V, so product witnesses are accepted with
    probability 1/2 + 1/2 prod_j p_j.
    """
    k, ell = _common_ell(verifiers)
    builder = CircuitBuilder(k, ell)
    runs = []
    for v, blocks in zip(verifiers, _blocks(builder, verifiers)):
        mapping = builder.embed_mapping(v, blocks, builder.zeros(v.layout.n0), builder.pluses(v.layout.nplus))
        runs.append((v, mapping))
    for v, mapping in runs:
        builder.append(v.circuit, mapping)
    for v, mapping in runs:
        builder.swap(mapping[v.layout.output], builder.pluses(1)[0])
    for v, mapping in reversed(runs):
        builder.append(v.circuit.inverse(), mapping)
    construction = finish_construction(builder, {"copies": len(verifiers), "k": k, "ell": ell})
    logger.info(f"[WeakConj] {len(verifiers)} verifiers, k={k}: width={construction.params['width']}")
    return construction


def build_weak_conjunction(verifiers: Sequence[StoqVerifier]) -> StoqVerifier:
    return weak_conjunction_construction(verifiers).verifier


def strong_conjunction_construction(verifiers: Sequence[StoqVerifier]) -> Construction:
    """Gamma_1 ... Gamma_r under one plus control: acceptance 1/2 + 1/2 prod_j (2 p_j - 1)"""
    k, ell = _common_ell(verifiers)
    builder = CircuitBuilder(k, ell)
    for v, blocks in zip(verifiers, _blocks(builder, verifiers)):
        builder.append_gamma(v, blocks, builder.zeros(v.layout.n0), builder.pluses(v.layout.nplus))
    construction = finish_construction(builder, {"copies": len(verifiers), "k": k, "ell": ell})
    logger.info(f"[StrongConj] {len(verifiers)} verifiers, k={k}: width={construction.params['width']}")
    return construction


def build_strong_conjunction(verifiers: Sequence[StoqVerifier]) -> StoqVerifier:
    return strong_conjunction_construction(verifiers).verifier


def repetition_count(n: int, b: Any) -> int:
    """Copies r = ceil(n / log2(2 / (1 + b))) pushing (1/2 + b/2)^r below 2^-n"""
    b = Fraction(b)
    if not 0 <= b < 1:
        raise PreconditionError(f"repetition count needs 0 <= b < 1, got {b}")
    if n < 0:
        raise InstanceError(f"negative target exponent {n}")
    if n == 0:
        return 0
    return math.ceil(n / math.log2(2 / (1 + b)))


def weak_repetition_thresholds(a: Any, b: Any, r: int) -> Tuple[Fraction, Fraction]:
    """(c', s') = (1/2 + 1/2 (1/2 + a/2)^r, 1/2 + 1/2 (1/2 + b/2)^r)"""
    a, b = Fraction(a), Fraction(b)
    if r < 1:
        raise InstanceError(f"repetition needs r >= 1, got {r}")
    half = Fraction(1, 2)
    return half + half * (half + a / 2) ** r, half + half * (half + b / 2) ** r


def error_reduction_gap(a: Any, b: Any, r: int) -> Fraction:
    """delta' = 2^-r (1 + a)^r - 2^-r (1 + b)^r"""
    a, b = Fraction(a), Fraction(b)
    return ((1 + a) ** r - (1 + b) ** r) / 2 ** r
