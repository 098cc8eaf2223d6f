"""
Symmetric Projector
Dyadic symmetric-subspace projector, closeness to tensor powers and the symmetric-to-plain reduction
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
from loguru import logger

from core.arith import ArithmeticMode, Scalar, half, parse_mode, to_scalar, total
from core.builder import CircuitBuilder, Qubit, range_cubes
from core.errors import CapExceededError, InstanceError, PreconditionError
from core.states import NonNegativeState
from core.verifier import StoqVerifier, Thresholds
from protocols.common import (
    Construction,
    DyadicBranchPlan,
    ceil_log2,
    dyadic_weight,
    finish_construction,
    mix,
    permutations,
)

MAX_SYMMETRIC_PROVERS = 8


def permute_key(key: int, perm: Sequence[int], ell: int) -> int:
    """Basis index after moving old block perm[i] into block i"""
    mask = (1 << ell) - 1
    out = 0
    for i, src in enumerate(perm):
        out |= ((key >> (src * ell)) & mask) << (i * ell)
    return out


def permutation_overlap(phi: NonNegativeState, perm: Sequence[int], ell: int,
                        mode: Optional[ArithmeticMode] = None) -> Scalar:
    """<Phi|U_pi|Phi> for a block permutation"""
    mode = phi.mode if mode is None else parse_mode(mode)
    amps = phi.amplitudes
    terms = []
    for key, amp in amps.items():
        image = permute_key(key, perm, ell)
        if image in amps:
            terms.append(amp * amps[image])
    return total(terms, mode)


def _check_blocks(phi: NonNegativeState, k: int, ell: int) -> None:
    if phi.width != k * ell:
        raise InstanceError(f"state width {phi.width} != k*ell = {k * ell}")
    if k > MAX_SYMMETRIC_PROVERS:
        raise CapExceededError(f"{k}! block permutations exceed the k <= {MAX_SYMMETRIC_PROVERS} cap")


def symmetric_overlap(phi: NonNegativeState, k: int, ell: int, mode: Optional[ArithmeticMode] = None) -> Scalar:
    """<Phi|Pi_sym|Phi> = (1/k!) sum over S_k of <Phi|U_pi|Phi>"""
    _check_blocks(phi, k, ell)
    mode = phi.mode if mode is None else parse_mode(mode)
    perms = permutations(k)
    overlap = total((permutation_overlap(phi, p, ell, mode) for p in perms), mode)
    return overlap / to_scalar(len(perms), mode)


def sym_projector_value(phi: NonNegativeState, plan: DyadicBranchPlan, ell: int,
                        mode: Optional[ArithmeticMode] = None) -> Scalar:
    """Acceptance of the dyadic projector: 1/2 + 1/2 sum_t w_t <Phi|U_t|Phi>"""
    _check_blocks(phi, plan.k, ell)
    mode = phi.mode if mode is None else parse_mode(mode)
    terms = [to_scalar(w, mode) * permutation_overlap(phi, p, ell, mode)
             for w, p in zip(plan.weights(), permutations(plan.k))]
    return half(mode) + half(mode) * total(terms, mode)


def emit_sym_projector(builder: CircuitBuilder, blocks: Sequence[Sequence[Qubit]], b: int) -> DyadicBranchPlan:
    """Plus branch register J applies pi_{f(J)} to the blocks"""
    plan = DyadicBranchPlan(len(blocks), b)
    perms = permutations(plan.k)
    branch = builder.pluses(plan.q)
    for perm, (lo, hi) in zip(perms, plan.branch_ranges()):
        if list(perm) == sorted(perm):
            continue
        with builder.flag(range_cubes(branch, lo, hi)) as f:
            with builder.controlled_by(f):
                builder.permute_blocks(blocks, perm)
    return plan


def sym_projector_construction(k: int, ell: int, b: int) -> Construction:
    if k < 1 or ell < 1:
        raise InstanceError(f"symmetric projector needs k >= 1 and ell >= 1, got k={k}, ell={ell}")
    if k > MAX_SYMMETRIC_PROVERS:
        raise CapExceededError(f"k={k} exceeds the k <= {MAX_SYMMETRIC_PROVERS} cap")
    builder = CircuitBuilder(k, ell)
    plan = emit_sym_projector(builder, [builder.witness_block(i) for i in range(k)], b)
    construction = finish_construction(builder, {"k": k, "ell": ell, "plan": plan.to_dict()})
    logger.info(f"[SymProjector] k={k}, ell={ell}, b={b}: q={plan.q}, zeta={plan.zeta}, "
                f"gates={construction.params['gates']}")
    return construction


def build_sym_projector(k: int, ell: int, b: int) -> StoqVerifier:
    """
    Branch-overlap test of the dyadic symmetric projector

    Acceptance is within zeta of 1/2 + 1/2 <Phi|Pi_sym|Phi>; tensor powers
    are accepted with probability 1.
    """
    return sym_projector_construction(k, ell, b).verifier


@dataclass
class ClosenessResult:
    """Closeness of a product state to the symmetric tensor powers"""
    bound: float
    symmetric_overlap: float
    psi: np.ndarray
    trace_distance: float
    iterations: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "bound": self.bound,
            "symmetric_overlap": self.symmetric_overlap,
            "psi": self.psi.tolist(),
            "trace_distance": self.trace_distance,
            "iterations": self.iterations,
        }


def _as_vector(factor: Union[NonNegativeState, Sequence[float], np.ndarray]) -> np.ndarray:
    vec = factor.to_vector() if isinstance(factor, NonNegativeState) else np.asarray(factor, dtype=float)
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise InstanceError("product factor is the zero vector")
    return vec / norm


def symmetric_closeness_bound(factors: Sequence[Union[NonNegativeState, Sequence[float]]],
                              max_iter: int = 500, tolerance: float = 1e-12) -> ClosenessResult:
    """
    Bound 2 sqrt(1 - <Phi|Pi_sym|Phi>) on the distance from Phi = (x)_i phi_i to a tensor power

    The witness psi is found by fixed-point ascent on prod_i <psi|phi_i>,
    starting from the normalized mean of the factors.

    Args:
        factors: One single-block state per prover
        max_iter: Ascent iteration cap
        tolerance: Stop once psi moves less than this
    """
    vecs = [_as_vector(f) for f in factors]
    k = len(vecs)
    if k == 0:
        raise InstanceError("closeness bound needs at least one factor")
    if len({v.size for v in vecs}) != 1:
        raise InstanceError("product factors differ in dimension")
    if k > MAX_SYMMETRIC_PROVERS:
        raise CapExceededError(f"k={k} exceeds the k <= {MAX_SYMMETRIC_PROVERS} cap")

    gram = np.array([[float(a @ b) for b in vecs] for a in vecs])
    perms = permutations(k)
    sym = sum(float(np.prod([gram[i, p[i]] for i in range(k)])) for p in perms) / len(perms)
    sym = min(1.0, max(0.0, sym))
    bound = 2.0 * math.sqrt(1.0 - sym)

    psi = np.sum(vecs, axis=0)
    psi /= np.linalg.norm(psi)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        overlaps = np.array([float(psi @ v) for v in vecs])
        update = np.zeros_like(psi)
        for i, v in enumerate(vecs):
            update += v * np.prod(np.delete(overlaps, i))
        norm = np.linalg.norm(update)
        if norm == 0:
            break
        update /= norm
        moved = float(np.linalg.norm(update - psi))
        psi = update
        if moved < tolerance:
            break

    fidelity = float(np.prod([psi @ v for v in vecs])) ** 2
    distance = math.sqrt(max(0.0, 1.0 - fidelity))
    logger.debug(f"[SymClose] k={k}: sym={sym:.6f}, bound={bound:.6f}, T={distance:.6f} after {iterations} steps")
    return ClosenessResult(bound, sym, psi, distance, iterations)


def sym_to_stoq_construction(v: StoqVerifier, thresholds: Thresholds, b: Optional[int] = None,
                             lambda_bits: int = 8) -> Construction:
    """
    Mix V (weight lambda = Delta/8) with the symmetric projector (weight 1 - lambda)

    Args:
        v: Symmetric verifier on k provers
        thresholds: Completeness and soundness of v
        b: Projector precision; defaults to the least b with 2^b >= 16/Delta^2
        lambda_bits: Minimum dyadic bits for lambda
    """
    delta = thresholds.delta
    if b is None:
        b = ceil_log2(math.ceil(16 / (delta * delta)))
    if b < 0:
        raise PreconditionError(f"projector precision b={b} is negative")
    weight = dyadic_weight(delta / 8, lambda_bits)
    builder = CircuitBuilder(v.k, v.ell)
    blocks = [builder.witness_block(i) for i in range(v.k)]
    plans: List[DyadicBranchPlan] = []

    def run_v():
        builder.append_gamma(v, blocks, builder.zeros(v.layout.n0), builder.pluses(v.layout.nplus))

    def run_projector():
        plans.append(emit_sym_projector(builder, blocks, b))

    mix(builder, weight, run_v, run_projector)
    c_prime = 1 - weight.value * (1 - thresholds.c)
    params = {
        "k": v.k, "ell": v.ell, "b": b, "lambda": weight.to_dict(), "plan": plans[0].to_dict(),
        "completeness": str(c_prime), "soundness_margin": str(delta * delta / 16),
    }
    construction = finish_construction(builder, params)
    logger.info(f"[SymToStoq] k={v.k}, lambda={weight.value}, b={b}: c'={c_prime}, "
                f"width={construction.params['width']}")
    return construction


def build_sym_to_stoq(v: StoqVerifier, thresholds: Thresholds, b: Optional[int] = None,
                      lambda_bits: int = 8) -> StoqVerifier:
    return sym_to_stoq_construction(v, thresholds, b, lambda_bits).verifier
