"""
Branch-Local Protocol
K unentangled (vertex, label) registers checked by a collision test plus pairwise consistency
"""

import itertools
import math
from typing import Any, Callable, Optional, Sequence

import numpy as np
from loguru import logger

from core.arith import to_scalar, total
from core.builder import CircuitBuilder, value_cubes
from core.errors import CapExceededError, InstanceError
from core.verifier import StoqVerifier
from npcert.instance import BranchDistribution, GapCGInstance, Pair, decode, register_widths
from npcert.predicates import DEFAULT_UNIFORMITY_DELTA, branch_predicate
from npcert.sampling import Estimate, run_trials
from protocols.common import Construction, finish_construction

BranchPredicate = Callable[[Sequence[Pair]], bool]

EXACT_BRANCH_CAP = 10 ** 6
TABLE_BITS_CAP = 14


def default_prover_count(n: int, constant: float = 19.0) -> int:
    """K = ceil(C sqrt(n))"""
    return max(1, math.ceil(constant * math.sqrt(n)))


def _predicate(instance: GapCGInstance, delta: Any, predicate: Optional[BranchPredicate]) -> BranchPredicate:
    if predicate is not None:
        return predicate
    return lambda branch: branch_predicate(branch, instance, delta)


def protocol4_construction(instance: GapCGInstance, k: int, delta: Any = DEFAULT_UNIFORMITY_DELTA,
                           predicate: Optional[BranchPredicate] = None) -> Construction:
    """
    Rejection flag written over every branch of K registers, wrapped against the identity

    Codes outside V x Sigma reject. Accepted branches leave the flag at 0,
    so the stoquastic acceptance is 1/2 + 1/2 Pr[branch accepted].
    """
    if k < 1:
        raise InstanceError(f"need at least one prover, got K={k}")
    accept = _predicate(instance, delta, predicate)
    vertex_bits, label_bits = register_widths(instance)
    ell = vertex_bits + label_bits
    if k * ell > TABLE_BITS_CAP:
        raise CapExceededError(f"{k} registers of {ell} qubits exceed the {TABLE_BITS_CAP}-qubit branch table; "
                               f"use the analysis mode")
    builder = CircuitBuilder(k, ell)
    register = [q for i in range(k) for q in builder.witness_block(i)]
    flag = builder.zeros(1)[0]
    rejecting = []
    for codes in itertools.product(range(1 << ell), repeat=k):
        branch = [decode(instance, c) for c in codes]
        if any(b is None for b in branch) or not accept(branch):
            rejecting.append(sum(c << (i * ell) for i, c in enumerate(codes)))
    builder.mark(value_cubes(register, rejecting), flag)
    construction = finish_construction(builder, {"protocol": 4, "K": k, "ell": ell, "delta": str(delta),
                                                 "rejecting_branches": len(rejecting)})
    logger.info(f"[Protocol4] {instance.name}: K={k}, ell={ell}, {len(rejecting)}/{1 << (k * ell)} rejecting "
                f"branches, width={construction.params['width']}")
    return construction


def build_protocol4_verifier(instance: GapCGInstance, k: int, delta: Any = DEFAULT_UNIFORMITY_DELTA,
                             predicate: Optional[BranchPredicate] = None) -> StoqVerifier:
    return protocol4_construction(instance, k, delta, predicate).verifier


def protocol4_exact(instance: GapCGInstance, dist: BranchDistribution, k: int, delta: Any = DEFAULT_UNIFORMITY_DELTA,
                    predicate: Optional[BranchPredicate] = None):
    """Pr_{x ~ p^K}[branch accepted] by enumeration over the support"""
    accept = _predicate(instance, delta, predicate)
    support = list(dist.p.items())
    terms = []
    for branch in itertools.product(support, repeat=k):
        if accept([pair for pair, _ in branch]):
            weight = to_scalar(1, dist.mode)
            for _, w in branch:
                weight = weight * w
            terms.append(weight)
    return total(terms, dist.mode) if terms else to_scalar(0, dist.mode)


def protocol4_acceptance(instance: GapCGInstance, dist: BranchDistribution, k: int,
                         delta: Any = DEFAULT_UNIFORMITY_DELTA, trials: int = 10_000, seed: int = 0,
                         workers: int = 1, exact_cap: int = EXACT_BRANCH_CAP,
                         predicate: Optional[BranchPredicate] = None) -> Estimate:
    """
    Branch acceptance probability, exact when |V x Sigma|^K is within exact_cap

    Args:
        instance: Constraint graph
        dist: Distribution p of one (vertex, label) sample
        k: Number of registers K
        delta: Uniformity distance
        trials: Monte Carlo trials when not exact
        seed: Master seed
        workers: Thread count for the Monte Carlo
        exact_cap: Largest branch count enumerated exactly
    """
    if len(instance.pairs()) ** k <= exact_cap:
        value = protocol4_exact(instance, dist, k, delta, predicate)
        logger.info(f"[Protocol4] exact acceptance {value} (K={k})")
        return Estimate(float(value), float(value), float(value), 0, exact=True, exact_value=value)

    accept = _predicate(instance, delta, predicate)
    pairs = list(dist.p)
    probs = np.array([float(w) for w in dist.p.values()])
    probs /= probs.sum()

    def batch(rng: np.random.Generator, count: int) -> int:
        draws = rng.choice(len(pairs), size=(count, k), p=probs)
        return sum(1 for row in draws if accept([pairs[i] for i in row]))

    estimate = run_trials(batch, trials, seed, workers)
    logger.info(f"[Protocol4] Monte Carlo acceptance {estimate.value:.4f} "
                f"[{estimate.ci_low:.4f}, {estimate.ci_high:.4f}] (K={k}, trials={trials})")
    return estimate


def stoquastic_acceptance(branch_acceptance: Any) -> Any:
    """1/2 + 1/2 Pr[accept] for a rejection flag that starts at 0"""
    return (1 + branch_acceptance) / 2
