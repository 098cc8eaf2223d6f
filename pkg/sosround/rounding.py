"""
BKS Rounding
Marginals, joint laws, Hellinger diagnostics, entropy decrement and the combining loop
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

from core.errors import CapExceededError, ConvergenceError, PreconditionError
from core.sepval import PartitionedMatrix
from core.states import Distribution
from sosround.oracle import MomentOracle, condition, expected_value, tensor_value

JOINT_LAW_CAP = 10 ** 6


def _order(oracle: MomentOracle, t: Optional[int]) -> int:
    t = oracle.t if t is None else t
    if t < 1:
        raise PreconditionError(f"joint law needs t >= 1, got {t}")
    if oracle.d ** t > JOINT_LAW_CAP:
        raise CapExceededError(f"joint law over d^t = {oracle.d}^{t} outcomes exceeds {JOINT_LAW_CAP}")
    return t


def marginal_array(oracle: MomentOracle) -> np.ndarray:
    return oracle.weights @ oracle.squares()


def marginal(oracle: MomentOracle) -> Distribution:
    """Pr[A = i] = E~[x_i^2]"""
    return Distribution({i: float(p) for i, p in enumerate(marginal_array(oracle))})


def _component_law(square: np.ndarray, t: int) -> np.ndarray:
    law = square
    for _ in range(t - 1):
        law = np.multiply.outer(law, square)
    return law


def joint_array(oracle: MomentOracle, t: Optional[int] = None, workers: int = 1) -> np.ndarray:
    """
    Pr[(A_1..A_t) = alpha] = sum_m w_m prod_r v_m[i_r]^2 as a d^t array

    Components are summed in parallel when workers > 1; the result is
    renormalized to total mass 1.
    """
    t = _order(oracle, t)
    squares = oracle.squares()

    def weighted(m: int) -> np.ndarray:
        return oracle.weights[m] * _component_law(squares[m], t)

    if workers > 1 and oracle.components > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(weighted, range(oracle.components)))
    else:
        parts = [weighted(m) for m in range(oracle.components)]
    law = np.sum(parts, axis=0)
    return law / law.sum()


def joint_law(oracle: MomentOracle, t: Optional[int] = None, workers: int = 1) -> Distribution:
    law = joint_array(oracle, t, workers)
    return Distribution({tuple(int(i) for i in idx): float(p) for idx, p in np.ndenumerate(law) if p > 0})


def direct_round(oracle: MomentOracle) -> np.ndarray:
    """x*_i = sqrt(E~[x_i^2])"""
    x = np.sqrt(marginal_array(oracle))
    return x / np.linalg.norm(x)


def product_array(p: np.ndarray, t: int) -> np.ndarray:
    return _component_law(p, t)


def _hellinger(p: np.ndarray, q: np.ndarray) -> float:
    return math.sqrt(max(0.0, 1.0 - float(np.sqrt(p * q).sum())))


def hellinger_joint_product(oracle: MomentOracle, t: Optional[int] = None, workers: int = 1) -> float:
    """Hellinger distance between the joint law and the product of its marginals"""
    t = _order(oracle, t)
    joint = joint_array(oracle, t, workers)
    return _hellinger(joint, product_array(marginal_array(oracle), t))


def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def chain_rule_terms(joint: np.ndarray) -> Dict[str, Any]:
    """
    KL(joint || product of marginals) and the terms I(A_j; A_1..A_{j-1})

    Entropies are in bits; the terms sum to the KL divergence.
    """
    joint = np.asarray(joint, dtype=float)
    t = joint.ndim
    marginals = [joint.sum(axis=tuple(a for a in range(t) if a != j)) for j in range(t)]
    product = marginals[0]
    for m in marginals[1:]:
        product = np.multiply.outer(product, m)
    mask = joint > 0
    kl = float(np.sum(joint[mask] * np.log2(joint[mask] / product[mask])))
    prefix = [_entropy(joint.sum(axis=tuple(range(j, t))).reshape(-1)) if j < t else _entropy(joint.reshape(-1))
              for j in range(t + 1)]
    infos = [_entropy(marginals[j]) + prefix[j] - prefix[j + 1] for j in range(t)]
    return {"kl": kl, "mutual_informations": infos, "total": float(sum(infos))}


@dataclass
class DecrementReport:
    epsilon: float
    t: int
    hellinger: float
    entropy: float
    conditional_entropy: float
    required: float
    holds: bool
    pin: Tuple[int, ...]
    pinned_entropy: float

    @property
    def decrement(self) -> float:
        return self.entropy - self.conditional_entropy

    def to_dict(self) -> Dict[str, Any]:
        return {"epsilon": self.epsilon, "t": self.t, "hellinger": self.hellinger, "entropy": self.entropy,
                "conditional_entropy": self.conditional_entropy, "decrement": self.decrement,
                "required": self.required, "holds": self.holds, "pin": list(self.pin),
                "pinned_entropy": self.pinned_entropy}


def entropy_decrement_check(oracle: MomentOracle, t: Optional[int], epsilon: float, workers: int = 1) -> DecrementReport:
    """
    Check H(A_t | A_1..A_{t-1}) <= H(A) - 2 eps^2 / t when the Hellinger premise holds

    Also finds the lexicographically least pinning tuple of positive mass
    whose conditioned marginal has entropy at most H(A) - 2 eps^2 / t.
    """
    t = _order(oracle, t)
    if t < 2:
        raise PreconditionError("entropy decrement needs t >= 2")
    joint = joint_array(oracle, t, workers)
    p = marginal_array(oracle)
    h = _hellinger(joint, product_array(p, t))
    if h <= epsilon:
        raise PreconditionError(f"Hellinger distance {h:.6g} does not exceed epsilon={epsilon}")
    entropy = _entropy(p)
    conditional = _entropy(joint.reshape(-1)) - _entropy(joint.sum(axis=t - 1).reshape(-1))
    required = 2 * epsilon * epsilon / t
    target = entropy - required

    rows = joint.reshape(-1, oracle.d)
    pin, pinned_entropy = None, math.inf
    for flat, row in enumerate(rows):
        mass = row.sum()
        if mass <= 0:
            continue
        value = _entropy(row / mass)
        if value <= target + 1e-12:
            pin = tuple(int(i) for i in np.unravel_index(flat, (oracle.d,) * (t - 1)))
            pinned_entropy = value
            break
    if pin is None:
        raise ConvergenceError("no pinning tuple achieves the entropy decrement")
    report = DecrementReport(epsilon, t, h, entropy, conditional, required, conditional <= target + 1e-12,
                             pin, pinned_entropy)
    logger.debug(f"[SOS] decrement {report.decrement:.4f} >= {required:.4f}: {report.holds}, pin {pin}")
    return report


@dataclass
class RoundingDiagnostics:
    joint: np.ndarray
    marginal: np.ndarray
    hellinger: float
    entropy: float
    pins: List[Tuple[int, ...]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {"marginal": self.marginal.tolist(), "hellinger": self.hellinger, "entropy": self.entropy,
                "pins": [list(p) for p in self.pins]}


def diagnostics(oracle: MomentOracle, t: Optional[int] = None, pins: Optional[List[Tuple[int, ...]]] = None,
                workers: int = 1) -> RoundingDiagnostics:
    t = _order(oracle, t)
    joint = joint_array(oracle, t, workers)
    p = marginal_array(oracle)
    return RoundingDiagnostics(joint, p, _hellinger(joint, product_array(p, t)), _entropy(p), list(pins or []))


@dataclass
class RoundingResult:
    """Rounded vector with the per-round trace of the combining loop"""
    x: np.ndarray
    value: float
    expected: float
    epsilon: float
    delta: float
    max_rounds: int
    scale: float
    trace: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def rounds(self) -> int:
        return len(self.trace) - 1

    @property
    def guarantee_holds(self) -> bool:
        return self.value >= self.expected - self.epsilon * self.scale - 1e-12

    def to_dict(self) -> Dict[str, Any]:
        return {"x": self.x.tolist(), "value": self.value, "expected": self.expected, "epsilon": self.epsilon,
                "delta": self.delta, "max_rounds": self.max_rounds, "rounds": self.rounds, "scale": self.scale,
                "guarantee_holds": self.guarantee_holds, "trace": self.trace}


def max_rounds(d: int, t: int, delta: float) -> int:
    """R = ceil(t log2 d / (2 delta^2)) + 1"""
    return math.ceil(t * math.log2(d) / (2 * delta * delta)) + 1


def bks_round_loop(m: PartitionedMatrix, oracle: MomentOracle, epsilon: float, workers: int = 1) -> RoundingResult:
    """
    Condition until the joint law is delta-close to product, then round directly

    M is scaled to operator norm at most 1 on entry; reported values are on
    the original scale. delta = epsilon / (2 sqrt 2).

    Args:
        m: Entrywise non-negative symmetric matrix on (R^d)^{(x) t}
        oracle: Mixture oracle of order t
        epsilon: Target additive error
    """
    if not m.nonnegative:
        raise PreconditionError("BKS rounding needs an entrywise non-negative matrix")
    if epsilon <= 0:
        raise PreconditionError(f"epsilon must be positive, got {epsilon}")
    t = _order(oracle, None)
    if m.k != t or m.dims[0] != oracle.d:
        raise PreconditionError(f"matrix dims {m.dims} do not match d={oracle.d}, t={t}")
    scale = max(1.0, m.norm())
    delta = epsilon / (2 * math.sqrt(2))
    limit = max_rounds(oracle.d, t, delta)
    pins: List[Tuple[int, ...]] = []
    trace = []

    current = oracle
    for stage in range(limit + 1):
        diag = diagnostics(current, t, pins, workers)
        trace.append({"round": stage, "pin": list(pins[-1]) if pins else None,
                      "hellinger": diag.hellinger, "entropy": diag.entropy, "components": current.components})
        if diag.hellinger <= delta:
            break
        if stage == limit:
            raise ConvergenceError(f"combining loop exceeded R={limit} rounds")
        report = entropy_decrement_check(current, t, delta, workers)
        pins.append(report.pin)
        current = condition(current, report.pin)

    x = direct_round(current)
    result = RoundingResult(x, tensor_value(m, x), expected_value(m, current), epsilon, delta, limit, scale, trace)
    logger.info(f"[SOS] d={oracle.d}, t={t}: {result.rounds} conditioning rounds (R={limit}), "
                f"M(x*)={result.value:.6g}, E~[M]={result.expected:.6g}")
    return result
