"""
Length-Efficient Symmetrization
Label bundles, matching-based routing into V and the biased dummy branch
"""

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from loguru import logger

from core.arith import ArithmeticMode, Scalar, as_fraction, half, parse_mode, sqrt, to_scalar, total
from core.builder import CircuitBuilder, range_cubes, value_cubes
from core.errors import CapExceededError, InstanceError, PreconditionError
from core.revsim import relabel
from core.states import NonNegativeState, tensor_all
from core.verifier import StoqVerifier, Thresholds, VerifierLayout, gamma_form, gamma_overlap
from protocols.common import Construction, ceil_log2, finish_construction
from protocols.matching import first_matching, matching_probability

LABEL_TABLE_BITS_CAP = 12

# (sigma, slots): role a is served by copy sigma[a] from slot slots[a]
Route = Tuple[Tuple[int, ...], Tuple[int, ...]]


@dataclass(frozen=True)
class SymmetrizationPlan:
    """
    Register plan of the symmetrized verifier

    Each of the k copies holds `bundles` slots; a slot is a label of
    label_bits qubits followed by ell data qubits.
    """
    k: int
    ell: int
    bundles: int
    dummy_acceptance: Fraction
    dummy_bits: int = 8

    def __post_init__(self):
        if self.k < 1 or self.ell < 1 or self.bundles < 1:
            raise PreconditionError(f"invalid symmetrization plan k={self.k}, ell={self.ell}, r={self.bundles}")
        object.__setattr__(self, "dummy_acceptance", Fraction(self.dummy_acceptance).limit_denominator(1 << 40))
        if self.dummy_acceptance < Fraction(1, 2) or self.dummy_acceptance > 1:
            raise PreconditionError(f"dummy acceptance {self.dummy_acceptance} outside [1/2, 1]")

    @classmethod
    def default(cls, k: int, ell: int, thresholds: Thresholds, bundles: Optional[int] = None,
                dummy_bits: int = 8) -> "SymmetrizationPlan":
        if bundles is None:
            bundles = max(1, math.ceil(12 * math.log(k)))
        return cls(k, ell, bundles, thresholds.c - thresholds.delta, dummy_bits)

    @property
    def label_bits(self) -> int:
        return ceil_log2(self.k)

    @property
    def slot_width(self) -> int:
        return self.label_bits + self.ell

    @property
    def copy_width(self) -> int:
        return self.bundles * self.slot_width

    @property
    def table_bits(self) -> int:
        return self.k * self.bundles * self.label_bits

    def label_positions(self, copy: int, slot: int) -> List[int]:
        start = slot * self.slot_width
        return [copy * self.copy_width + start + b for b in range(self.label_bits)]

    def data_positions(self, copy: int, slot: int) -> List[int]:
        start = slot * self.slot_width + self.label_bits
        return [copy * self.copy_width + start + b for b in range(self.ell)]

    @property
    def dummy_count(self) -> int:
        """Plus branches T out of 2^p on which the dummy flips its zero ancilla"""
        return math.ceil((1 << (self.dummy_bits + 1)) * (1 - self.dummy_acceptance))

    @property
    def realized_dummy(self) -> Fraction:
        return 1 - Fraction(self.dummy_count, 1 << (self.dummy_bits + 1))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k, "ell": self.ell, "bundles": self.bundles, "label_bits": self.label_bits,
            "copy_width": self.copy_width, "dummy_acceptance": str(self.dummy_acceptance),
            "realized_dummy": str(self.realized_dummy), "dummy_bits": self.dummy_bits,
        }


def _labels(plan: SymmetrizationPlan, table: int) -> List[List[int]]:
    mask = (1 << plan.label_bits) - 1
    return [[(table >> ((i * plan.bundles + h) * plan.label_bits)) & mask for h in range(plan.bundles)]
            for i in range(plan.k)]


def route(plan: SymmetrizationPlan, table: int) -> Optional[Route]:
    """Routing of a label table, or None when its graph has no perfect matching"""
    labels = _labels(plan, table)
    edges = [{a for a in row if a < plan.k} for row in labels]
    sigma = first_matching(edges, plan.k)
    if sigma is None:
        return None
    slots = tuple(labels[sigma[a]].index(a) for a in range(plan.k))
    return sigma, slots


def routing_groups(plan: SymmetrizationPlan) -> Dict[Optional[Route], List[int]]:
    """All label tables grouped by their routing"""
    if plan.table_bits > LABEL_TABLE_BITS_CAP:
        raise CapExceededError(f"{plan.table_bits} label qubits exceed the {LABEL_TABLE_BITS_CAP}-qubit table cap")
    groups: Dict[Optional[Route], List[int]] = defaultdict(list)
    for table in range(1 << plan.table_bits):
        groups[route(plan, table)].append(table)
    return groups


def _dummy_overlap(plan: SymmetrizationPlan) -> Fraction:
    return 2 * plan.realized_dummy - 1


def symmetrization_construction(v: StoqVerifier, thresholds: Thresholds, bundles: Optional[int] = None,
                                dummy_bits: int = 8) -> Construction:
    """
    Symmetric verifier on k copies of bundles*(ell + label bits) qubits

    Each label table either routes one slot per role into V along the
    lexicographically first perfect matching, or runs the dummy branch.
    """
    plan = SymmetrizationPlan.default(v.k, v.ell, thresholds, bundles, dummy_bits)
    if plan.realized_dummy < plan.dummy_acceptance:
        logger.warning(f"[Symmetrize] dummy acceptance {plan.dummy_acceptance} truncated to "
                       f"{plan.realized_dummy} (slack {float(plan.dummy_acceptance - plan.realized_dummy):.3e})")
    groups = routing_groups(plan)
    builder = CircuitBuilder(v.k, plan.copy_width)
    label_register = [builder.witness(i, p % plan.copy_width)
                      for i in range(v.k) for h in range(plan.bundles) for p in plan.label_positions(i, h)]
    v_zeros, v_pluses = builder.zeros(v.layout.n0), builder.pluses(v.layout.nplus)

    for key in sorted(k for k in groups if k is not None):
        sigma, slots = key
        blocks = [[builder.witness(sigma[a], p % plan.copy_width) for p in plan.data_positions(sigma[a], slots[a])]
                  for a in range(v.k)]
        with builder.flag(value_cubes(label_register, groups[key])) as f:
            with builder.controlled_by(f):
                builder.append_gamma(v, blocks, v_zeros, v_pluses)

    if None in groups:
        bias = builder.pluses(plan.dummy_bits)
        target = builder.zeros(1)[0]
        with builder.flag(value_cubes(label_register, groups[None])) as f:
            with builder.controlled_by(f):
                builder.mark(range_cubes(bias, 0, plan.dummy_count), target)

    params = {
        "plan": plan.to_dict(), "routes": len(groups) - (1 if None in groups else 0),
        "unmatched_tables": len(groups.get(None, [])), "tables": 1 << plan.table_bits,
    }
    construction = finish_construction(builder, params)
    logger.info(f"[Symmetrize] k={v.k}, r={plan.bundles}: {params['routes']} routes, "
                f"{params['unmatched_tables']}/{params['tables']} dummy tables, width={construction.params['width']}")
    return construction


def build_length_efficient_symmetrization(v: StoqVerifier, thresholds: Thresholds, bundles: Optional[int] = None,
                                          dummy_bits: int = 8) -> StoqVerifier:
    return symmetrization_construction(v, thresholds, bundles, dummy_bits).verifier


def honest_symmetric_witness(plan: SymmetrizationPlan, factors: Sequence[NonNegativeState],
                             mode: Optional[ArithmeticMode] = None) -> NonNegativeState:
    """(1/sqrt(k) sum_j |j>|psi_j>)^{(x) r} on every copy"""
    if len(factors) != plan.k or any(f.width != plan.ell for f in factors):
        raise InstanceError(f"honest witness needs {plan.k} factors of width {plan.ell}")
    mode = factors[0].mode if mode is None else parse_mode(mode)
    scale = sqrt(to_scalar(Fraction(1, plan.k), mode), mode)
    amps = {}
    for j, factor in enumerate(factors):
        for key, amp in factor.as_mode(mode).amplitudes.items():
            amps[j | (key << plan.label_bits)] = amp * scale
    slot = NonNegativeState(plan.slot_width, amps, mode)
    copy = tensor_all([slot] * plan.bundles)
    return tensor_all([copy] * plan.k)


def symmetrization_acceptance(plan: SymmetrizationPlan, a_v: Any, p_match: Optional[Fraction] = None) -> Fraction:
    """p_match * A_V + (1 - p_match) * A_dummy on honest bundles"""
    if p_match is None:
        p_match = matching_probability(plan.k, plan.bundles)
    a_v = as_fraction(a_v)
    return p_match * a_v + (1 - p_match) * plan.realized_dummy


def branch_acceptance(plan: SymmetrizationPlan, v: StoqVerifier, witness: NonNegativeState,
                      mode: Optional[ArithmeticMode] = None) -> Scalar:
    """
    Acceptance summed label table by label table

    Each table present in the witness contributes its squared weight times
    the overlap of V on the routed slots (or the dummy overlap).
    """
    mode = witness.mode if mode is None else parse_mode(mode)
    width = plan.k * plan.copy_width
    if witness.width != width:
        raise InstanceError(f"witness width {witness.width} != {width}")
    label_positions = [p for i in range(plan.k) for h in range(plan.bundles) for p in plan.label_positions(i, h)]
    by_table: Dict[int, Dict[int, Scalar]] = defaultdict(dict)
    for key, amp in witness.amplitudes.items():
        table = sum(((key >> p) & 1) << n for n, p in enumerate(label_positions))
        by_table[table][key] = amp

    gamma_v = gamma_form(v)
    layout = VerifierLayout(plan.k, plan.copy_width, v.layout.n0, v.layout.nplus, 0)
    terms = []
    for table in sorted(by_table):
        part = by_table[table]
        weight = total((a * a for a in part.values()), mode)
        routing = route(plan, table)
        if routing is None:
            terms.append(weight * to_scalar(_dummy_overlap(plan), mode))
            continue
        sigma, slots = routing
        mapping = [q for a in range(v.k) for q in plan.data_positions(sigma[a], slots[a])]
        mapping += [width + j for j in range(v.layout.n0 + v.layout.nplus)]
        norm = sqrt(weight, mode)
        state = NonNegativeState(width, {key: amp / norm for key, amp in part.items()}, mode)
        routed = relabel(gamma_v, mapping, layout.width)
        terms.append(weight * gamma_overlap(routed, layout, state, mode))
    return half(mode) + half(mode) * total(terms, mode)
