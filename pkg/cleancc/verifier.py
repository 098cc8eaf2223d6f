"""
CleanCC Verifier
Exact acceptance, the quadratic form and its Perron optimum, and the gate-level circuit
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import networkx as nx
import numpy as np
from loguru import logger

from cleancc.instance import CleanCcInstance, CleanCcWitness, connected_catalog, step
from core.arith import ArithmeticMode, Scalar, as_fraction, to_scalar, total
from core.builder import CircuitBuilder, joint_cubes
from core.errors import CapExceededError, InstanceError
from core.sepval import lambda_max_nonneg
from core.verifier import StoqVerifier
from protocols.common import Construction, ceil_log2, finish_construction

MAX_ACCEPTANCE_CAP = 1 << 12
CIRCUIT_N_CAP = 4


def _check_witness(instance: CleanCcInstance, witness: CleanCcWitness) -> None:
    if len(witness.alpha) != instance.size:
        raise InstanceError(f"witness covers {len(witness.alpha)} of {instance.size} vertices")


def loss(instance: CleanCcInstance, witness: CleanCcWitness) -> Scalar:
    """sum over edges of (alpha_u - alpha_v)^2 plus sum over marked v of alpha_v^2"""
    _check_witness(instance, witness)
    a = witness.alpha
    terms = [(a[u] - a[v]) ** 2 for u, v in instance.edges()]
    terms += [a[v] ** 2 for v in range(instance.size) if instance.marked[v]]
    return total(terms, witness.mode)


def rejection(instance: CleanCcInstance, witness: CleanCcWitness) -> Scalar:
    return loss(instance, witness) / to_scalar(2 * instance.J, witness.mode)


def acceptance(instance: CleanCcInstance, witness: CleanCcWitness) -> Scalar:
    """1 - (1 / 2J)(edge differences + marked mass); exact in rational mode"""
    return to_scalar(1, witness.mode) - rejection(instance, witness)


def quadratic_form(instance: CleanCcInstance) -> np.ndarray:
    """
    Q with <Omega_psi|Gamma|Omega_psi> = alpha^T Q alpha

    Q = (1/J)(sum_j slot permutation + diag(unmarked) + (J - dG - 1) I)
    """
    size = instance.size
    q = np.zeros((size, size))
    for v, row in enumerate(instance.neighbors):
        for u in row:
            q[v, u] += 1.0
    q += np.diag([1.0 - m for m in instance.marked])
    q += (instance.J - instance.dG - 1) * np.eye(size)
    return q / instance.J


@dataclass
class OptimumResult:
    value: float
    witness: CleanCcWitness
    exact: Optional[Fraction] = None
    clean_component: Optional[List[int]] = None

    def to_dict(self) -> Dict[str, Any]:
        data = {"value": self.value, "witness": [float(a) for a in self.witness.alpha],
                "clean_component": self.clean_component}
        if self.exact is not None:
            data["exact"] = str(self.exact)
        return data


def max_acceptance(instance: CleanCcInstance) -> OptimumResult:
    """
    1/2 + 1/2 lambda_max(Q) with the Perron vector as the optimal witness

    On yes instances the subset state of a clean component attains exactly 1
    and is returned with an exact value.
    """
    if instance.size > MAX_ACCEPTANCE_CAP:
        raise CapExceededError(f"2^n = {instance.size} exceeds the {MAX_ACCEPTANCE_CAP}-vertex cap")
    clean = instance.clean_component()
    if clean is not None:
        witness = CleanCcWitness.subset(instance.size, clean, ArithmeticMode.RATIONAL)
        exact = acceptance(instance, witness)
        logger.info(f"[CleanCC] yes instance: clean component of size {len(clean)}, acceptance {exact}")
        return OptimumResult(float(exact), witness, as_fraction(exact), clean)
    perron = lambda_max_nonneg(quadratic_form(instance))
    value = 0.5 + 0.5 * perron.value
    logger.info(f"[CleanCC] n={instance.n}, dG={instance.dG}: max acceptance {value:.12g} "
                f"(bound {float(soundness_bound(instance.n, instance.dG)):.12g})")
    return OptimumResult(value, CleanCcWitness.from_vector(perron.vector))


def soundness_bound(n: int, dG: int) -> Fraction:
    """1 - 1 / (2^{2n+2} (dG + 1))"""
    return 1 - Fraction(1, (1 << (2 * n + 2)) * (dG + 1))


@dataclass
class NoInstanceSweep:
    """Largest no-instance acceptance over all graphs on at most 2^n vertices"""
    n: int
    dG: int
    worst: float
    bound: Fraction
    classes: int
    worst_graph: List[Tuple[int, int]] = field(default_factory=list)
    worst_mark: int = 0

    @property
    def holds(self) -> bool:
        return self.worst <= float(self.bound)

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "dG": self.dG, "worst": self.worst, "bound": str(self.bound), "holds": self.holds,
                "classes": self.classes, "worst_graph": [list(e) for e in self.worst_graph],
                "worst_mark": self.worst_mark}


def component_value(graph: nx.Graph, dG: int, marked: int) -> float:
    """lambda_max of the component block of Q with one marked vertex"""
    nodes = sorted(graph)
    index = {v: i for i, v in enumerate(nodes)}
    J = 1 << ceil_log2(dG + 1)
    m = len(nodes)
    q = np.zeros((m, m))
    for u, v in graph.edges():
        q[index[u], index[v]] += 1.0
        q[index[v], index[u]] += 1.0
    for v in nodes:
        q[index[v], index[v]] += dG - graph.degree(v) + (0.0 if v == marked else 1.0) + (J - dG - 1)
    return 0.5 + 0.5 * lambda_max_nonneg(q / J).value


def no_instance_sweep(n: int, dG: int) -> NoInstanceSweep:
    """
    Worst acceptance over every no instance with 2^n vertices and degree bound dG

    Q is block diagonal over components and more marks only lower each
    block, so the worst case is a single connected graph with one marked
    vertex; all isomorphism classes of such graphs are checked.
    """
    catalog = connected_catalog(1 << n, dG)
    worst, worst_graph, worst_mark = -1.0, [], 0
    for graph in catalog:
        for v in graph:
            value = component_value(graph, dG, v)
            if value > worst:
                worst, worst_graph, worst_mark = value, sorted(graph.edges()), v
    sweep = NoInstanceSweep(n, dG, worst, soundness_bound(n, dG), len(catalog), worst_graph, worst_mark)
    logger.info(f"[CleanCC] {len(catalog)} classes at n={n}, dG={dG}: worst {worst:.12g} <= "
                f"{float(sweep.bound):.12g}: {sweep.holds}")
    return sweep


def protocol6_construction(instance: CleanCcInstance) -> Construction:
    """
    Gate-level Gamma on (B, V, M) wrapped in the branch-overlap test

    B is a q-qubit plus register and V the witness. The marking branch XORs
    the marking bit into M; the involution on (j, v) is realised by
    computing its image into a clean register W, swapping, and computing
    the image of the new value back into W, which clears it.
    """
    if instance.n > CIRCUIT_N_CAP:
        raise CapExceededError(f"gate-level CleanCC circuit runs at n <= {CIRCUIT_N_CAP}")
    builder = CircuitBuilder(1, instance.n)
    v_reg = builder.witness_block(0)
    b_reg = builder.pluses(instance.q)
    m = builder.zeros(1)[0]
    w_reg = builder.zeros(instance.q + instance.n)
    registers = [b_reg, v_reg]

    builder.mark(joint_cubes(registers, [(instance.dG, v) for v in range(instance.size) if instance.marked[v]]), m)

    images = {(j, v): step(instance, j, v) for j in range(instance.J) for v in range(instance.size)}

    def compute():
        for bit in range(instance.q + instance.n):
            ones = [key for key, (j2, v2) in images.items() if ((j2 | (v2 << instance.q)) >> bit) & 1]
            builder.mark(joint_cubes(registers, ones), w_reg[bit])

    compute()
    builder.swap_blocks(b_reg + v_reg, w_reg)
    compute()
    construction = finish_construction(builder, {"n": instance.n, "dG": instance.dG, "q": instance.q,
                                                 "J": instance.J})
    logger.info(f"[CleanCC] protocol circuit width={construction.params['width']}, "
                f"gates={construction.params['gates']}")
    return construction


def build_protocol6_verifier(instance: CleanCcInstance) -> StoqVerifier:
    return protocol6_construction(instance).verifier


def simulated_acceptance(instance: CleanCcInstance, witness: CleanCcWitness,
                         construction: Optional[Construction] = None) -> Scalar:
    """Acceptance from the gate-level circuit"""
    _check_witness(instance, witness)
    construction = construction or protocol6_construction(instance)
    return construction.acceptance(witness.state(instance.n), witness.mode)
