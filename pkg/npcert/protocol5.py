"""
Two-Prover Protocol
Uniformity-or-consistency check on two (vertex, label) registers, exact rejection and its minimization
"""

import itertools
from math import comb
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List

import numpy as np
from loguru import logger

from core.arith import Scalar, to_scalar, total
from core.builder import CircuitBuilder, value_cubes
from core.errors import CapExceededError
from core.verifier import StoqVerifier
from npcert.instance import BranchDistribution, GapCGInstance, decode, register_widths
from npcert.predicates import pair_violation
from protocols.common import Construction, finish_construction

MINIMIZE_PAIR_CAP = 64
TABLE_BITS_CAP = 16


def protocol5_construction(instance: GapCGInstance) -> Construction:
    """
    Plus selector s: s=0 rejects iff u = v, s=1 rejects iff the two samples conflict

    The rejection flag starts at 0, so the stoquastic acceptance is
    1/2 + 1/2 (1 - Pr[reject]).
    """
    vertex_bits, label_bits = register_widths(instance)
    ell = vertex_bits + label_bits
    if 2 * ell + 1 > TABLE_BITS_CAP:
        raise CapExceededError(f"two registers of {ell} qubits exceed the {TABLE_BITS_CAP}-qubit predicate table")
    builder = CircuitBuilder(2, ell)
    selector = builder.pluses(1)[0]
    flag = builder.zeros(1)[0]
    register = builder.witness_block(0) + builder.witness_block(1) + [selector]
    rejecting = []
    for x, y in itertools.product(range(1 << ell), repeat=2):
        first, second = decode(instance, x), decode(instance, y)
        code = x | (y << ell)
        if first is None or second is None:
            rejecting.extend([code, code | (1 << (2 * ell))])
            continue
        if first[0] == second[0]:
            rejecting.append(code)
        if pair_violation(instance, first, second):
            rejecting.append(code | (1 << (2 * ell)))
    builder.mark(value_cubes(register, rejecting), flag)
    construction = finish_construction(builder, {"protocol": 5, "ell": ell, "rejecting_branches": len(rejecting)})
    logger.info(f"[Protocol5] {instance.name}: ell={ell}, width={construction.params['width']}")
    return construction


def build_protocol5_verifier(instance: GapCGInstance) -> StoqVerifier:
    return protocol5_construction(instance).verifier


def protocol5_rejection(instance: GapCGInstance, dist: BranchDistribution) -> Scalar:
    """
    1/2 sum_u q(u)^2 + 1/2 [sum_u sum_{a != b} p(u,a) p(u,b) + sum_{uv in E} sum_{(a,b) not in R_uv} p(u,a) p(v,b)]

    Edges are summed in both orientations.
    """
    mode = dist.mode
    q = dist.marginal()
    half = to_scalar(Fraction(1, 2), mode)
    uniformity = total((m * m for m in q.values()), mode)
    conflicts = []
    items = list(dist.p.items())
    for (u, a), pa in items:
        for (v, b), pb in items:
            if pair_violation(instance, (u, a), (v, b)):
                conflicts.append(pa * pb)
    consistency = total(conflicts, mode) if conflicts else to_scalar(0, mode)
    return half * uniformity + half * consistency


def protocol5_acceptance(instance: GapCGInstance, dist: BranchDistribution) -> Scalar:
    """Stoquastic acceptance 1/2 + 1/2 (1 - rejection)"""
    return 1 - protocol5_rejection(instance, dist) / 2


def rejection_form(instance: GapCGInstance) -> np.ndarray:
    """Symmetric A with rejection(p) = p^T A p over the pairs in index order"""
    pairs = instance.pairs()
    size = len(pairs)
    form = np.zeros((size, size))
    for i, (u, a) in enumerate(pairs):
        for j, (v, b) in enumerate(pairs):
            value = 0.5 if u == v else 0.0
            if pair_violation(instance, (u, a), (v, b)):
                value += 0.5
            form[i, j] = value
    return form


def _project_simplex(x: np.ndarray) -> np.ndarray:
    u = np.sort(x)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, x.size + 1)
    rho = np.nonzero(u * idx > css - 1)[0][-1]
    theta = (css[rho] - 1) / (rho + 1)
    return np.maximum(x - theta, 0.0)


def _descend(form: np.ndarray, start: np.ndarray, iters: int, step: float) -> np.ndarray:
    p = start
    for _ in range(iters):
        nxt = _project_simplex(p - step * 2 * form @ p)
        if np.max(np.abs(nxt - p)) < 1e-13:
            return nxt
        p = nxt
    return p


def _lattice(size: int, resolution: int):
    for cut in itertools.combinations(range(resolution + size - 1), size - 1):
        bounds = (-1,) + cut + (resolution + size - 1,)
        yield np.array([bounds[i + 1] - bounds[i] - 1 for i in range(size)], dtype=float) / resolution


@dataclass
class MinimizationResult:
    """Smallest rejection found; every value is attained, so it bounds the minimum from above"""
    value: float
    p: BranchDistribution
    starts: int

    def to_dict(self) -> Dict[str, Any]:
        return {"value": self.value, "argmin": self.p.to_dict(), "starts": self.starts}


def minimize_protocol5_rejection(instance: GapCGInstance, restarts: int = 32, grid: int = 4, seed: int = 0,
                                 iters: int = 2000, lattice_budget: int = 20_000) -> MinimizationResult:
    """
    Minimize p^T A p over the simplex by projected gradient from many starts

    Starts are the uniform point, every vertex of the simplex, random
    Dirichlet draws and the simplex lattice of the given resolution when it
    fits within lattice_budget points.
    """
    form = rejection_form(instance)
    size = form.shape[0]
    if size > MINIMIZE_PAIR_CAP:
        raise CapExceededError(f"|V x Sigma| = {size} exceeds the minimization cap {MINIMIZE_PAIR_CAP}")
    rng = np.random.default_rng(seed)
    step = 1.0 / max(1e-12, 2 * np.linalg.eigvalsh(form).max())
    starts: List[np.ndarray] = [np.full(size, 1.0 / size)] + list(np.eye(size))
    starts += list(rng.dirichlet(np.ones(size), size=restarts))
    best_value, best_p, count = np.inf, None, 0
    for start in starts:
        p = _descend(form, start, iters, step)
        value = float(p @ form @ p)
        count += 1
        if value < best_value:
            best_value, best_p = value, p
    lattice_points = 0
    if comb(grid + size - 1, size - 1) <= lattice_budget:
        for point in _lattice(size, grid):
            value = float(point @ form @ point)
            lattice_points += 1
            if value < best_value:
                best_value, best_p = value, point
    logger.info(f"[Protocol5] min rejection {best_value:.6f} on {instance.name} "
                f"({count} descents, {lattice_points} lattice points)")
    return MinimizationResult(best_value, BranchDistribution.from_vector(instance, best_p), count + lattice_points)


def protocol5_soundness_floor(instance: GapCGInstance) -> Fraction:
    """1/(2n) + gamma/n with gamma = min{2 delta^2, kappa/(2Q), eta d/64}, delta = eta/48, kappa = eta/64"""
    eta = instance.eta
    delta, kappa = eta / 48, eta / 64
    gamma = min(2 * delta * delta, kappa / (2 * instance.alphabet), eta * instance.degree / 64)
    return Fraction(1, 2 * instance.n) + gamma / instance.n
