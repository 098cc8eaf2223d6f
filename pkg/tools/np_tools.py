"""
NP Certification Tools
Protocol 4 and Protocol 5 on constraint graphs, and the generalized birthday paradox
"""

import math
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from loguru import logger

from core.arith import ArithmeticMode
from core.errors import CapExceededError, InstanceError
from core.settings import ExperimentConfig
from core.states import tensor
from npcert.birthday import bad_pair_weight, birthday_exact, birthday_mc
from npcert.instance import BranchDistribution, GapCGInstance, branch_state, load_instance
from npcert.protocol4 import default_prover_count, protocol4_acceptance, stoquastic_acceptance
from npcert.protocol5 import (
    minimize_protocol5_rejection,
    protocol5_acceptance,
    protocol5_construction,
    protocol5_rejection,
    protocol5_soundness_floor
)
from utils.helpers import exact, read_json
from .base_tool import ACCEPT, REJECT, SUCCESS, VIOLATION, BaseTool

WITNESS_KINDS = ("honest", "uniform", "far", "point", "file")
REJECTION_TOLERANCE = 1e-12


def load_problem(path: str) -> Tuple[GapCGInstance, Dict[str, Any]]:
    """The instance plus its raw JSON, which may carry a 'labeling'"""
    data = read_json(path)
    if not isinstance(data, dict):
        raise InstanceError(f"{path} does not hold a GapCG object")
    return load_instance(data, name=str(data.get("name", path))), data


def far_distribution(instance: GapCGInstance, labeling: Sequence[int]) -> BranchDistribution:
    """Honest labels on the first ceil(n/2) vertices only: vertex marginal at distance 1/2 from uniform"""
    kept = math.ceil(instance.n / 2)
    weight = Fraction(1, kept)
    return BranchDistribution(instance, {(v, labeling[v]): weight for v in range(kept)})


class WitnessMixin:
    """Branch distribution selected by --witness"""

    def labeling(self, config: ExperimentConfig, instance: GapCGInstance, data: Dict[str, Any]) -> List[int]:
        labeling = self.knob(config, "labeling", data.get("labeling"))
        if labeling is None:
            return [0] * instance.n
        labeling = [int(a) for a in labeling]
        if len(labeling) != instance.n or any(not 0 <= a < instance.alphabet for a in labeling):
            raise InstanceError(f"labeling must give one label in 0..{instance.alphabet - 1} "
                                f"to each of {instance.n} vertices")
        return labeling

    def distribution(self, config: ExperimentConfig, instance: GapCGInstance,
                     data: Dict[str, Any]) -> Tuple[BranchDistribution, Dict[str, Any]]:
        kind = self.knob(config, "witness", "honest")
        if kind not in WITNESS_KINDS:
            raise InstanceError(f"--witness must be one of {', '.join(WITNESS_KINDS)}, got {kind!r}")
        info: Dict[str, Any] = {"kind": kind}
        if kind in ("honest", "far"):
            labeling = self.labeling(config, instance, data)
            violated = instance.violated_edge(labeling)
            info["labeling_violates"] = None if violated is None else list(violated)
            if kind == "honest":
                return BranchDistribution.honest(instance, labeling), info
            return far_distribution(instance, labeling), info
        if kind == "uniform":
            return BranchDistribution.uniform(instance), info
        if kind == "point":
            v, a = int(self.knob(config, "vertex", 0)), int(self.knob(config, "label", 0))
            info.update(vertex=v, label=a)
            return BranchDistribution.point(instance, v, a), info
        vector = read_json(self.path(config, "witness_file")).get("vector")
        if not isinstance(vector, list):
            raise InstanceError("witness file needs a 'vector' of weights over the (vertex, label) pairs")
        return BranchDistribution.from_vector(instance, [float(w) for w in vector]), info


class Np4Tool(WitnessMixin, BaseTool):
    """K-prover uniformity-and-consistency protocol"""

    def __init__(self, settings=None):
        super().__init__(
            name="np4",
            description="Branch acceptance of the K-prover constraint-graph protocol",
            settings=settings
        )

    def run(self, config: ExperimentConfig) -> Tuple[str, Dict[str, Any]]:
        knobs = self.settings.npcert
        instance, data = load_problem(self.path(config, "instance"))
        dist, info = self.distribution(config, instance, data)
        k = config.K or default_prover_count(instance.n, knobs.paninski_constant)
        delta = Fraction(str(config.delta)) if config.delta is not None else Fraction(knobs.uniformity_delta)
        trials = config.trials or knobs.trials
        estimate = protocol4_acceptance(instance, dist, k, delta, trials=trials, seed=config.seed,
                                        workers=config.workers, exact_cap=knobs.exact_branch_cap)
        stoq = stoquastic_acceptance(estimate.exact_value if estimate.exact else estimate.value)
        result: Dict[str, Any] = {
            "instance": instance.name, "n": instance.n, "K": k, "delta": str(delta), "witness": info,
            "branch_acceptance": estimate.to_dict(), "stoquastic_acceptance": exact(stoq),
            "seed": config.seed, "trials": trials,
        }
        return (ACCEPT if estimate.value >= 0.5 else REJECT), result


class Np5Tool(WitnessMixin, BaseTool):
    """Two-prover protocol with exact rejection"""

    def __init__(self, settings=None):
        super().__init__(
            name="np5",
            description="Exact rejection of the two-prover constraint-graph protocol",
            settings=settings
        )

    def run(self, config: ExperimentConfig) -> Tuple[str, Dict[str, Any]]:
        knobs = self.settings.npcert
        instance, data = load_problem(self.path(config, "instance"))
        dist, info = self.distribution(config, instance, data)
        if self.mode(config) is ArithmeticMode.FLOAT:
            dist = BranchDistribution.from_vector(instance, dist.vector())
        rejection = protocol5_rejection(instance, dist)
        target = Fraction(1, 2 * instance.n)
        result: Dict[str, Any] = {
            "instance": instance.name, "n": instance.n, "witness": info,
            "rejection": exact(rejection), "acceptance": exact(protocol5_acceptance(instance, dist)),
            "honest_rejection": exact(target), "soundness_floor": exact(protocol5_soundness_floor(instance)),
        }
        status = ACCEPT if float(rejection) <= float(target) + REJECTION_TOLERANCE else REJECT

        if self.knob(config, "circuit"):
            try:
                construction = protocol5_construction(instance)
            except CapExceededError as e:
                logger.warning(f"[np5] {e}")
            else:
                state = branch_state(dist)
                circuit = construction.acceptance(tensor(state, state))
                result["circuit_acceptance"] = exact(circuit)
                if abs(float(circuit) - float(result["acceptance"]["float"])) > 1e-9:
                    status = VIOLATION

        if self.knob(config, "minimize"):
            best = minimize_protocol5_rejection(instance, restarts=knobs.minimize_restarts,
                                                grid=knobs.minimize_grid, seed=config.seed or 0)
            result["minimum"] = best.to_dict()
            result["minimum_excess_times_n"] = (best.value - float(target)) * instance.n
        return status, result


def bad_pair_matrix(space: int, pairs: Optional[List[Any]]) -> Optional[sp.csr_matrix]:
    """Symmetric sparse relation from a list of [x, y] pairs; None keeps equality"""
    if pairs is None:
        return None
    if not pairs:
        return sp.csr_matrix((space, space))
    edges = np.array(pairs, dtype=int)
    if edges.ndim != 2 or edges.shape[1] != 2 or edges.min() < 0 or edges.max() >= space:
        raise InstanceError(f"bad pairs must be [x, y] outcomes in 0..{space - 1}")
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    matrix = sp.coo_matrix((np.ones(rows.size), (rows, cols)), shape=(space, space)).tocsr()
    matrix.data[:] = 1.0
    return matrix


class BirthdayTool(BaseTool):
    """Monte Carlo bad-pair probability against the exact product formula"""

    def __init__(self, settings=None):
        super().__init__(
            name="birthday",
            description="Generalized birthday paradox with seeded Monte Carlo",
            settings=settings
        )

    def run(self, config: ExperimentConfig) -> Tuple[str, Dict[str, Any]]:
        k = config.K or int(self.knob(config, "k", 23))
        trials = config.trials or self.settings.npcert.trials
        data: Dict[str, Any] = read_json(self.path(config, "mu")) if "mu" in config.paths else {}
        mu = data.get("mu")
        space = int(self.knob(config, "n", len(mu) if mu else 365))
        if mu is None:
            mu = np.full(space, 1.0 / space)
        bad = bad_pair_matrix(space, data.get("bad_pairs"))
        omega0 = data.get("omega0")

        estimate = birthday_mc(space, mu, bad, omega0, k=k, trials=trials, seed=config.seed, workers=config.workers)
        result: Dict[str, Any] = {
            "n": space, "K": k, "trials": trials, "seed": config.seed, "estimate": estimate.to_dict(),
            "lambda": bad_pair_weight(mu, bad, omega0),
        }
        status = SUCCESS
        if bad is None and omega0 is None and np.allclose(mu, 1.0 / space):
            oracle = birthday_exact(space, k)
            result["exact"] = exact(oracle)
            result["within_interval"] = estimate.ci_low <= float(oracle) <= estimate.ci_high
            result["deviation"] = abs(estimate.value - float(oracle))
        return status, result
