"""
Closure Tools
Rectangular closure testing, SOS-style rounding and clean connected components
"""

from typing import Any, Dict, Tuple

from loguru import logger

from cleancc.instance import CleanCcInstance, CleanCcWitness, from_edges, load_cleancc
from cleancc.verifier import max_acceptance, no_instance_sweep, simulated_acceptance, soundness_bound
from core.errors import CapExceededError, ConvergenceError, InstanceError
from core.sepval import load_matrix
from core.settings import ExperimentConfig
from rectclosure.instance import certify_soundness, load_seprcd, rectangle_value_max
from rectclosure.tester import rect_closure_test, rect_closure_test_recursive
from sosround.oracle import expected_value, load_oracle
from sosround.rounding import bks_round_loop, diagnostics, entropy_decrement_check
from utils.helpers import exact, read_json
from .base_tool import ACCEPT, REJECT, SUCCESS, VIOLATION, BaseTool

CLEANCC_SIMULATION_N = 3


class RectClosureTool(BaseTool):
    """Seed-by-seed closure of a witness rectangle under Gamma"""

    def __init__(self, settings=None):
        super().__init__(
            name="rect-closure",
            description="Rectangular closure test for perfectly agreeing separable instances",
            settings=settings
        )

    def run(self, config: ExperimentConfig) -> Tuple[str, Dict[str, Any]]:
        caps = self.settings.rectclosure
        instance = self.load(config, "instance", load_seprcd)
        gamma = config.gamma if config.gamma is not None else 0.5
        if self.knob(config, "recursive"):
            verdict = rect_closure_test_recursive(instance, gamma, config.rounds)
        else:
            verdict = rect_closure_test(instance, gamma, config.rounds, parallel=config.workers,
                                        max_ell=caps.max_ell, max_r=caps.max_r)
        result: Dict[str, Any] = {"ell": instance.ell, "m0": instance.m0, "r": instance.r, "gamma": gamma,
                                  "closure": verdict.to_dict()}
        if self.knob(config, "rectangles"):
            try:
                value, arg = rectangle_value_max(instance)
            except CapExceededError as e:
                logger.warning(f"[rect-closure] {e}")
            else:
                result["rectangle_value_max"] = value
                result["rectangle"] = None if arg is None else {"S": arg[0], "T": arg[1]}
        if self.knob(config, "certify"):
            try:
                result["soundness"] = certify_soundness(instance, gamma, seed=config.seed or 0).to_dict()
            except CapExceededError as e:
                logger.warning(f"[rect-closure] {e}")
        return (ACCEPT if verdict.accept else REJECT), result


class SosRoundTool(BaseTool):
    """Conditioning loop followed by direct rounding on a mixture oracle"""

    def __init__(self, settings=None):
        super().__init__(
            name="sos-round",
            description="Rounding of a moment oracle against a non-negative tensor matrix",
            settings=settings
        )

    def run(self, config: ExperimentConfig) -> Tuple[str, Dict[str, Any]]:
        epsilon = config.epsilon if config.epsilon is not None else self.settings.sos.epsilon
        oracle = self.load(config, "oracle", load_oracle)
        diag = diagnostics(oracle, workers=config.workers)
        result: Dict[str, Any] = {"d": oracle.d, "t": oracle.t, "components": oracle.components,
                                  "diagnostics": diag.to_dict()}
        status = SUCCESS
        if "matrix" in config.paths:
            m = self.load(config, "matrix", load_matrix)
            rounding = bks_round_loop(m, oracle, epsilon, workers=config.workers)
            result["pseudo_expectation"] = expected_value(m, oracle)
            result["rounding"] = rounding.to_dict()
            if not rounding.guarantee_holds:
                status = VIOLATION
        if oracle.t >= 2 and diag.hellinger > epsilon:
            try:
                decrement = entropy_decrement_check(oracle, oracle.t, epsilon, workers=config.workers)
            except ConvergenceError as e:
                result["decrement"] = {"holds": False, "error": str(e)}
                status = VIOLATION
            else:
                result["decrement"] = decrement.to_dict()
                if not decrement.holds:
                    status = VIOLATION
        return status, result


def load_cleancc_any(data: Dict[str, Any]) -> CleanCcInstance:
    """Neighbor-list JSON, or {"n", "dG", "edges", "marked"} with marked vertex indices"""
    if isinstance(data, dict) and "edges" in data:
        try:
            return from_edges(int(data["n"]), int(data["dG"]), [tuple(e) for e in data["edges"]],
                              [int(v) for v in data.get("marked", [])])
        except (KeyError, TypeError, ValueError) as e:
            raise InstanceError(f"bad CleanCC edge JSON: {e}")
    return load_cleancc(data)


class CleanccTool(BaseTool):
    """Optimal acceptance of the clean-component verifier"""

    def __init__(self, settings=None):
        super().__init__(
            name="cleancc",
            description="Max acceptance of the CleanCC verifier and the no-instance bound",
            settings=settings
        )

    def run(self, config: ExperimentConfig) -> Tuple[str, Dict[str, Any]]:
        instance = load_cleancc_any(read_json(self.path(config, "instance")))
        optimum = max_acceptance(instance)
        bound = soundness_bound(instance.n, instance.dG)
        result: Dict[str, Any] = {
            "n": instance.n, "dG": instance.dG, "yes_instance": instance.is_yes,
            "optimum": optimum.to_dict(), "soundness_bound": exact(bound),
        }
        status = ACCEPT if instance.is_yes else REJECT
        if not instance.is_yes and optimum.value > float(bound):
            status = VIOLATION

        if self.knob(config, "simulate") and instance.n <= CLEANCC_SIMULATION_N:
            witness = optimum.witness
            if optimum.clean_component is not None:
                witness = CleanCcWitness.subset(instance.size, optimum.clean_component, config.mode)
            simulated = simulated_acceptance(instance, witness)
            result["simulated_acceptance"] = exact(simulated)
            if abs(float(simulated) - optimum.value) > 1e-9:
                status = VIOLATION

        if self.knob(config, "sweep"):
            sweep = no_instance_sweep(self.settings.cleancc.sweep_n, self.settings.cleancc.sweep_dG)
            result["sweep"] = sweep.to_dict()
            if not sweep.holds:
                status = VIOLATION
        return status, result
