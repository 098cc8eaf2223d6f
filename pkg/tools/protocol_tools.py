"""
Protocol Tools
Product test, symmetrization, prover compression and repetition experiments
"""

from typing import Any, Dict, List, Optional, Tuple

from loguru import logger

from core.arith import ArithmeticMode, Scalar, close, exact_equal, half, to_scalar
from core.errors import InstanceError
from core.settings import ExperimentConfig
from core.states import NonNegativeState, load_state, tensor, tensor_all
from core.verifier import Thresholds, acceptance_probability, load_verifier
from protocols.common import DyadicBranchPlan
from protocols.compression import CompressionParams, compression_acceptance, compression_construction
from protocols.matching import matching_probability
from protocols.product_test import eta, product_test_acceptance, product_test_construction, product_test_value
from protocols.repetition import (
    error_reduction_gap,
    strong_conjunction_construction,
    weak_conjunction_construction,
    weak_repetition_thresholds
)
from protocols.symmetric import (
    sym_projector_construction,
    sym_projector_value,
    sym_to_stoq_construction,
    symmetric_closeness_bound,
    symmetric_overlap
)
from protocols.symmetrization import (
    SymmetrizationPlan,
    branch_acceptance,
    honest_symmetric_witness,
    symmetrization_construction
)
from utils.helpers import exact
from .base_tool import SUCCESS, VIOLATION, BaseTool

# gate-level cross-checks run when the combined witness stays this small
SIMULATION_WITNESS_CAP = 12


def load_factors(data: Dict[str, Any], mode: ArithmeticMode) -> List[NonNegativeState]:
    """{"factors": [state, ...]} with one state per prover"""
    if not isinstance(data, dict) or not isinstance(data.get("factors"), list) or not data["factors"]:
        raise InstanceError("factor JSON needs a non-empty 'factors' list of states")
    return [load_state(f, mode) for f in data["factors"]]


def _agree(a: Scalar, b: Scalar, mode: ArithmeticMode) -> bool:
    return exact_equal(a, b) if mode is ArithmeticMode.RATIONAL else close(a, b)


class ProductTestTool(BaseTool):
    """P_prod(rho, sigma) analytically and through the two-prover circuit"""

    def __init__(self, settings=None):
        super().__init__(
            name="product-test",
            description="Product test acceptance 1/2 + 1/2 P_prod on two witness registers",
            settings=settings
        )

    def run(self, config: ExperimentConfig) -> Tuple[str, Dict[str, Any]]:
        mode = self.mode(config)
        k, ell = int(self.knob(config, "k", 2)), int(self.knob(config, "ell", 1))
        rho = self.load(config, "rho", load_state, mode)
        sigma = self.load(config, "sigma", load_state, mode) if "sigma" in config.paths else rho
        value = product_test_value(rho, sigma, k, ell, mode)
        accept = product_test_acceptance(rho, sigma, k, ell, mode)
        result: Dict[str, Any] = {"k": k, "ell": ell, "p_prod": exact(value), "acceptance": exact(accept)}
        status = SUCCESS

        if 2 * k * ell <= SIMULATION_WITNESS_CAP:
            construction = product_test_construction(k, ell)
            circuit = construction.acceptance(tensor(rho, sigma), mode)
            result["circuit_acceptance"] = exact(circuit)
            result["circuit_agrees"] = _agree(circuit, accept, mode)
            if not result["circuit_agrees"]:
                status = VIOLATION

        if sigma is rho and self.knob(config, "eta"):
            bound = eta(rho, k, ell, restarts=self.settings.sepval.restarts, seed=config.seed or 0)
            ceiling = 1 - bound.eta / 3
            result["eta"] = bound.eta
            result["eta_ceiling"] = ceiling
            result["eta_bound_holds"] = float(value) <= ceiling + 1e-9
            if not result["eta_bound_holds"]:
                status = VIOLATION
        return status, result


class SymmetrizeTool(BaseTool):
    """Length-efficient symmetrization, the dyadic symmetric projector and the symmetric-to-stoquastic mix"""

    KINDS = ("length-efficient", "projector", "sym-to-stoq")

    def __init__(self, settings=None):
        super().__init__(
            name="symmetrize",
            description="Symmetrization constructions with analytic and gate-level acceptance",
            settings=settings
        )

    def run(self, config: ExperimentConfig) -> Tuple[str, Dict[str, Any]]:
        kind = self.knob(config, "kind", "length-efficient")
        if kind not in self.KINDS:
            raise InstanceError(f"--kind must be one of {', '.join(self.KINDS)}, got {kind!r}")
        mode = self.mode(config)
        factors = self.load(config, "factors", load_factors, mode) if "factors" in config.paths else None
        if kind == "projector":
            return self._projector(config, factors, mode)
        v = self.load(config, "verifier", load_verifier)
        thresholds = self.thresholds(config)
        if kind == "sym-to-stoq":
            return self._sym_to_stoq(config, v, thresholds, factors, mode)
        return self._length_efficient(config, v, thresholds, factors, mode)

    def _projector(self, config: ExperimentConfig, factors: Optional[List[NonNegativeState]],
                   mode: ArithmeticMode) -> Tuple[str, Dict[str, Any]]:
        k, ell, b = int(self.knob(config, "k", 2)), int(self.knob(config, "ell", 1)), int(self.knob(config, "b", 0))
        construction = sym_projector_construction(k, ell, b)
        plan_dict = construction.params["plan"]
        result: Dict[str, Any] = {"kind": "projector", "construction": construction.params}
        if factors is None:
            return SUCCESS, result
        phi = tensor_all(factors)
        plan = DyadicBranchPlan(k, b)
        circuit = construction.acceptance(phi, mode)
        dyadic = sym_projector_value(phi, plan, ell, mode)
        ideal = half(mode) + half(mode) * symmetric_overlap(phi, k, ell, mode)
        deviation = abs(float(circuit) - float(ideal))
        closeness = symmetric_closeness_bound(factors)
        result.update({
            "circuit_acceptance": exact(circuit), "dyadic_value": exact(dyadic), "ideal_acceptance": exact(ideal),
            "deviation": deviation, "zeta": plan_dict["zeta"], "closeness": closeness.to_dict(),
        })
        holds = _agree(circuit, dyadic, mode) and deviation <= float(plan.zeta) + 1e-12
        return (SUCCESS if holds else VIOLATION), result

    def _sym_to_stoq(self, config: ExperimentConfig, v, thresholds: Thresholds,
                     factors: Optional[List[NonNegativeState]], mode: ArithmeticMode) -> Tuple[str, Dict[str, Any]]:
        b = self.knob(config, "b")
        construction = sym_to_stoq_construction(v, thresholds, None if b is None else int(b),
                                                self.settings.protocols.lambda_bits)
        result: Dict[str, Any] = {"kind": "sym-to-stoq", "construction": construction.params}
        if factors is not None:
            result["acceptance"] = exact(construction.acceptance(tensor_all(factors), mode))
        return SUCCESS, result

    def _length_efficient(self, config: ExperimentConfig, v, thresholds: Thresholds,
                          factors: Optional[List[NonNegativeState]], mode: ArithmeticMode) -> Tuple[str, Dict[str, Any]]:
        bundles = self.knob(config, "bundles")
        bundles = None if bundles is None else int(bundles)
        dummy_bits = self.settings.protocols.dummy_bits
        plan = SymmetrizationPlan.default(v.k, v.ell, thresholds, bundles, dummy_bits)
        p_match = matching_probability(plan.k, plan.bundles)
        result: Dict[str, Any] = {"kind": "length-efficient", "plan": plan.to_dict(), "p_match": exact(p_match)}
        status = SUCCESS
        if factors is not None:
            a_v = acceptance_probability(v, tensor_all(factors), mode)
            analytic = (to_scalar(p_match, mode) * a_v
                        + to_scalar(1 - p_match, mode) * to_scalar(plan.realized_dummy, mode))
            result["verifier_acceptance"] = exact(a_v)
            result["analytic_acceptance"] = exact(analytic)
            if plan.table_bits <= SIMULATION_WITNESS_CAP:
                honest = honest_symmetric_witness(plan, factors, mode)
                by_table = branch_acceptance(plan, v, honest, mode)
                result["table_acceptance"] = exact(by_table)
                if not _agree(by_table, analytic, mode):
                    status = VIOLATION
            else:
                logger.info(f"[symmetrize] {plan.table_bits} label bits: skipping the table-by-table evaluation")
        if bundles is not None:
            construction = symmetrization_construction(v, thresholds, bundles, dummy_bits)
            result["construction"] = construction.params
        return status, result


class CompressTool(BaseTool):
    """k-prover to 2-prover compression"""

    def __init__(self, settings=None):
        super().__init__(
            name="compress",
            description="Prover compression mixing V with the product test",
            settings=settings
        )

    def run(self, config: ExperimentConfig) -> Tuple[str, Dict[str, Any]]:
        mode = self.mode(config)
        v = self.load(config, "verifier", load_verifier)
        thresholds = self.thresholds(config)
        knobs = self.settings.protocols
        override = self.fraction(config, "lambda")
        params = CompressionParams.create(thresholds, knobs.c_prod_fraction, knobs.lambda_bits, override)
        construction = compression_construction(v, thresholds, knobs.c_prod_fraction, knobs.lambda_bits, override)
        result: Dict[str, Any] = {"params": construction.params, "lambda": exact(params.lam)}
        status = SUCCESS
        if "rho" in config.paths:
            rho = self.load(config, "rho", load_state, mode)
            sigma = self.load(config, "sigma", load_state, mode) if "sigma" in config.paths else rho
            analytic = compression_acceptance(v, rho, sigma, params.lam, mode)
            result["analytic_acceptance"] = exact(analytic)
            if 2 * rho.width <= SIMULATION_WITNESS_CAP:
                circuit = construction.acceptance(tensor(rho, sigma), mode)
                result["circuit_acceptance"] = exact(circuit)
                if not _agree(circuit, analytic, mode):
                    status = VIOLATION
        return status, result


class RepeatTool(BaseTool):
    """Weak and strong conjunction of copies of one verifier"""

    def __init__(self, settings=None):
        super().__init__(
            name="repeat",
            description="Weak or strong conjunction with the product-witness acceptance law",
            settings=settings
        )

    def run(self, config: ExperimentConfig) -> Tuple[str, Dict[str, Any]]:
        mode = self.mode(config)
        kind = self.knob(config, "kind", "weak")
        if kind not in ("weak", "strong"):
            raise InstanceError(f"--kind must be weak or strong, got {kind!r}")
        copies = int(self.knob(config, "copies", 2))
        if copies < 1:
            raise InstanceError(f"--copies must be positive, got {copies}")
        v = self.load(config, "verifier", load_verifier)
        build = weak_conjunction_construction if kind == "weak" else strong_conjunction_construction
        construction = build([v] * copies)
        result: Dict[str, Any] = {"kind": kind, "copies": copies, "construction": construction.params}
        status = SUCCESS

        if "witness" in config.paths:
            witness = self.load(config, "witness", load_state, mode)
            p = acceptance_probability(v, witness, mode)
            factor = p if kind == "weak" else 2 * p - 1
            law = half(mode) + half(mode) * factor ** copies
            circuit = construction.acceptance(tensor_all([witness] * copies), mode)
            result.update({"single_acceptance": exact(p), "law": exact(law), "circuit_acceptance": exact(circuit)})
            if not _agree(circuit, law, mode):
                status = VIOLATION

        c, s = self.fraction(config, "c"), self.fraction(config, "s")
        if c is not None and s is not None and kind == "weak":
            a, b = 2 * c - 1, 2 * s - 1
            c2, s2 = weak_repetition_thresholds(a, b, copies)
            result["thresholds"] = {"c": str(c2), "s": str(s2), "gap": str(error_reduction_gap(a, b, copies)),
                                    "gap_float": float(error_reduction_gap(a, b, copies))}
        return status, result
