"""
Engine Tools
Circuit simulation, verifier acceptance and separable-value experiments
"""

from typing import Any, Dict, Tuple

import numpy as np
from loguru import logger

from core.arith import ArithmeticMode, close, exact_equal
from core.revsim import PERMUTATION_WIDTH_CAP, apply, compose, controlled, identity, int_to_bits, load_circuit
from core.sepval import check_multiplicativity, hsep, hsep_shift_check, lambda_max_nonneg, load_matrix, remark_matrix
from core.settings import ExperimentConfig
from core.states import load_state
from core.verifier import (
    Thresholds,
    acceptance_probability,
    branch_overlap_acceptance,
    build_branch_overlap_verifier,
    close_image_fidelity,
    gamma_form,
    load_verifier
)
from utils.helpers import exact
from .base_tool import ACCEPT, REJECT, SUCCESS, VIOLATION, BaseTool

TABLE_PRINT_WIDTH = 6


class CircuitTool(BaseTool):
    """Apply, invert, control and compose reversible circuits"""

    def __init__(self, settings=None):
        super().__init__(
            name="circuit",
            description="Simulate a reversible circuit on basis strings and check its inverse",
            settings=settings
        )

    def run(self, config: ExperimentConfig) -> Tuple[str, Dict[str, Any]]:
        key = "circuit" if "circuit" in config.paths else "instance"
        circuit = self.load(config, key, load_circuit)
        second = config.paths.get("second")
        if second:
            circuit = compose(circuit, self.load(config, "second", load_circuit))
        control = self.knob(config, "control")
        if control is not None:
            circuit = controlled(circuit, int(control), self.knob(config, "ancilla"))

        inputs = self.knob(config, "inputs", [])
        result: Dict[str, Any] = {
            "width": circuit.width, "gates": len(circuit), "counts": circuit.count(),
            "images": {bits: apply(circuit, bits) for bits in inputs},
        }
        status = SUCCESS
        if circuit.width <= PERMUTATION_WIDTH_CAP:
            table = circuit.permutation()
            round_trip = compose(circuit, circuit.inverse()).permutation()
            result["bijective"] = bool(len(np.unique(table)) == len(table))
            result["inverse_is_identity"] = bool(np.array_equal(round_trip, identity(circuit.width).permutation()))
            if circuit.width <= TABLE_PRINT_WIDTH:
                result["table"] = {int_to_bits(x, circuit.width): int_to_bits(int(y), circuit.width)
                                   for x, y in enumerate(table)}
            if not (result["bijective"] and result["inverse_is_identity"]):
                status = VIOLATION
        else:
            logger.warning(f"[circuit] width {circuit.width} above {PERMUTATION_WIDTH_CAP}: "
                           f"skipping the permutation table")
        return status, result


class VerifyTool(BaseTool):
    """Acceptance of a verifier on a witness, through both the circuit and the branch-overlap form"""

    def __init__(self, settings=None):
        super().__init__(
            name="verify",
            description="Exact acceptance probability of a stoquastic verifier on a non-negative witness",
            settings=settings
        )

    def run(self, config: ExperimentConfig) -> Tuple[str, Dict[str, Any]]:
        mode = self.mode(config)
        key = "verifier" if "verifier" in config.paths else "instance"
        v = self.load(config, key, load_verifier)
        witness = self.load(config, "witness", load_state, mode)

        accept = acceptance_probability(v, witness, mode)
        gamma = gamma_form(v)
        overlap_route = branch_overlap_acceptance(identity(v.layout.width), gamma, witness, v.layout, mode)
        explicit = build_branch_overlap_verifier(identity(v.layout.width), gamma, v.layout)
        explicit_accept = acceptance_probability(explicit, witness, mode)
        same = exact_equal if mode is ArithmeticMode.RATIONAL else close
        agree = same(accept, overlap_route) and same(accept, explicit_accept)
        result: Dict[str, Any] = {
            "layout": v.layout.to_dict(), "acceptance": exact(accept),
            "branch_overlap_acceptance": exact(overlap_route),
            "explicit_overlap_acceptance": exact(explicit_accept), "forms_agree": agree,
        }

        zeros = self.knob(config, "close_zeros")
        if zeros is not None:
            fidelity = close_image_fidelity(v.circuit, v.layout, witness, zeros, self.knob(config, "close_pluses", []),
                                            mode)
            result["close_image_fidelity"] = exact(fidelity)

        if not agree:
            return VIOLATION, result
        c, s = self.fraction(config, "c"), self.fraction(config, "s")
        if c is None or s is None:
            return SUCCESS, result
        thresholds = Thresholds(c, s)
        cut = (thresholds.c + thresholds.s) / 2
        result["thresholds"] = {"c": str(thresholds.c), "s": str(thresholds.s), "cut": str(cut)}
        return (ACCEPT if float(accept) >= cut else REJECT), result


class SepvalTool(BaseTool):
    """hsep of a partitioned matrix with the optional shift identity check"""

    def __init__(self, settings=None):
        super().__init__(
            name="sepval",
            description="Separable value hsep(M) of a partitioned non-negative matrix",
            settings=settings
        )

    def run(self, config: ExperimentConfig) -> Tuple[str, Dict[str, Any]]:
        knobs = self.settings.sepval
        m = remark_matrix() if self.knob(config, "remark") else self.load(config, "matrix", load_matrix)
        seed = config.seed or 0
        best = hsep(m, seed=seed, grid=knobs.grid, lattice=knobs.lattice, restarts=knobs.restarts)
        result: Dict[str, Any] = {
            "dims": m.dims, "value": best.value, "method": best.method, "error_bound": best.error_bound,
            "witness": best.factors, "nonnegative": m.nonnegative, "psd": m.psd, "product_form": m.product_form,
        }
        if m.nonnegative:
            result["lambda_max"] = lambda_max_nonneg(m.entries).value
        a, b = self.knob(config, "shift_a"), self.knob(config, "shift_b")
        status = SUCCESS
        if a is not None and b is not None:
            shift = hsep_shift_check(m, float(a), float(b), tolerance=knobs.tolerance, seed=seed)
            result["shift_check"] = shift
            if not shift["passed"]:
                status = VIOLATION
        logger.info(f"[sepval] dims={m.dims}: hsep={best.value:.8f} ({best.method})")
        return status, result


class MultCheckTool(BaseTool):
    """hsep(M (x) M') against hsep(M) hsep(M')"""

    def __init__(self, settings=None):
        super().__init__(
            name="mult-check",
            description="Multiplicativity of hsep under tensor products",
            settings=settings
        )

    def run(self, config: ExperimentConfig) -> Tuple[str, Dict[str, Any]]:
        if self.knob(config, "remark"):
            m1 = m2 = remark_matrix()
        else:
            m1 = self.load(config, "matrix", load_matrix)
            m2 = self.load(config, "matrix2", load_matrix) if "matrix2" in config.paths else m1
        report = check_multiplicativity(m1, m2, tolerance=self.settings.sepval.tolerance, seed=config.seed or 0)
        status = VIOLATION if report.verdict == "VIOLATION" else SUCCESS
        return status, dict(report.to_dict(), dims=[m1.dims, m2.dims])
