"""
Acceptance Criteria
One tool per criterion of the suite battery; each reports PASS or FAIL with its measured values
"""

import math
from abc import abstractmethod
from fractions import Fraction
from itertools import product
from typing import Any, Dict, List, Tuple

import numpy as np
from loguru import logger

from cleancc.instance import CleanCcWitness, from_edges
from cleancc.verifier import acceptance as cleancc_acceptance
from cleancc.verifier import max_acceptance, no_instance_sweep, protocol6_construction, simulated_acceptance
from core.arith import ArithmeticMode, exact_equal, half
from core.revsim import identity, random_circuit
from core.sepval import PartitionedMatrix, check_multiplicativity, hsep, remark_matrix, tensor_partitioned
from core.settings import ExperimentConfig
from core.states import NonNegativeState, tensor, tensor_all
from core.verifier import (
    StoqVerifier,
    VerifierLayout,
    acceptance_probability,
    branch_overlap_acceptance,
    build_branch_overlap_verifier,
    gamma_form
)
from npcert.birthday import birthday_exact, birthday_mc
from npcert.instance import BranchDistribution, path, triangle
from npcert.protocol4 import default_prover_count, protocol4_acceptance
from npcert.protocol5 import minimize_protocol5_rejection, protocol5_rejection
from protocols.common import DyadicBranchPlan
from protocols.product_test import eta, product_test_acceptance, product_test_construction, product_test_value
from protocols.repetition import strong_conjunction_construction, weak_conjunction_construction
from protocols.symmetric import sym_projector_construction, symmetric_overlap
from rectclosure.instance import perfectly_agreeing_instance, random_instance, rectangle_value_max, sample_no_instance
from rectclosure.params import completeness_log_eps, round_bound
from rectclosure.tester import rect_closure_test, rect_closure_test_recursive, run_seed
from sosround.oracle import basis_mixture, expected_value, random_oracle, tensor_value
from sosround.rounding import chain_rule_terms, direct_round, entropy_decrement_check, hellinger_joint_product, joint_array
from utils.helpers import exact
from .base_tool import FAIL, PASS, BaseTool
from .np_tools import far_distribution

Checks = Dict[str, bool]
Measured = Dict[str, Any]

RATIONAL = ArithmeticMode.RATIONAL
FLOAT = ArithmeticMode.FLOAT


# Random inputs shared by the criteria

def random_unit_state(width: int, rng: np.random.Generator) -> NonNegativeState:
    vec = np.abs(rng.normal(size=1 << width))
    return NonNegativeState.from_vector(vec / np.linalg.norm(vec), FLOAT)


def random_subset_state(width: int, rng: np.random.Generator) -> NonNegativeState:
    size = 1 << width
    support = rng.choice(size, size=int(rng.integers(1, size + 1)), replace=False)
    return NonNegativeState.subset(width, support.tolist(), RATIONAL)


def random_verifier(rng: np.random.Generator, max_width: int = 10) -> StoqVerifier:
    while True:
        k, ell = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        n0, nplus = int(rng.integers(0, 3)), int(rng.integers(0, 3))
        width = k * ell + n0 + nplus
        if width <= max_width:
            break
    layout = VerifierLayout(k, ell, n0, nplus, int(rng.integers(width)))
    return StoqVerifier(random_circuit(width, int(rng.integers(1, 3 * width + 1)), rng), layout)


def random_psd_matrix(dims: List[int], rng: np.random.Generator) -> PartitionedMatrix:
    size = int(np.prod(dims))
    b = rng.random((size, size))
    a = b @ b.T
    return PartitionedMatrix(dims, a / np.linalg.eigvalsh(a).max())


def random_product_matrix(dims: List[int], rng: np.random.Generator) -> PartitionedMatrix:
    factors = []
    for d in dims:
        g = rng.random((d, d))
        factors.append((g + g.T) / 2)
    entries = factors[0]
    for f in factors[1:]:
        entries = np.kron(entries, f)
    return PartitionedMatrix(dims, entries, factors)


def random_nonnegative_operator(d: int, t: int, rng: np.random.Generator) -> PartitionedMatrix:
    size = d ** t
    g = rng.random((size, size))
    a = (g + g.T) / 2
    return PartitionedMatrix([d] * t, a / np.abs(np.linalg.eigvalsh(a)).max())


class CriterionTool(BaseTool):
    """Criterion base: measure() returns named checks plus the values behind them"""

    criterion: str = ""
    summary: str = ""

    def __init__(self, settings=None):
        super().__init__(name=f"criterion:{self.criterion}", description=self.summary, settings=settings)

    @abstractmethod
    def measure(self, seed: int, config: ExperimentConfig) -> Tuple[Checks, Measured]:
        pass

    def run(self, config: ExperimentConfig) -> Tuple[str, Dict[str, Any]]:
        seed = config.seed if config.seed is not None else self.settings.suite.seed
        checks, measured = self.measure(seed, config)
        status = PASS if all(checks.values()) else FAIL
        if status == FAIL:
            failed = [name for name, ok in checks.items() if not ok]
            logger.warning(f"[Criterion] {self.criterion} failed: {', '.join(failed)}")
        return status, {"criterion": self.criterion, "summary": self.summary, "checks": checks,
                        "measured": measured, "seed": seed}


class MultiplicativityCriterion(CriterionTool):
    criterion = "multiplicativity"
    summary = "hsep is not multiplicative on |00><11| + |11><00|, but is on PSD and product-form pairs"

    def measure(self, seed: int, config: ExperimentConfig) -> Tuple[Checks, Measured]:
        knobs = self.settings.sepval
        m = remark_matrix()
        value = hsep(m, seed=seed, grid=knobs.grid, lattice=knobs.lattice, restarts=knobs.restarts).value
        squared = hsep(tensor_partitioned(m, m), seed=seed, restarts=knobs.restarts).value
        rng = np.random.default_rng(seed)
        verdicts: Dict[str, List[str]] = {"psd": [], "product": []}
        worst = 0.0
        for i in range(self.settings.suite.random_pairs):
            for kind, make in (("psd", random_psd_matrix), ("product", random_product_matrix)):
                report = check_multiplicativity(make([2, 2], rng), make([2, 2], rng),
                                                tolerance=knobs.tolerance, seed=seed + i)
                verdicts[kind].append(report.verdict)
                worst = max(worst, abs(report.lhs - report.rhs))
        checks = {
            "remark_value": abs(value - 0.5) <= 1e-6,
            "tensor_square_exceeds": squared >= 0.5 - 1e-6 and squared > 0.25,
            "psd_pairs_equal": all(v == "EQUAL" for v in verdicts["psd"]),
            "product_pairs_equal": all(v == "EQUAL" for v in verdicts["product"]),
        }
        measured = {"hsep": value, "hsep_tensor_square": squared, "product_of_values": value * value,
                    "pairs": {kind: len(v) for kind, v in verdicts.items()}, "worst_pair_difference": worst}
        return checks, measured


class BranchOverlapCriterion(CriterionTool):
    criterion = "branch_overlap"
    summary = "acceptance of V equals the (Gamma, I) branch-overlap acceptance exactly"

    def measure(self, seed: int, config: ExperimentConfig) -> Tuple[Checks, Measured]:
        rng = np.random.default_rng(seed)
        mismatches: List[int] = []
        count = self.settings.suite.random_verifiers
        for i in range(count):
            v = random_verifier(rng)
            witness = tensor_all([random_subset_state(v.ell, rng) for _ in range(v.k)])
            direct = acceptance_probability(v, witness, RATIONAL)
            gamma = gamma_form(v)
            overlap = branch_overlap_acceptance(identity(v.layout.width), gamma, witness, v.layout, RATIONAL)
            explicit = build_branch_overlap_verifier(identity(v.layout.width), gamma, v.layout)
            wrapped = acceptance_probability(explicit, witness, RATIONAL)
            if not (exact_equal(direct, overlap) and exact_equal(direct, wrapped)):
                mismatches.append(i)
        return {"exact_equality": not mismatches}, {"verifiers": count, "mismatches": mismatches}


class ProductTestCriterion(CriterionTool):
    criterion = "product_test"
    summary = "product test circuit equals 1/2 + 1/2 P_prod; Bell input gives 7/8; P_prod <= 1 - eta/3"

    SUPPORTS = ([0], [3], [0, 1], [0, 2], [0, 3], [1, 2], [1, 2, 3], [0, 1, 2, 3])

    def measure(self, seed: int, config: ExperimentConfig) -> Tuple[Checks, Measured]:
        k, ell = 2, 1
        construction = product_test_construction(k, ell)
        grid = [NonNegativeState.subset(k * ell, s, RATIONAL) for s in self.SUPPORTS]
        grid_mismatches = 0
        for rho, sigma in product(grid, grid):
            circuit = construction.acceptance(tensor(rho, sigma), RATIONAL)
            if not exact_equal(circuit, product_test_acceptance(rho, sigma, k, ell, RATIONAL)):
                grid_mismatches += 1

        bell = NonNegativeState.subset(k * ell, [0, 3], RATIONAL)
        bell_circuit = construction.acceptance(tensor(bell, bell), RATIONAL)
        bell_formula = product_test_acceptance(bell, bell, k, ell, RATIONAL)

        rng = np.random.default_rng(seed)
        worst_slack = math.inf
        for i in range(self.settings.suite.random_states):
            rho = random_unit_state(k * ell, rng)
            bound = eta(rho, k, ell, restarts=self.settings.sepval.restarts, seed=seed + i)
            worst_slack = min(worst_slack, 1 - bound.eta / 3 - float(product_test_value(rho, rho, k, ell, FLOAT)))
        checks = {
            "grid_exact": grid_mismatches == 0,
            "bell_seven_eighths": exact_equal(bell_circuit, Fraction(7, 8)) and exact_equal(bell_formula, Fraction(7, 8)),
            "eta_bound": worst_slack >= -1e-9,
        }
        measured = {"grid_pairs": len(grid) ** 2, "grid_mismatches": grid_mismatches,
                    "bell_acceptance": exact(bell_circuit), "eta_worst_slack": worst_slack}
        return checks, measured


class SymmetricProjectorCriterion(CriterionTool):
    criterion = "symmetric_projector"
    summary = "dyadic symmetric projector accepts tensor powers with certainty and stays within zeta"

    CASES = [(k, b) for k in (2, 3) for b in (0, 1, 2)]

    def measure(self, seed: int, config: ExperimentConfig) -> Tuple[Checks, Measured]:
        rng = np.random.default_rng(seed)
        powers_ok, within_ok = True, True
        rows = []
        singles = [NonNegativeState.subset(1, s, RATIONAL) for s in ([0], [1], [0, 1])]
        for k, b in self.CASES:
            construction = sym_projector_construction(k, 1, b)
            zeta = DyadicBranchPlan(k, b).zeta
            for psi in singles:
                if not exact_equal(construction.acceptance(tensor_all([psi] * k), RATIONAL), 1):
                    powers_ok = False
            worst = 0.0
            for _ in range(self.settings.suite.random_states):
                phi = random_unit_state(k, rng)
                ideal = 0.5 + 0.5 * float(symmetric_overlap(phi, k, 1, FLOAT))
                worst = max(worst, abs(float(construction.acceptance(phi, FLOAT)) - ideal))
            within_ok = within_ok and worst <= float(zeta) + 1e-9
            rows.append({"k": k, "b": b, "zeta": str(zeta), "worst_deviation": worst})
        return {"tensor_powers_accepted": powers_ok, "deviation_within_zeta": within_ok}, {"cases": rows}


class Protocol5Criterion(CriterionTool):
    criterion = "protocol5"
    summary = "honest rejection is exactly 1/(2n); the unsatisfiable Q=2 triangle stays 0.01/n above it"

    def measure(self, seed: int, config: ExperimentConfig) -> Tuple[Checks, Measured]:
        honest = {}
        for n in (2, 3, 4):
            instance = path(n, 2)
            value = protocol5_rejection(instance, BranchDistribution.honest(instance, [0] * n))
            honest[n] = value
        knobs = self.settings.npcert
        tri = triangle(2, equal=False, eta=Fraction(1, 3))
        best = minimize_protocol5_rejection(tri, restarts=knobs.minimize_restarts, grid=knobs.minimize_grid, seed=seed)
        excess = best.value - 1 / (2 * tri.n)
        checks = {
            "honest_exact": all(exact_equal(v, Fraction(1, 2 * n)) for n, v in honest.items()),
            "triangle_gap": excess >= 0.01 / tri.n,
        }
        measured = {"honest_rejection": {str(n): exact(v) for n, v in honest.items()},
                    "triangle_min_rejection": best.value, "triangle_excess": excess, "starts": best.starts}
        return checks, measured


class Protocol4Criterion(CriterionTool):
    criterion = "protocol4"
    summary = "K = C sqrt(n) provers accept the honest witness and reject a far vertex marginal"

    def measure(self, seed: int, config: ExperimentConfig) -> Tuple[Checks, Measured]:
        knobs, suite = self.settings.npcert, self.settings.suite
        n = suite.np4_vertices
        instance = path(n, 2)
        k = default_prover_count(n, knobs.paninski_constant)
        delta = Fraction(knobs.uniformity_delta)
        labeling = [0] * n
        runs = {}
        for name, dist in (("honest", BranchDistribution.honest(instance, labeling)),
                           ("far", far_distribution(instance, labeling))):
            runs[name] = protocol4_acceptance(instance, dist, k, delta, trials=suite.np4_trials, seed=seed,
                                              workers=config.workers, exact_cap=knobs.exact_branch_cap)
        checks = {"honest_accepts": runs["honest"].ci_low >= 0.9, "far_rejects": runs["far"].ci_high <= 0.1,
                  "fewer_provers_than_vertices": k < n}
        measured = {"n": n, "K": k, "delta": str(delta), "trials": suite.np4_trials,
                    "honest": runs["honest"].to_dict(), "far": runs["far"].to_dict()}
        return checks, measured


class BirthdayCriterion(CriterionTool):
    criterion = "birthday"
    summary = "23 uniform samples over 365 collide with probability 0.5073"

    def measure(self, seed: int, config: ExperimentConfig) -> Tuple[Checks, Measured]:
        n, k, trials = 365, 23, self.settings.suite.birthday_trials
        oracle = birthday_exact(n, k)
        estimate = birthday_mc(n, np.full(n, 1.0 / n), k=k, trials=trials, seed=seed, workers=config.workers)
        checks = {"oracle_value": abs(float(oracle) - 0.5073) <= 5e-5,
                  "monte_carlo_close": abs(estimate.value - float(oracle)) <= 0.01}
        return checks, {"exact": exact(oracle), "estimate": estimate.to_dict()}


class RectClosureCriterion(CriterionTool):
    criterion = "rect"
    summary = "closure test accepts agreeing instances, rejects certified no instances with (1+gamma) growth"

    GAMMA = 0.5
    NO_INSTANCES = 5
    EQUIVALENCE_ROUNDS = 4

    def measure(self, seed: int, config: ExperimentConfig) -> Tuple[Checks, Measured]:
        rng = np.random.default_rng(seed)
        gamma = self.GAMMA
        agreeing = {}
        for ell in (1, 2, 3):
            side = 1 << ell
            instance = perfectly_agreeing_instance(ell, 1, 1, list(range(max(1, side // 2))), [side - 1])
            agreeing[ell] = rect_closure_test(instance, gamma).verdict

        no_rows = []
        for _ in range(self.NO_INSTANCES):
            instance, certificate, attempts = sample_no_instance(2, gamma, rng, seed=seed)
            value, _ = rectangle_value_max(instance)
            verdict = rect_closure_test(instance, gamma)
            rounds = verdict.params.rounds
            worst_growth = math.inf
            for a0 in range(instance.side):
                for b0 in range(instance.side):
                    sizes = run_seed(instance, a0, b0, rounds).sizes
                    for (s1, t1), (s2, t2) in zip(sizes, sizes[1:]):
                        worst_growth = min(worst_growth, (s2 * t2) / (s1 * t1))
            no_rows.append({"hsep": certificate.to_dict(), "attempts": attempts, "rectangle_value_max": value,
                            "verdict": verdict.verdict, "worst_growth": worst_growth})

        disagreements = 0
        for _ in range(self.settings.suite.rect_random_instances):
            instance = random_instance(2, 1, 1, int(rng.integers(2, 12)), rng)
            table = rect_closure_test(instance, gamma, self.EQUIVALENCE_ROUNDS)
            recursive = rect_closure_test_recursive(instance, gamma, self.EQUIVALENCE_ROUNDS)
            disagreements += table.verdict != recursive.verdict

        checks = {
            "agreeing_accept": all(v == "ACCEPT" for v in agreeing.values()),
            "no_instances_certified": all(r["hsep"]["certified"] for r in no_rows),
            "rectangles_below_hsep": all(r["rectangle_value_max"] <= r["hsep"]["upper"] + 1e-9 for r in no_rows),
            "no_instances_reject": all(r["verdict"] == "REJECT" for r in no_rows),
            "growth_per_good_round": all(r["worst_growth"] >= 1 + gamma - 1e-12 for r in no_rows),
            "recursive_matches_table": disagreements == 0,
            "round_bound": round_bound(2, 0.5) == 10,
            "completeness_eps": completeness_log_eps(1, 0, 1) == -15,
        }
        measured = {"agreeing": {str(ell): v for ell, v in agreeing.items()}, "no_instances": no_rows,
                    "equivalence_disagreements": disagreements, "L(2, 0.5)": round_bound(2, 0.5),
                    "log2_eps(1, 0, 1)": completeness_log_eps(1, 0, 1)}
        return checks, measured


class CleanccCriterion(CriterionTool):
    criterion = "cleancc"
    summary = "clean components are accepted with certainty and no instances stay below the bound"

    def measure(self, seed: int, config: ExperimentConfig) -> Tuple[Checks, Measured]:
        yes_instances = [
            from_edges(1, 1, [], []),
            from_edges(2, 2, [(0, 1), (2, 3)], [3]),
            from_edges(3, 2, [(0, 1), (1, 2), (4, 5)], [4, 6, 7]),
        ]
        yes_values = [max_acceptance(inst) for inst in yes_instances]

        knobs = self.settings.cleancc
        sweep = no_instance_sweep(knobs.sweep_n, knobs.sweep_dG)

        k2 = from_edges(1, 1, [(0, 1)], [1])
        k2_value = max_acceptance(k2).value
        k2_expected = 0.5 + 0.5 * (1 + math.sqrt(5)) / 4

        rng = np.random.default_rng(seed)
        formula_instances = [k2, from_edges(2, 2, [(0, 1), (1, 2), (2, 3)], [0]),
                             from_edges(3, 2, [(0, 1), (1, 2), (2, 3), (5, 6)], [3, 7])]
        mismatches = 0
        compared = 0
        for inst in formula_instances:
            construction = protocol6_construction(inst)
            for _ in range(3):
                support = rng.choice(inst.size, size=int(rng.integers(1, inst.size + 1)), replace=False)
                witness = CleanCcWitness.subset(inst.size, sorted(support.tolist()), RATIONAL)
                compared += 1
                if not exact_equal(cleancc_acceptance(inst, witness),
                                   simulated_acceptance(inst, witness, construction)):
                    mismatches += 1
        checks = {
            "yes_exactly_one": all(r.exact == 1 for r in yes_values),
            "no_instance_bound": sweep.holds,
            "k2_value": abs(k2_value - k2_expected) <= 1e-10,
            "formula_matches_circuit": mismatches == 0,
        }
        measured = {"yes_values": [str(r.exact) for r in yes_values], "sweep": sweep.to_dict(),
                    "k2_value": k2_value, "k2_expected": k2_expected, "witnesses_compared": compared,
                    "mismatches": mismatches}
        return checks, measured


class SosCriterion(CriterionTool):
    criterion = "sos"
    summary = "direct rounding loses at most 2 sqrt(2) delta; conditioning decrements entropy"

    CASES = [(2, 2), (3, 2), (4, 2), (2, 3), (3, 3)]

    def measure(self, seed: int, config: ExperimentConfig) -> Tuple[Checks, Measured]:
        rng = np.random.default_rng(seed)
        worst_rounding = math.inf
        for _ in range(self.settings.suite.sos_pairs):
            d, t = self.CASES[int(rng.integers(len(self.CASES)))]
            oracle = random_oracle(d, t, int(rng.integers(1, 4)), rng)
            m = random_nonnegative_operator(d, t, rng)
            delta = hellinger_joint_product(oracle, t)
            slack = tensor_value(m, direct_round(oracle)) - expected_value(m, oracle) + 2 * math.sqrt(2) * delta
            worst_rounding = min(worst_rounding, slack)

        decrements = []
        chain_gap = 0.0
        for d, t in self.CASES:
            weights = rng.dirichlet(np.ones(d))
            for oracle in (basis_mixture(d, t, list(range(d)), weights),
                           random_oracle(d, t, 3, rng, nonnegative=True)):
                chain = chain_rule_terms(joint_array(oracle, t))
                chain_gap = max(chain_gap, abs(chain["total"] - chain["kl"]))
                h = hellinger_joint_product(oracle, t)
                if h <= 1e-6:
                    continue
                report = entropy_decrement_check(oracle, t, 0.9 * h)
                decrements.append({"d": d, "t": t, "holds": report.holds, "decrement": report.decrement,
                                   "required": report.required})

        worked = basis_mixture(2, 2, [0, 1], [0.5, 0.5])
        h = hellinger_joint_product(worked, 2)
        worked_report = entropy_decrement_check(worked, 2, 0.54)
        checks = {
            "rounding_guarantee": worst_rounding >= -1e-9,
            "entropy_decrement": bool(decrements) and all(r["holds"] for r in decrements),
            "chain_rule": chain_gap <= 1e-10,
            "worked_hellinger": abs(h * h - (1 - 1 / math.sqrt(2))) <= 1e-10,
            "worked_decrement": abs(worked_report.decrement - 1.0) <= 1e-10,
        }
        measured = {"worst_rounding_slack": worst_rounding, "decrements": decrements, "chain_rule_gap": chain_gap,
                    "worked_hellinger_squared": h * h, "worked_decrement": worked_report.decrement}
        return checks, measured


class ConjunctionCriterion(CriterionTool):
    criterion = "conjunction"
    summary = "weak and strong conjunctions follow their product-witness laws exactly"

    PAIRS = 6

    def measure(self, seed: int, config: ExperimentConfig) -> Tuple[Checks, Measured]:
        rng = np.random.default_rng(seed)
        one_half = half(RATIONAL)
        weak_bad = strong_bad = compared = 0
        for _ in range(self.PAIRS):
            verifiers = [StoqVerifier(random_circuit(3, int(rng.integers(2, 9)), rng),
                                      VerifierLayout(1, 1, 1, 1, int(rng.integers(3)))) for _ in range(2)]
            weak = weak_conjunction_construction(verifiers)
            strong = strong_conjunction_construction(verifiers)
            for supports in product(([0], [1], [0, 1]), repeat=2):
                witnesses = [NonNegativeState.subset(1, s, RATIONAL) for s in supports]
                p = [acceptance_probability(v, w, RATIONAL) for v, w in zip(verifiers, witnesses)]
                joint = tensor_all(witnesses)
                compared += 1
                if not exact_equal(weak.acceptance(joint, RATIONAL), one_half + one_half * p[0] * p[1]):
                    weak_bad += 1
                strong_law = one_half + one_half * (2 * p[0] - 1) * (2 * p[1] - 1)
                if not exact_equal(strong.acceptance(joint, RATIONAL), strong_law):
                    strong_bad += 1
        checks = {"weak_law": weak_bad == 0, "strong_law": strong_bad == 0}
        return checks, {"witness_pairs": compared, "weak_mismatches": weak_bad, "strong_mismatches": strong_bad}


CRITERIA: Dict[str, type] = {
    tool.criterion: tool for tool in (
        MultiplicativityCriterion,
        BranchOverlapCriterion,
        ProductTestCriterion,
        SymmetricProjectorCriterion,
        Protocol5Criterion,
        Protocol4Criterion,
        BirthdayCriterion,
        RectClosureCriterion,
        CleanccCriterion,
        SosCriterion,
        ConjunctionCriterion,
    )
}
