"""
Verifier-to-verifier constructions: product test, symmetrization, compression and repetition
"""

from fractions import Fraction

import numpy as np
import pytest
import sympy

from core.arith import ArithmeticMode, exact_equal
from core.errors import InstanceError, PreconditionError
from core.revsim import ReversibleCircuit
from core.states import NonNegativeState, tensor, tensor_all
from core.verifier import StoqVerifier, Thresholds, VerifierLayout, acceptance_probability
from protocols.common import DyadicBranchPlan, balanced_map, dyadic_floor, dyadic_weight
from protocols.compression import CompressionParams, compression_acceptance, compression_construction
from protocols.matching import matching_probability, matching_success_rate, perfect_matching
from protocols.product_test import product_test_acceptance, product_test_construction, product_test_value
from protocols.repetition import (
    error_reduction_gap,
    repetition_count,
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
    symmetrization_acceptance
)

RATIONAL = ArithmeticMode.RATIONAL
FLOAT = ArithmeticMode.FLOAT
HALF = sympy.Rational(1, 2)


def x_verifier(k: int) -> StoqVerifier:
    """Identity circuit with prover 0's qubit as output: Gamma = X_0"""
    layout = VerifierLayout(k, 1, 0, 0, 0)
    return StoqVerifier(ReversibleCircuit(layout.width, ()), layout)


@pytest.fixture
def tilted():
    return NonNegativeState(1, {0: "3/5", 1: "4/5"}, RATIONAL)


@pytest.fixture
def plus():
    return NonNegativeState.plus(1, RATIONAL)


@pytest.fixture
def zero():
    return NonNegativeState.basis(1, 0, RATIONAL)


class TestDyadic:
    """Dyadic weights and branch plans"""

    def test_floor_truncates(self):
        weight = dyadic_floor(Fraction(1, 3), 4)
        assert weight.value == Fraction(5, 16)
        assert weight.truncation == Fraction(1, 48)

    def test_floor_reduces_to_lowest_terms(self):
        weight = dyadic_floor(Fraction(1, 2), 8)
        assert (weight.numerator, weight.bits) == (1, 1)

    def test_vanishing_weight(self):
        with pytest.raises(PreconditionError):
            dyadic_floor(Fraction(1, 1000), 2)
        assert dyadic_weight(Fraction(1, 1000), 2).value > 0

    @pytest.mark.parametrize("k,b,q,r,zeta", [
        (2, 0, 1, 0, Fraction(0)),
        (3, 0, 3, 2, Fraction(1, 6)),
        (3, 1, 4, 4, Fraction(1, 12)),
    ])
    def test_branch_plan(self, k, b, q, r, zeta):
        plan = DyadicBranchPlan(k, b)
        assert (plan.q, plan.r, plan.zeta) == (q, r, zeta)
        assert sum(plan.weights()) == 1

    def test_balanced_map(self):
        counts = np.bincount([balanced_map(j, 6, 8) for j in range(8)], minlength=6)
        assert counts.tolist() == [2, 2, 1, 1, 1, 1]


class TestProductTest:
    """Acceptance 1/2 + 1/2 P_prod"""

    def test_product_state_always_accepted(self, plus, tilted):
        rho = tensor(plus, tilted)
        assert exact_equal(product_test_value(rho, rho, 2, 1), 1)
        assert exact_equal(product_test_acceptance(rho, rho, 2, 1), 1)

    def test_bell_state(self):
        bell = NonNegativeState.subset(2, [0, 3], RATIONAL)
        assert exact_equal(product_test_acceptance(bell, bell, 2, 1), sympy.Rational(7, 8))
        construction = product_test_construction(2, 1)
        assert exact_equal(construction.acceptance(tensor(bell, bell)), sympy.Rational(7, 8))

    def test_circuit_matches_formula(self, plus, tilted, zero):
        construction = product_test_construction(2, 1)
        rho = NonNegativeState.subset(2, [0, 1, 3], RATIONAL)
        sigma = tensor(tilted, zero)
        for a, b in [(rho, sigma), (sigma, rho), (rho, rho)]:
            assert exact_equal(construction.acceptance(tensor(a, b)), product_test_acceptance(a, b, 2, 1))

    def test_width_checked(self, plus):
        with pytest.raises(InstanceError):
            product_test_value(plus, plus, 2, 1)

    def test_cross_term_below_average(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            rho, sigma = (NonNegativeState.from_vector(v / np.linalg.norm(v)) for v in rng.random((2, 16)) + 0.01)
            cross = product_test_value(rho, sigma, 2, 2, FLOAT)
            own = product_test_value(rho, rho, 2, 2, FLOAT) + product_test_value(sigma, sigma, 2, 2, FLOAT)
            assert float(cross) <= float(own) / 2 + 1e-12


class TestSymmetricProjector:
    """Tensor powers are accepted with certainty; other inputs stay within zeta"""

    @pytest.mark.parametrize("k,b", [(2, 0), (2, 1), (3, 0)])
    def test_tensor_power(self, tilted, k, b):
        construction = sym_projector_construction(k, 1, b)
        assert exact_equal(construction.acceptance(tensor_all([tilted] * k)), 1)

    def test_dyadic_value_and_deviation(self, plus, tilted, zero):
        phi = tensor_all([plus, tilted, zero])
        plan = DyadicBranchPlan(3, 0)
        construction = sym_projector_construction(3, 1, 0)
        circuit = construction.acceptance(phi)
        assert exact_equal(circuit, sym_projector_value(phi, plan, 1))
        ideal = HALF + HALF * symmetric_overlap(phi, 3, 1)
        assert abs(float(circuit) - float(ideal)) <= float(plan.zeta) + 1e-12

    def test_closeness_of_identical_factors(self, tilted):
        result = symmetric_closeness_bound([tilted, tilted, tilted])
        assert result.bound == pytest.approx(0.0, abs=1e-9)

    def test_sym_to_stoq_keeps_completeness(self, plus):
        construction = sym_to_stoq_construction(x_verifier(2), Thresholds(1, Fraction(1, 2)))
        assert construction.params["completeness"] == "1"
        assert exact_equal(construction.acceptance(tensor(plus, plus)), 1)


class TestMatching:
    """Hopcroft-Karp matchings and the exact matching probability"""

    def test_hall_violator(self):
        result = perfect_matching({0: [0], 1: [0], 2: [1, 2]})
        assert not result.perfect
        assert result.violator == {0, 1}

    def test_perfect(self):
        assert perfect_matching({0: [0, 1], 1: [0]}).matching == {0: 1, 1: 0}

    @pytest.mark.parametrize("k,r,expected", [(1, 1, Fraction(1)), (2, 1, Fraction(1, 2)), (2, 2, Fraction(7, 8))])
    def test_probability(self, k, r, expected):
        assert matching_probability(k, r) == expected

    def test_success_rate_is_seeded(self):
        first = matching_success_rate(5, 3, 200, seed=3)
        assert first == matching_success_rate(5, 3, 200, seed=3)
        assert 0.0 <= first["rate"] <= 1.0


class TestSymmetrization:
    """Label-table evaluation matches p_match A_V + (1 - p_match) A_dummy"""

    def test_honest_bundles(self, plus, zero):
        v = x_verifier(2)
        plan = SymmetrizationPlan.default(2, 1, Thresholds(1, Fraction(1, 2)), bundles=1)
        assert plan.realized_dummy == Fraction(1, 2)
        a_v = acceptance_probability(v, tensor_all([plus, zero]))
        analytic = symmetrization_acceptance(plan, a_v)
        assert analytic == Fraction(3, 4)
        honest = honest_symmetric_witness(plan, [plus, zero])
        assert exact_equal(branch_acceptance(plan, v, honest), sympy.Rational(3, 4))

    def test_dummy_range(self):
        with pytest.raises(PreconditionError):
            SymmetrizationPlan(2, 1, 1, Fraction(1, 4))


class TestCompression:
    """k provers to two"""

    def test_needs_more_than_two_provers(self):
        with pytest.raises(PreconditionError):
            compression_construction(x_verifier(2), Thresholds(1, Fraction(1, 2)))

    def test_lambda(self):
        params = CompressionParams.create(Thresholds(1, Fraction(1, 2)))
        assert params.lam == Fraction(5, 128)
        assert params.completeness(Fraction(1)) == 1

    def test_circuit_matches_mixture(self, plus, tilted, zero):
        v = x_verifier(3)
        thresholds = Thresholds(1, Fraction(1, 2))
        construction = compression_construction(v, thresholds, lambda_override=Fraction(1, 4))
        rho = tensor_all([tilted, plus, zero])
        sigma = tensor_all([plus, plus, zero])
        analytic = compression_acceptance(v, rho, sigma, Fraction(1, 4))
        assert exact_equal(construction.acceptance(tensor(rho, sigma)), analytic)


class TestRepetition:
    """Weak and strong conjunction laws on product witnesses"""

    def test_weak_law(self, tilted):
        v = x_verifier(1)
        p = acceptance_probability(v, tilted)
        assert p == sympy.Rational(49, 50)
        construction = weak_conjunction_construction([v, v])
        assert exact_equal(construction.acceptance(tensor(tilted, tilted)), HALF + HALF * p ** 2)

    def test_strong_law(self, tilted):
        v = x_verifier(1)
        p = acceptance_probability(v, tilted)
        construction = strong_conjunction_construction([v, v, v])
        assert exact_equal(construction.acceptance(tensor_all([tilted] * 3)), HALF + HALF * (2 * p - 1) ** 3)

    def test_common_block_size(self):
        other = StoqVerifier(ReversibleCircuit(2, ()), VerifierLayout(1, 2, 0, 0, 0))
        with pytest.raises(InstanceError):
            weak_conjunction_construction([x_verifier(1), other])

    def test_thresholds(self):
        assert weak_repetition_thresholds(Fraction(1, 3), 0, 1) == (Fraction(5, 6), Fraction(3, 4))
        assert error_reduction_gap(Fraction(1, 2), 0, 1) == Fraction(1, 4)
        assert repetition_count(10, 0) == 10
