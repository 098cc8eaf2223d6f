"""
Moment oracles and the conditioning-then-rounding loop
"""

import math

import numpy as np
import pytest

from core.errors import InstanceError, PreconditionError
from core.sepval import PartitionedMatrix
from sosround.oracle import (
    MomentOracle,
    basis_mixture,
    condition,
    expected_value,
    load_oracle,
    pseudo_expectation,
    random_oracle,
    sphere_residual
)
from sosround.rounding import (
    bks_round_loop,
    chain_rule_terms,
    entropy_decrement_check,
    hellinger_joint_product,
    joint_array,
    joint_law,
    marginal_array,
    max_rounds
)


@pytest.fixture
def two_point():
    """Half e_0, half e_1 in R^3 at order 2"""
    return basis_mixture(3, 2, [0, 1], [0.5, 0.5])


@pytest.fixture
def flat():
    return PartitionedMatrix([3, 3], np.ones((9, 9)) / 9)


class TestOracle:
    """Mixtures of unit vectors"""

    def test_unit_vectors_required(self):
        with pytest.raises(InstanceError):
            MomentOracle(2, 2, np.ones(1), np.array([[1.0, 1.0]]))

    def test_weights_normalized(self):
        oracle = basis_mixture(2, 1, [0, 1], [1.0, 3.0])
        assert oracle.weights.tolist() == pytest.approx([0.25, 0.75])

    def test_moments(self, two_point):
        assert pseudo_expectation(two_point, []) == 1.0
        assert pseudo_expectation(two_point, [0, 0]) == pytest.approx(0.5)
        assert pseudo_expectation(two_point, [0, 1]) == 0.0

    def test_sphere_axiom(self):
        oracle = random_oracle(4, 2, 5, np.random.default_rng(3))
        for monomial in ([], [0], [1, 2], [3, 3, 0]):
            assert sphere_residual(oracle, monomial) == pytest.approx(0.0, abs=1e-12)

    def test_condition_reweights(self, two_point):
        pinned = condition(two_point, [0])
        assert pinned.components == 1
        assert marginal_array(pinned).tolist() == pytest.approx([1.0, 0.0, 0.0])
        with pytest.raises(PreconditionError):
            condition(two_point, [2])

    def test_load(self):
        oracle = load_oracle({"d": 2, "t": 2, "components": [{"w": 1, "v": [0.6, 0.8]}]})
        assert MomentOracle.single([0.6, 0.8], 2).to_dict() == oracle.to_dict()
        with pytest.raises(InstanceError):
            load_oracle({"d": 3, "t": 2, "components": [{"w": 1, "v": [0.6, 0.8]}]})

    def test_expected_value_order(self, two_point):
        with pytest.raises(PreconditionError):
            expected_value(PartitionedMatrix([3], np.eye(3)), two_point)


class TestLaws:
    """Joint laws, Hellinger distance and the KL chain rule"""

    def test_joint_is_diagonal(self, two_point):
        joint = joint_array(two_point)
        assert joint[0, 0] == pytest.approx(0.5)
        assert joint[0, 1] == 0.0

    def test_joint_law_of_basis_vector(self):
        law = joint_law(MomentOracle.single([1.0, 0.0, 0.0], 2))
        assert law.support == [(0, 0)]
        assert law[(0, 0)] == pytest.approx(1.0)

    def test_joint_law_of_mixture(self, two_point):
        law = joint_law(two_point)
        assert sorted(law.support) == [(0, 0), (1, 1)]
        assert law[(0, 0)] == pytest.approx(0.5)
        assert law[(1, 1)] == pytest.approx(0.5)
        assert law[(0, 1)] == 0

    def test_hellinger(self, two_point):
        expected = math.sqrt(1 - 2 * math.sqrt(0.5 * 0.25))
        assert hellinger_joint_product(two_point) == pytest.approx(expected)
        assert hellinger_joint_product(MomentOracle.single([0.6, 0.8], 3)) == pytest.approx(0.0, abs=1e-6)

    def test_parallel_joint_matches(self):
        oracle = random_oracle(3, 3, 6, np.random.default_rng(1))
        assert np.allclose(joint_array(oracle, workers=3), joint_array(oracle))

    def test_chain_rule(self, two_point):
        terms = chain_rule_terms(joint_array(two_point))
        assert terms["kl"] == pytest.approx(1.0)
        assert terms["mutual_informations"] == pytest.approx([0.0, 1.0])
        assert terms["total"] == pytest.approx(terms["kl"])


class TestDecrement:
    def test_decrement_and_pin(self, two_point):
        report = entropy_decrement_check(two_point, 2, 0.1)
        assert report.holds
        assert report.entropy == pytest.approx(1.0)
        assert report.conditional_entropy == pytest.approx(0.0, abs=1e-12)
        assert report.pin == (0,)

    def test_premise_must_hold(self):
        with pytest.raises(PreconditionError):
            entropy_decrement_check(MomentOracle.single([0.6, 0.8], 2), 2, 0.1)

    def test_needs_two_factors(self, two_point):
        with pytest.raises(PreconditionError):
            entropy_decrement_check(two_point, 1, 0.1)


class TestRoundLoop:
    """Condition until close to product, then round"""

    def test_one_pin_suffices(self, two_point, flat):
        result = bks_round_loop(flat, two_point, 0.5)
        assert result.rounds == 1
        assert result.trace[1]["pin"] == [0]
        assert result.x.tolist() == pytest.approx([1.0, 0.0, 0.0])
        assert result.value == pytest.approx(1 / 9)
        assert result.guarantee_holds

    def test_product_oracle_needs_no_rounds(self, flat):
        oracle = MomentOracle.single(np.ones(3) / math.sqrt(3), 2)
        result = bks_round_loop(flat, oracle, 0.1)
        assert result.rounds == 0
        assert result.value == pytest.approx(1.0)

    def test_max_rounds(self):
        assert max_rounds(4, 2, 0.5) == 9

    @pytest.mark.parametrize("matrix,epsilon", [
        (PartitionedMatrix([3, 3], -np.eye(9)), 0.5),
        (PartitionedMatrix([3, 3], np.ones((9, 9)) / 9), 0.0),
        (PartitionedMatrix([9], np.ones((9, 9)) / 9), 0.5),
    ])
    def test_preconditions(self, two_point, matrix, epsilon):
        with pytest.raises(PreconditionError):
            bks_round_loop(matrix, two_point, epsilon)
