"""
Constraint-graph certification: instances, predicates, both protocols and birthday bounds
"""

from fractions import Fraction

import numpy as np
import pytest

from core.arith import exact_equal
from core.errors import InstanceError, PreconditionError
from core.settings import Settings
from core.states import tensor, tensor_all
from npcert.birthday import bad_pair_weight, birthday_exact, birthday_mc
from npcert.instance import (
    BranchDistribution,
    GapCGInstance,
    branch_state,
    decode,
    encode,
    honest_witness,
    load_instance,
    path,
    register_widths,
    triangle
)
from npcert.predicates import collision_count, consistency_violation, paninski_threshold
from npcert.protocol4 import (
    default_prover_count,
    protocol4_acceptance,
    protocol4_construction,
    protocol4_exact,
    stoquastic_acceptance
)
from npcert.protocol5 import (
    minimize_protocol5_rejection,
    protocol5_acceptance,
    protocol5_construction,
    protocol5_rejection,
    protocol5_soundness_floor
)
from npcert.sampling import wilson_interval


@pytest.fixture
def edge():
    return path(2)


class TestInstance:
    """GapCG validation and encodings"""

    def test_self_loop_rejected(self):
        with pytest.raises(InstanceError):
            GapCGInstance(2, 1, 2, {(0, 0): [(0, 0)]})

    def test_label_outside_alphabet(self):
        with pytest.raises(InstanceError):
            GapCGInstance(2, 1, 2, {(0, 1): [(0, 2)]})

    def test_degree_bound(self):
        with pytest.raises(InstanceError):
            GapCGInstance(3, 1, 2, {(0, 1): [(0, 0)], (0, 2): [(0, 0)]})

    def test_reverse_orientation_is_transposed(self):
        inst = GapCGInstance(2, 1, 2, {(1, 0): [(0, 1)]})
        assert inst.relations == {(0, 1): frozenset({(1, 0)})}
        assert inst.allows(1, 0, 0, 1)
        assert not inst.allows(0, 0, 1, 1)

    def test_violated_edge(self):
        assert triangle().violated_edge([0, 0, 1]) == (0, 2)
        with pytest.raises(PreconditionError, match=r"\(0, 2\)"):
            honest_witness(triangle(), [0, 0, 1])

    def test_load_malformed(self):
        with pytest.raises(InstanceError):
            load_instance({"vertices": 2, "edges": [{"u": 0, "v": 1, "relation": [[0, 0]]}]})

    def test_encoding(self):
        inst = triangle(q=2)
        assert register_widths(inst) == (2, 1)
        assert decode(inst, encode(inst, 2, 1)) == (2, 1)
        assert decode(inst, 3) is None

    def test_plurality_and_ambiguity(self, edge):
        dist = BranchDistribution(edge, {(0, 0): Fraction(1, 4), (0, 1): Fraction(1, 8), (1, 1): Fraction(5, 8)})
        assert dist.plurality(0) == 0
        assert exact_equal(dist.ambiguity(0), Fraction(1, 3))
        with pytest.raises(PreconditionError):
            BranchDistribution.point(edge, 0, 0).conditional(1)


class TestPredicates:
    def test_collisions(self):
        assert collision_count([1, 1, 2, 1]) == 3

    def test_paninski_threshold(self):
        assert paninski_threshold(4, 2) == Fraction(27, 8)

    def test_consistency_violation(self):
        assert consistency_violation([(0, 0), (1, 1)], triangle()) == ((0, 0), (1, 1))
        assert consistency_violation([(0, 0), (0, 1)], triangle()) == ((0, 0), (0, 1))
        assert consistency_violation([(0, 1), (2, 1)], triangle()) is None


class TestProtocol5:
    """Two registers, uniformity or consistency"""

    def test_honest_rejection_is_one_over_2n(self, edge):
        dist = BranchDistribution.honest(edge, [0, 0])
        assert exact_equal(protocol5_rejection(edge, dist), Fraction(1, 4))
        assert exact_equal(protocol5_acceptance(edge, dist), Fraction(7, 8))

    @pytest.mark.parametrize("labels", [None, [1, 1]])
    def test_circuit_matches_formula(self, edge, labels):
        dist = BranchDistribution.uniform(edge) if labels is None else BranchDistribution.honest(edge, labels)
        state = branch_state(dist)
        construction = protocol5_construction(edge)
        assert exact_equal(construction.acceptance(tensor(state, state)), protocol5_acceptance(edge, dist))

    def test_minimum_on_satisfiable_instance(self, edge):
        result = minimize_protocol5_rejection(edge, restarts=4)
        assert result.value == pytest.approx(0.25, abs=1e-9)

    def test_soundness_floor(self):
        inst = triangle(q=2, equal=False, eta=Fraction(1, 3))
        assert protocol5_soundness_floor(inst) > Fraction(1, 6)

    def test_uniformity_identity_and_floor(self):
        rng = np.random.default_rng(21)
        inst = triangle(q=2)
        n = inst.n
        for _ in range(50):
            dist = BranchDistribution.from_vector(inst, rng.random(len(inst.pairs())) + 0.01)
            q = dist.marginal()
            uniformity = 0.5 * sum(float(q[u]) ** 2 for u in range(n))
            spread = 0.5 * sum((float(q[u]) - 1 / n) ** 2 for u in range(n))
            assert uniformity == pytest.approx(1 / (2 * n) + spread, abs=1e-12)
            assert float(protocol5_rejection(inst, dist)) >= uniformity - 1e-12
            assert uniformity >= 1 / (2 * n) - 1e-12


class TestProtocol4:
    """K registers, collision test plus consistency"""

    def test_exact_on_an_edge(self, edge):
        dist = BranchDistribution.honest(edge, [0, 0])
        assert exact_equal(protocol4_exact(edge, dist, 2), Fraction(1, 2))
        estimate = protocol4_acceptance(edge, dist, 2)
        assert estimate.exact and estimate.value == pytest.approx(0.5)

    def test_circuit_matches_exact(self, edge):
        dist = BranchDistribution.honest(edge, [1, 1])
        state = branch_state(dist)
        construction = protocol4_construction(edge, 2)
        expected = stoquastic_acceptance(protocol4_exact(edge, dist, 2))
        assert exact_equal(construction.acceptance(tensor_all([state, state])), expected)

    def test_monte_carlo_is_worker_independent(self, edge):
        dist = BranchDistribution.uniform(edge)
        one = protocol4_acceptance(edge, dist, 3, trials=25_000, seed=5, workers=1, exact_cap=0)
        three = protocol4_acceptance(edge, dist, 3, trials=25_000, seed=5, workers=3, exact_cap=0)
        assert not one.exact
        assert one.value == three.value

    def test_prover_count(self):
        assert default_prover_count(4) == 38

    def test_suite_size_keeps_provers_below_vertices(self):
        settings = Settings()
        n = settings.suite.np4_vertices
        assert default_prover_count(n, settings.npcert.paninski_constant) < n
        assert default_prover_count(400) == 380


class TestBirthday:
    def test_exact(self):
        assert birthday_exact(365, 23) > Fraction(1, 2) > birthday_exact(365, 22)
        assert birthday_exact(2, 3) == 1

    def test_monte_carlo_tracks_exact(self):
        estimate = birthday_mc(365, [1 / 365] * 365, k=23, trials=20_000, seed=1)
        assert estimate.value == pytest.approx(float(birthday_exact(365, 23)), abs=0.02)

    def test_bad_pair_weight(self):
        assert bad_pair_weight([0.5, 0.5]) == pytest.approx(0.5)
        assert bad_pair_weight([0.5, 0.5], omega0=[0]) == pytest.approx(0.25)

    def test_asymmetric_relation(self):
        with pytest.raises(PreconditionError):
            birthday_mc(2, [0.5, 0.5], bad_pairs=[[0, 1], [0, 0]])

    def test_wilson(self):
        low, high = wilson_interval(0, 10)
        assert low == pytest.approx(0.0, abs=1e-12)
        assert 0 < high < 1
