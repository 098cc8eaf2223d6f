"""
CleanCC instances, exact acceptance and the no-instance sweep
"""

import numpy as np
import pytest
import sympy

from cleancc.instance import (
    CleanCcInstance,
    CleanCcWitness,
    build_gamma,
    connected_catalog,
    from_edges,
    labeled_instances,
    load_cleancc,
    return_index
)
from cleancc.verifier import (
    acceptance,
    loss,
    max_acceptance,
    no_instance_sweep,
    quadratic_form,
    simulated_acceptance,
    soundness_bound
)
from core.arith import ArithmeticMode, exact_equal
from core.errors import CapExceededError, InstanceError, PreconditionError

RATIONAL = ArithmeticMode.RATIONAL


@pytest.fixture
def marked_edge():
    """Two vertices joined by an edge, vertex 0 marked"""
    return from_edges(1, 1, [(0, 1)], marked=[0])


@pytest.fixture
def clean_path():
    """Path 0-1-2 with only vertex 3 marked"""
    return from_edges(2, 2, [(0, 1), (1, 2)], marked=[3])


class TestInstance:
    """Padded neighbor tables"""

    def test_padding(self, clean_path):
        assert clean_path.neighbors[0] == (1, 0)
        assert clean_path.neighbors[3] == (3, 3)
        assert clean_path.q == 2 and clean_path.J == 4

    def test_asymmetric_table(self):
        with pytest.raises(InstanceError):
            CleanCcInstance(1, 1, ((1,), (1,)), (0, 0))

    def test_degree_bound(self):
        with pytest.raises(InstanceError):
            from_edges(2, 1, [(0, 1), (0, 2)])

    def test_return_index(self, clean_path):
        assert return_index(clean_path, 1, 0) == 0
        assert return_index(clean_path, 1, 1) == 0
        assert return_index(clean_path, 3, 1) == 1
        with pytest.raises(PreconditionError):
            return_index(clean_path, 0, 2)

    def test_gamma_is_involution(self, clean_path):
        table = build_gamma(clean_path)
        assert np.array_equal(table[table], np.arange(len(table)))

    def test_yes_no(self, marked_edge, clean_path):
        assert not marked_edge.is_yes
        assert clean_path.clean_component() == [0, 1, 2]

    def test_load(self, clean_path):
        assert load_cleancc(clean_path.to_dict()) == clean_path
        with pytest.raises(InstanceError):
            load_cleancc({"n": 1, "dG": 1})

    def test_negative_witness(self):
        with pytest.raises(InstanceError):
            CleanCcWitness((0.6, -0.8))


class TestAcceptance:
    """1 - (edge differences + marked mass) / 2J"""

    def test_uniform_on_marked_edge(self, marked_edge):
        witness = CleanCcWitness.subset(2, [0, 1], RATIONAL)
        assert exact_equal(acceptance(marked_edge, witness), sympy.Rational(7, 8))

    def test_circuit_matches_formula(self, marked_edge):
        witness = CleanCcWitness.subset(2, [0, 1], RATIONAL)
        assert exact_equal(simulated_acceptance(marked_edge, witness), acceptance(marked_edge, witness))

    def test_clean_component_accepted_with_certainty(self, clean_path):
        witness = CleanCcWitness.subset(4, [0, 1, 2], RATIONAL)
        assert exact_equal(acceptance(clean_path, witness), 1)
        assert exact_equal(simulated_acceptance(clean_path, witness), 1)

    def test_quadratic_form_agrees(self, marked_edge):
        rng = np.random.default_rng(4)
        q = quadratic_form(marked_edge)
        for _ in range(3):
            witness = CleanCcWitness.from_vector(rng.random(2))
            alpha = np.array(witness.alpha, dtype=float)
            assert 0.5 + 0.5 * alpha @ q @ alpha == pytest.approx(float(acceptance(marked_edge, witness)))

    def test_circuit_cap(self):
        with pytest.raises(CapExceededError):
            simulated_acceptance(from_edges(5, 1, []), CleanCcWitness.subset(32, [0]))


class TestOptimum:
    def test_yes_instance_is_exactly_one(self, clean_path):
        result = max_acceptance(clean_path)
        assert result.exact == 1
        assert result.clean_component == [0, 1, 2]

    def test_no_instance_below_bound(self, marked_edge):
        result = max_acceptance(marked_edge)
        assert result.value == pytest.approx(0.5 + 0.5 * (0.5 + np.sqrt(1.25)) / 2)
        assert result.value <= float(soundness_bound(1, 1))
        assert float(acceptance(marked_edge, result.witness)) == pytest.approx(result.value)


class TestSweep:
    """All connected graphs with one mark, up to isomorphism"""

    @pytest.mark.parametrize("vertices,dG,count", [(3, 2, 4), (4, 2, 6), (4, 3, 10)])
    def test_catalog_sizes(self, vertices, dG, count):
        assert len(connected_catalog(vertices, dG)) == count

    @pytest.mark.parametrize("n,dG", [(1, 1), (2, 2), (2, 3)])
    def test_bound_holds(self, n, dG):
        sweep = no_instance_sweep(n, dG)
        assert sweep.holds

    def test_labeled_enumeration(self):
        instances = list(labeled_instances(1, 1))
        assert len(instances) == 8
        assert all(max_acceptance(i).value <= 1 for i in instances)
        with pytest.raises(CapExceededError):
            next(labeled_instances(3, 2))


class TestPoincare:
    """Loss floor on no instances and the acceptance range"""

    def test_loss_floor_on_no_instances(self):
        checked = 0
        for instance in labeled_instances(2, 2):
            if instance.is_yes:
                continue
            optimum = max_acceptance(instance)
            assert float(loss(instance, optimum.witness)) >= 1 / instance.size ** 2 - 1e-9
            checked += 1
        assert checked > 0

    def test_acceptance_range(self):
        rng = np.random.default_rng(2)
        instances = list(labeled_instances(2, 2))
        for index in rng.choice(len(instances), size=40, replace=False):
            instance = instances[index]
            witness = CleanCcWitness.from_vector(rng.random(instance.size) + 0.01)
            assert 0.5 - 1e-12 <= float(acceptance(instance, witness)) <= 1 + 1e-12
