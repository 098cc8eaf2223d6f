"""
Non-negative states, distributions and distances
"""

import math

import numpy as np
import pytest
import sympy

from core.arith import ArithmeticMode
from core.errors import InstanceError
from core.states import (
    DensityMatrix,
    Distribution,
    NonNegativeState,
    absolutize,
    entropy,
    fidelity_pure_mixed,
    hellinger2,
    inner_product,
    kl,
    load_state,
    squared_distribution,
    tensor,
    tensor_all,
    trace_distance_pure,
    tv
)

RATIONAL = ArithmeticMode.RATIONAL
FLOAT = ArithmeticMode.FLOAT


class TestConstruction:
    """Validation of non-negative unit vectors"""

    def test_subset_state_is_exact(self):
        state = NonNegativeState.subset(2, [0, 3], RATIONAL)
        assert state.amplitude(0) == 1 / sympy.sqrt(2)
        assert state.norm_squared() == 1

    def test_negative_amplitude_rejected(self):
        with pytest.raises(InstanceError):
            NonNegativeState(1, {0: 0.6, 1: -0.8})

    def test_unnormalized_rejected(self):
        with pytest.raises(InstanceError):
            NonNegativeState(1, {0: 1, 1: 1}, RATIONAL)

    def test_out_of_range_key(self):
        with pytest.raises(InstanceError):
            NonNegativeState(1, {2: 1})

    def test_from_vector_needs_power_of_two(self):
        with pytest.raises(InstanceError):
            NonNegativeState.from_vector([0.6, 0.8, 0.0])

    def test_absolutize(self):
        state = absolutize([0.6, -0.8])
        assert state.to_vector() == pytest.approx([0.6, 0.8])


class TestOperations:
    """Tensor products and overlaps"""

    def test_tensor_puts_first_factor_low(self):
        a = NonNegativeState.basis(1, 1, RATIONAL)
        b = NonNegativeState.basis(2, 2, RATIONAL)
        product = tensor(a, b)
        assert product.width == 3
        assert product.support == [1 | (2 << 1)]

    def test_tensor_all_of_pluses(self):
        plus = NonNegativeState.plus(1, RATIONAL)
        assert tensor_all([plus] * 3).amplitudes == NonNegativeState.plus(3, RATIONAL).amplitudes

    def test_inner_product_of_subsets(self):
        a = NonNegativeState.subset(2, [0, 1], RATIONAL)
        b = NonNegativeState.subset(2, [1, 2], RATIONAL)
        assert inner_product(a, b) == sympy.Rational(1, 2)

    def test_trace_distance(self):
        a = NonNegativeState.basis(1, 0, RATIONAL)
        b = NonNegativeState.plus(1, RATIONAL)
        assert sympy.simplify(trace_distance_pure(a, b) - 1 / sympy.sqrt(2)) == 0

    def test_fidelity_with_mixed_state(self):
        rho = DensityMatrix(np.eye(2) / 2)
        assert fidelity_pure_mixed(NonNegativeState.basis(1, 0), rho) == pytest.approx(0.5)

    def test_density_matrix_checks_trace(self):
        with pytest.raises(InstanceError):
            DensityMatrix(np.eye(2))


class TestDistances:
    """Classical distances in bits"""

    @pytest.fixture
    def coins(self):
        return Distribution({"h": 0.5, "t": 0.5}), Distribution({"h": 1.0})

    def test_tv(self, coins):
        p, q = coins
        assert tv(p, q) == pytest.approx(0.5)

    def test_hellinger(self, coins):
        p, q = coins
        assert hellinger2(p, q) == pytest.approx(1 - math.sqrt(0.5))

    def test_kl_infinite_off_support(self, coins):
        p, q = coins
        assert kl(p, q) == math.inf
        assert kl(q, p) == pytest.approx(1.0)

    def test_entropy(self):
        assert entropy(Distribution.uniform(range(8))) == pytest.approx(3.0)

    def test_distribution_must_sum_to_one(self):
        with pytest.raises(InstanceError):
            Distribution({0: 0.5, 1: 0.4})

    def test_squared_distribution(self):
        dist = squared_distribution(NonNegativeState.subset(2, [0, 1, 2, 3], RATIONAL))
        assert all(p == sympy.Rational(1, 4) for _, p in dist.items())


class TestLoadState:
    def test_amplitude_form(self):
        state = load_state({"width": 2, "amplitudes": {"10": "3/5", "01": "4/5"}}, "rational")
        assert state.amplitude(1) == sympy.Rational(3, 5)
        assert state.amplitude(2) == sympy.Rational(4, 5)

    def test_subset_form(self):
        state = load_state({"width": 2, "subset": ["00", "11"]}, "float")
        assert state.support == [0, 3]

    def test_width_mismatch(self):
        with pytest.raises(InstanceError):
            load_state({"width": 2, "subset": ["001"]})

    def test_missing_body(self):
        with pytest.raises(InstanceError):
            load_state({"width": 1})


def random_unit(rng: np.random.Generator, size: int) -> np.ndarray:
    vec = rng.random(size) + 0.01
    return vec / np.linalg.norm(vec)


class TestProperties:
    """Randomized identities behind the soundness arguments"""

    def test_twice_hellinger_below_kl(self):
        rng = np.random.default_rng(17)
        for _ in range(1000):
            p = Distribution(dict(enumerate(rng.dirichlet(np.ones(4)))))
            q = Distribution(dict(enumerate(rng.dirichlet(np.ones(4)))))
            assert 2 * hellinger2(p, q) <= kl(p, q) + 1e-12

    @pytest.mark.parametrize("width_a,width_b", [(1, 1), (2, 1), (3, 3)])
    def test_squared_distribution_of_tensor_is_product(self, width_a, width_b):
        rng = np.random.default_rng(5)
        a = NonNegativeState.from_vector(random_unit(rng, 1 << width_a))
        b = NonNegativeState.from_vector(random_unit(rng, 1 << width_b))
        joint = squared_distribution(tensor(a, b))
        pa, pb = squared_distribution(a), squared_distribution(b)
        for ka in range(1 << width_a):
            for kb in range(1 << width_b):
                assert float(joint[ka | (kb << width_a)]) == pytest.approx(float(pa[ka]) * float(pb[kb]), abs=1e-12)

    def test_absolutize_does_not_decrease_overlap(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            signed = rng.normal(size=8)
            signed /= np.linalg.norm(signed)
            w = NonNegativeState.from_vector(random_unit(rng, 8))
            assert float(inner_product(w, absolutize(signed))) >= abs(float(w.to_vector() @ signed)) - 1e-12
