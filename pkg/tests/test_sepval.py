"""
Separable values of partitioned matrices
"""

import numpy as np
import pytest

from core.errors import InstanceError, PreconditionError
from core.sepval import (
    PartitionedMatrix,
    check_multiplicativity,
    hsep,
    hsep_alternating,
    hsep_bruteforce,
    hsep_shift_check,
    lambda_max_nonneg,
    load_matrix,
    product_form_value,
    remark_matrix,
    tensor_partitioned
)


def random_nonnegative(rng: np.random.Generator, dims) -> PartitionedMatrix:
    size = int(np.prod(dims))
    g = rng.random((size, size))
    return PartitionedMatrix(list(dims), (g + g.T) / 2)


@pytest.fixture
def remark():
    return remark_matrix()


@pytest.fixture
def product_matrix():
    a = np.array([[1.0, 0.5], [0.5, 2.0]])
    b = np.array([[0.0, 1.0], [1.0, 0.0]])
    return PartitionedMatrix([2, 2], np.kron(a, b), [a, b])


class TestPartitionedMatrix:
    """Flags and validation"""

    def test_flags(self, remark, product_matrix):
        assert remark.nonnegative and not remark.psd and not remark.product_form
        assert product_matrix.product_form

    def test_must_be_symmetric(self):
        with pytest.raises(InstanceError):
            PartitionedMatrix([2], np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_shape_must_match_dims(self):
        with pytest.raises(InstanceError):
            PartitionedMatrix([2, 2], np.eye(3))

    def test_load_flat_entries(self):
        m = load_matrix({"dims": [2], "entries": [1, 0, 0, 1]})
        assert m.psd

    def test_load_rejects_false_flag(self):
        with pytest.raises(InstanceError):
            load_matrix({"dims": [2], "entries": [[0, 1], [1, 0]], "flags": {"psd": True}})


class TestHsep:
    """Separable value oracles"""

    def test_remark_value(self, remark):
        assert hsep(remark).value == pytest.approx(0.5, abs=1e-6)

    def test_tensor_square_is_not_multiplicative(self, remark):
        square = tensor_partitioned(remark, remark)
        assert square.dims == [4, 4]
        assert hsep(square).value >= 0.5 - 1e-6 > 0.25

    def test_product_form_value(self, product_matrix):
        assert hsep(product_matrix).value == pytest.approx(product_form_value(product_matrix), abs=1e-6)

    def test_alternating_needs_nonnegative(self):
        with pytest.raises(PreconditionError):
            hsep_alternating(PartitionedMatrix([2], np.diag([1.0, -1.0])))

    def test_perron_root(self):
        result = lambda_max_nonneg(np.array([[2.0, 1.0], [1.0, 2.0]]))
        assert result.value == pytest.approx(3.0)
        assert result.converged

    def test_shift_check(self, remark):
        shift = hsep_shift_check(remark, 2.0, 0.5)
        assert shift["passed"]
        assert shift["rhs"] == pytest.approx(1.5, abs=1e-6)

    def test_signed_search_gains_nothing(self):
        rng = np.random.default_rng(6)
        for _ in range(5):
            m = random_nonnegative(rng, [2, 2])
            signed = hsep_bruteforce(m, signed=True).value
            assert hsep_bruteforce(m).value == pytest.approx(signed, abs=1e-4)


class TestMultiplicativity:
    """EQUAL on PSD and product-form pairs, EXCESS on the remark matrix"""

    def test_remark_excess(self, remark):
        report = check_multiplicativity(remark, remark)
        assert report.verdict == "EXCESS"
        assert not report.qualifies

    def test_psd_pair_equal(self):
        m = PartitionedMatrix([2, 2], np.ones((4, 4)) / 4)
        report = check_multiplicativity(m, m)
        assert report.qualifies
        assert report.verdict == "EQUAL"

    def test_product_pair_equal(self, product_matrix):
        report = check_multiplicativity(product_matrix, product_matrix)
        assert report.verdict == "EQUAL"

    def test_party_count_mismatch(self, remark):
        with pytest.raises(InstanceError):
            tensor_partitioned(remark, PartitionedMatrix([4], np.eye(4)))

    def test_tensor_value_is_supermultiplicative(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            m1, m2 = random_nonnegative(rng, [2, 2]), random_nonnegative(rng, [2, 2])
            assert hsep(tensor_partitioned(m1, m2)).value >= hsep(m1).value * hsep(m2).value - 1e-6
