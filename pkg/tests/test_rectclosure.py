"""
Rectangular closure tester and its parameters
"""

import numpy as np
import pytest

from core.errors import CapExceededError, InstanceError, PreconditionError
from core.revsim import ReversibleCircuit, X, compose, random_circuit, relabel
from rectclosure.instance import (
    SepRcdInstance,
    certify_soundness,
    escaping_instance,
    is_closed_rectangle,
    load_seprcd,
    perfectly_agreeing_instance,
    random_instance,
    rectangle_value_max,
    sample_no_instance,
    transition
)
from rectclosure.params import (
    RectClosureParams,
    completeness_log_eps,
    log2_tau,
    round_bound,
    tau_schedule
)
from rectclosure.tester import closure_round, rect_closure_test, rect_closure_test_recursive


@pytest.fixture
def agreeing():
    return perfectly_agreeing_instance(2, 1, 1, [0, 1], [2])


@pytest.fixture
def always_bad():
    return SepRcdInstance(ReversibleCircuit(3, (X(2),)), 1, 1, 0)


class TestParams:
    """Round bound and exact log2 thresholds"""

    def test_round_bound(self):
        assert round_bound(2, 0.5) == 10

    def test_log_eps(self):
        assert completeness_log_eps(1, 0, 1) == -15

    def test_schedule_closed_form(self):
        assert tau_schedule(1, 3) == [log2_tau(1, t) for t in range(4)]
        assert RectClosureParams.create(3, 2, 0.25).schedule_consistent()

    def test_override(self):
        params = RectClosureParams.create(2, 0, 0.5, rounds=3)
        assert params.rounds == 3
        assert params.to_dict()["round_bound"] == 10

    @pytest.mark.parametrize("gamma,rounds", [(1.0, None), (0.0, None), (0.5, 0)])
    def test_invalid(self, gamma, rounds):
        with pytest.raises(PreconditionError):
            RectClosureParams.create(2, 0, gamma, rounds)


class TestInstance:
    def test_width_checked(self):
        with pytest.raises(InstanceError):
            SepRcdInstance(ReversibleCircuit(5, ()), 1, 1, 1)

    def test_load_needs_shape(self):
        with pytest.raises(InstanceError):
            load_seprcd({"width": 2, "gates": []})

    def test_transition(self, always_bad):
        assert str(transition(always_bad, 1, 0, 0)) == "BAD(1)"
        identity = SepRcdInstance(ReversibleCircuit(3, ()), 1, 1, 0)
        assert str(transition(identity, 1, 0, 0)) == "GOOD(1,0,0)"

    def test_agreeing_rectangle_is_closed(self, agreeing):
        assert is_closed_rectangle(agreeing, [0, 1], [2])
        assert not is_closed_rectangle(agreeing, [0, 1], [1, 2])

    def test_empty_side(self, agreeing):
        with pytest.raises(PreconditionError):
            is_closed_rectangle(agreeing, [], [2])

    def test_rectangle_value(self, agreeing, always_bad):
        assert rectangle_value_max(agreeing)[0] == pytest.approx(1.0)
        assert rectangle_value_max(always_bad)[0] == pytest.approx(0.0)


class TestClosure:
    """ACCEPT iff some seed survives every round"""

    def test_round_augments(self):
        identity = SepRcdInstance(ReversibleCircuit(3, ()), 1, 1, 0)
        s, t = np.array([True, False]), np.array([False, True])
        outcome = closure_round(identity, s, t)
        assert not outcome.bad
        assert outcome.s.tolist() == s.tolist()

    def test_accepts_agreeing_instance(self, agreeing):
        verdict = rect_closure_test(agreeing, 0.5)
        assert verdict.verdict == "ACCEPT"
        assert verdict.seed == (0, 2)
        assert len(verdict.rounds_log) == verdict.params.rounds + 1

    def test_parallel_scan_reports_least_seed(self, agreeing):
        assert rect_closure_test(agreeing, 0.5, parallel=4).seed == rect_closure_test(agreeing, 0.5).seed

    def test_rejects_when_every_seed_escapes(self, always_bad):
        verdict = rect_closure_test(always_bad, 0.5)
        assert verdict.verdict == "REJECT"
        assert verdict.bad_rounds == {(0, 0): 0, (0, 1): 0, (1, 0): 0, (1, 1): 0}

    @pytest.mark.parametrize("fixture", ["agreeing", "always_bad"])
    def test_recursive_agrees(self, request, fixture):
        instance = request.getfixturevalue(fixture)
        table = rect_closure_test(instance, 0.5, rounds=3)
        recursive = rect_closure_test_recursive(instance, 0.5, rounds=3)
        assert recursive.verdict == table.verdict
        assert recursive.seed == table.seed
        assert recursive.implementation == "recursive"

    def test_caps(self, agreeing):
        with pytest.raises(CapExceededError):
            rect_closure_test(agreeing, 0.5, max_ell=1)
        with pytest.raises(CapExceededError):
            rect_closure_test_recursive(agreeing, 0.5)

    def test_verdict_invariant_under_side_permutations(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            instance = random_instance(2, 1, 1, int(rng.integers(2, 12)), rng)
            width = instance.gamma_circuit.width
            sigma = relabel(random_circuit(2, 6, rng), [0, 1], width)
            tau = relabel(random_circuit(2, 6, rng), [2, 3], width)
            scramble = compose(sigma, tau)
            conjugated = SepRcdInstance(compose(compose(scramble, instance.gamma_circuit), scramble.inverse()),
                                        2, 1, 1)
            assert rect_closure_test(conjugated, 0.5).verdict == rect_closure_test(instance, 0.5).verdict


class TestSoundnessCertificate:
    """No instances certified by hsep <= 1 - gamma"""

    def test_escaping_gadget(self):
        rng = np.random.default_rng(4)
        for _ in range(3):
            instance = escaping_instance(2, rng)
            certificate = certify_soundness(instance, 0.5)
            assert certificate.certified
            assert certificate.value == pytest.approx(0.5, abs=1e-6)
            assert rectangle_value_max(instance)[0] <= certificate.upper + 1e-9

    def test_always_bad(self, always_bad):
        certificate = certify_soundness(always_bad, 0.5)
        assert certificate.certified
        assert certificate.upper == pytest.approx(0.0, abs=1e-12)

    def test_agreeing_instance_is_not_certified(self, agreeing):
        certificate = certify_soundness(agreeing, 0.5)
        assert not certificate.certified
        assert certificate.to_dict()["threshold"] == 0.5

    def test_sampled_instances_reject(self):
        rng = np.random.default_rng(7)
        for _ in range(3):
            instance, certificate, attempts = sample_no_instance(2, 0.5, rng)
            assert certificate.certified
            assert attempts <= 2
            assert rectangle_value_max(instance)[0] <= 0.5 + 1e-9
            assert rect_closure_test(instance, 0.5).verdict == "REJECT"
