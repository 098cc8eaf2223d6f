"""
Acceptance-criteria suite through the langgraph workflow
"""

import pytest

from core.orchestrator import SuiteOrchestrator
from core.settings import Settings
from core.state import create_initial_state
from stages.planner_stage import PlannerStage
from tools.criteria import CRITERIA


@pytest.fixture
def settings():
    """Defaults with small random batches"""
    base = Settings()
    suite = base.suite.model_copy(update={"random_verifiers": 3, "random_pairs": 2, "random_states": 5})
    return base.model_copy(update={"suite": suite})


@pytest.fixture
def orchestrator(settings):
    return SuiteOrchestrator(settings)


class TestPlanner:
    def test_battery_order(self, settings):
        update = PlannerStage(settings).execute(create_initial_state([], 1, 1, "rational"))
        assert update["plan"] == settings.suite.criteria

    def test_only_filters(self, settings):
        update = PlannerStage(settings).execute(create_initial_state(["sos", "birthday"], 1, 1, "rational"))
        assert update["plan"] == ["birthday", "sos"]

    def test_unknown_name(self, settings):
        update = PlannerStage(settings).execute(create_initial_state(["nonsense"], 1, 1, "rational"))
        assert update["plan"] == []
        assert "nonsense" in update["errors"][0]

    def test_configured_battery_is_known(self, settings):
        assert set(settings.suite.criteria) <= set(CRITERIA)


class TestSuiteRun:
    def test_single_criterion(self, orchestrator):
        outcome = orchestrator.run(only=["branch_overlap"], seed=3)
        assert outcome["success"]
        assert outcome["all_passed"]
        assert [r["criterion"] for r in outcome["records"]] == ["branch_overlap"]
        assert outcome["summary"] == {"total": 1, "passed": 1, "failed": [], "not_run": [], "seed": 3}

    def test_two_criteria_in_battery_order(self, orchestrator):
        outcome = orchestrator.run(only=["conjunction", "product_test"], seed=3)
        assert [r["criterion"] for r in outcome["records"]] == ["product_test", "conjunction"]
        assert outcome["all_passed"]

    def test_unknown_criterion(self, orchestrator):
        outcome = orchestrator.run(only=["nonsense"])
        assert not outcome["success"]
        assert outcome["errors"]

    def test_records_are_reproducible(self, orchestrator):
        first = orchestrator.run(only=["branch_overlap"], seed=11)
        second = orchestrator.run(only=["branch_overlap"], seed=11, workers=2)
        assert first["records"] == second["records"]


@pytest.mark.slow
class TestFullBattery:
    """Every criterion with the configured budgets"""

    @pytest.mark.parametrize("name", list(CRITERIA))
    def test_criterion_passes(self, name):
        outcome = SuiteOrchestrator(Settings()).run(only=[name])
        assert outcome["all_passed"], outcome["records"]
