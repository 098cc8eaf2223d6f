"""
Planner Stage
Resolves the --only filter into an ordered criterion plan
"""

from typing import Any, Dict, List

from loguru import logger

from core.state import SuiteState
from tools.criteria import CRITERIA
from .base_stage import BaseStage


class PlannerStage(BaseStage):
    """Orders the criteria to run"""

    def __init__(self, settings=None):
        super().__init__(name="planner", role="Criterion Planner", settings=settings)

    def execute(self, state: SuiteState) -> Dict[str, Any]:
        """
        Build the plan from the configured battery, filtered by state['only']

        Returns:
            Update with 'plan', or with an error and next_stage 'end' on unknown names
        """
        battery = self.settings.suite.criteria
        unknown = [name for name in battery + state["only"] if name not in CRITERIA]
        if unknown:
            error = f"unknown criteria: {', '.join(unknown)} (known: {', '.join(CRITERIA)})"
            logger.error(f"[planner] {error}")
            return {"plan": [], "errors": [error], "next_stage": "end", "is_complete": True}

        plan: List[str] = [name for name in battery if not state["only"] or name in state["only"]]
        missing = [name for name in state["only"] if name not in battery]
        if missing:
            # requested criteria left out of the configured battery still run, after it
            plan += [name for name in missing if name not in plan]
        if not plan:
            error = "no criteria selected"
            logger.error(f"[planner] {error}")
            return {"plan": [], "errors": [error], "next_stage": "end", "is_complete": True}

        self.log_action(f"Planned {len(plan)} criteria", ", ".join(plan))
        return {"plan": plan, "current_index": 0, "next_stage": "runner"}
