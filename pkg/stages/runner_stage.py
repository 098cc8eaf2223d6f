"""
Runner Stage
Runs one planned criterion per visit
"""

import time
from typing import Any, Dict

from loguru import logger

from core.settings import ExperimentConfig
from core.state import CriterionRecord, CriterionStatus, SuiteState
from tools.criteria import CRITERIA
from utils.helpers import format_duration
from .base_stage import BaseStage


class RunnerStage(BaseStage):
    """Executes the acceptance-criterion tools in plan order"""

    def __init__(self, settings=None):
        super().__init__(name="runner", role="Criterion Runner", settings=settings)

    def execute(self, state: SuiteState) -> Dict[str, Any]:
        """
        Run the criterion at state['current_index']

        Returns:
            Update appending one record; a raising criterion is recorded as FAIL
            with the error text and the run continues
        """
        index = state["current_index"]
        if index >= len(state["plan"]):
            self.log_action("All criteria run")
            return {"next_stage": "validator"}

        name = state["plan"][index]
        self.log_action(f"Running criterion {index + 1}/{len(state['plan'])}", name)
        tool = CRITERIA[name](settings=self.settings)
        started = time.perf_counter()
        try:
            config = ExperimentConfig.create(subcommand="suite", seed=state["seed"], workers=state["workers"],
                                             mode=state["mode"])
            response = tool.execute(config)
        except Exception as e:
            logger.error(f"[runner] {name} raised {type(e).__name__}: {e}")
            response = {"success": False, "error": f"{type(e).__name__}: {e}"}

        record = self._record(name, tool.summary, response)
        self.log_action(f"{name} {record['status']}", format_duration(time.perf_counter() - started))

        update: Dict[str, Any] = {
            "results": [record],
            "current_index": index + 1,
            "next_stage": "runner" if index + 1 < len(state["plan"]) else "validator",
        }
        if record["error"]:
            update["errors"] = [f"{name}: {record['error']}"]
        return update

    @staticmethod
    def _record(name: str, summary: str, response: Dict[str, Any]) -> CriterionRecord:
        if not response.get("success"):
            return CriterionRecord(criterion=name, status=CriterionStatus.FAIL.value, summary=summary,
                                   checks={}, measured={}, error=response.get("error") or "unknown error")
        result = response["result"]
        return CriterionRecord(criterion=name, status=response["metadata"]["status"], summary=summary,
                               checks=result["checks"], measured=result["measured"], error=None)
