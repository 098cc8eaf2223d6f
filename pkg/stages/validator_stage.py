"""
Validator Stage
Aggregates criterion records into the suite verdict
"""

from typing import Any, Dict

from core.state import CriterionStatus, SuiteState, failed_records
from .base_stage import BaseStage


class ValidatorStage(BaseStage):
    """Summarizes the run"""

    def __init__(self, settings=None):
        super().__init__(name="validator", role="Suite Validator", settings=settings)

    def execute(self, state: SuiteState) -> Dict[str, Any]:
        failed = [r["criterion"] for r in failed_records(state)]
        passed = [r["criterion"] for r in state["results"] if r["status"] == CriterionStatus.PASS.value]
        not_run = [name for name in state["plan"] if name not in passed and name not in failed]
        all_passed = bool(state["plan"]) and not failed and not not_run
        summary = {
            "total": len(state["plan"]),
            "passed": len(passed),
            "failed": failed,
            "not_run": not_run,
            "seed": state["seed"],
        }
        self.log_action(
            f"Suite {'PASSED' if all_passed else 'FAILED'}",
            f"{len(passed)}/{len(state['plan'])} criteria passed" + (f", failed: {', '.join(failed)}" if failed else "")
        )
        return {"summary": summary, "all_passed": all_passed, "next_stage": "end", "is_complete": True}
