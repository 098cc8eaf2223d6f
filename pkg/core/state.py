"""
Shared State Definition for the Suite Graph
This state is passed between the planner, runner and validator stages
"""

from typing import TypedDict, List, Dict, Any, Optional, Annotated
from enum import Enum
import operator


class CriterionStatus(str, Enum):
    """Outcome of one acceptance criterion"""
    PENDING = "PENDING"
    PASS = "PASS"
    FAIL = "FAIL"


class CriterionRecord(TypedDict):
    """One row of the suite report"""
    criterion: str
    status: str
    summary: str
    checks: Dict[str, bool]
    measured: Dict[str, Any]
    error: Optional[str]


class SuiteState(TypedDict):
    """
    Suite state shared across all stages.
    LangGraph merges each stage's partial update into it.
    """
    # Request
    only: List[str]
    seed: int
    workers: int
    mode: str

    # Planning Phase
    plan: List[str]
    current_index: int

    # Running Phase
    results: Annotated[List[CriterionRecord], operator.add]  # Append-only

    # Validation Phase
    summary: Optional[Dict[str, Any]]
    all_passed: bool

    # Workflow Control
    next_stage: str  # "runner", "validator", "end"
    is_complete: bool

    # Error Handling
    errors: Annotated[List[str], operator.add]


def create_initial_state(only: Optional[List[str]], seed: int, workers: int = 1,
                         mode: str = "rational") -> SuiteState:
    """Create initial state for one suite run"""
    return SuiteState(
        only=list(only or []),
        seed=seed,
        workers=workers,
        mode=mode,
        plan=[],
        current_index=0,
        results=[],
        summary=None,
        all_passed=False,
        next_stage="planner",
        is_complete=False,
        errors=[]
    )


def failed_records(state: SuiteState) -> List[CriterionRecord]:
    """Records whose criterion did not pass"""
    return [r for r in state["results"] if r["status"] != CriterionStatus.PASS.value]
