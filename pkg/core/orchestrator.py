"""
LangGraph Orchestrator
Defines the acceptance-suite state machine and stage routing
"""

from typing import Any, Dict, List, Optional

from langgraph.graph import END, StateGraph
from loguru import logger

from core.settings import Settings, get_settings
from core.state import SuiteState, create_initial_state
from stages.planner_stage import PlannerStage
from stages.runner_stage import RunnerStage
from stages.validator_stage import ValidatorStage
from utils.logger import log_state_transition

# planner + validator + slack on top of one runner visit per criterion
RECURSION_MARGIN = 5


class SuiteOrchestrator:
    """
    LangGraph-based suite orchestrator
    Runs the acceptance-criteria battery and aggregates a verdict
    """

    def __init__(self, settings: Optional[Settings] = None):
        """Initialize orchestrator with all stages"""
        logger.info("Initializing Suite Orchestrator")
        self.settings = settings or get_settings()

        self.planner = PlannerStage(settings=self.settings)
        self.runner = RunnerStage(settings=self.settings)
        self.validator = ValidatorStage(settings=self.settings)

        self.workflow = self._build_workflow()

        logger.info("Orchestrator initialized successfully")

    def _build_workflow(self):
        """
        Build LangGraph state machine

        Flow: START → Planner → Runner → Validator → END
                                 ↑   ↓
                                 └───┘ (one criterion per visit)
        """
        workflow = StateGraph(SuiteState)

        workflow.add_node("planner", self._planner_node)
        workflow.add_node("runner", self._runner_node)
        workflow.add_node("validator", self._validator_node)

        workflow.set_entry_point("planner")

        workflow.add_conditional_edges(
            "planner",
            self._route_from_planner,
            {
                "runner": "runner",
                "end": END
            }
        )

        workflow.add_conditional_edges(
            "runner",
            self._route_from_runner,
            {
                "runner": "runner",
                "validator": "validator"
            }
        )

        workflow.add_edge("validator", END)

        return workflow.compile()

    # Stage Node Functions
    def _planner_node(self, state: SuiteState) -> Dict[str, Any]:
        logger.info("=== PLANNER NODE ===")
        return self.planner.execute(state)

    def _runner_node(self, state: SuiteState) -> Dict[str, Any]:
        logger.info("=== RUNNER NODE ===")
        return self.runner.execute(state)

    def _validator_node(self, state: SuiteState) -> Dict[str, Any]:
        logger.info("=== VALIDATOR NODE ===")
        return self.validator.execute(state)

    # Routing Logic
    def _route_from_planner(self, state: SuiteState) -> str:
        if state["next_stage"] == "end" or not state["plan"]:
            log_state_transition("planner", "end", "empty plan")
            return "end"
        log_state_transition("planner", "runner", f"{len(state['plan'])} criteria")
        return "runner"

    def _route_from_runner(self, state: SuiteState) -> str:
        if state.get("next_stage") == "runner":
            return "runner"
        log_state_transition("runner", "validator", f"{len(state['results'])} records")
        return "validator"

    def run(self, only: Optional[List[str]] = None, seed: Optional[int] = None, workers: int = 1,
            mode: str = "rational") -> Dict[str, Any]:
        """
        Execute the suite

        Args:
            only: Criterion names to run; all configured criteria when empty
            seed: Base seed; settings.suite.seed by default
            workers: Worker count handed to every criterion
            mode: Arithmetic mode handed to every criterion

        Returns:
            {'success', 'all_passed', 'records', 'summary', 'errors'}; success is
            False when the suite could not be planned or the graph itself failed
        """
        seed = self.settings.suite.seed if seed is None else seed
        logger.info(f"Starting suite: only={only or 'all'}, seed={seed}, workers={workers}")
        initial_state = create_initial_state(only, seed, workers, mode)
        budget = len(self.settings.suite.criteria) + len(only or []) + RECURSION_MARGIN

        try:
            final_state = self.workflow.invoke(initial_state, config={"recursion_limit": budget})
        except Exception as e:
            logger.error(f"Suite execution failed: {e}")
            return {
                "success": False,
                "all_passed": False,
                "records": [],
                "summary": None,
                "errors": [str(e)]
            }

        planned = bool(final_state.get("plan"))
        logger.info(f"Suite finished: {'planned' if planned else 'not planned'}, "
                    f"all_passed={final_state.get('all_passed', False)}")
        return {
            "success": planned,
            "all_passed": final_state.get("all_passed", False),
            "records": final_state.get("results", []),
            "summary": final_state.get("summary"),
            "errors": final_state.get("errors", [])
        }
