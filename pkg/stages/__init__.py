"""
Stages Package
Suite stages driven by the orchestrator graph
"""

from .base_stage import BaseStage
from .planner_stage import PlannerStage
from .runner_stage import RunnerStage
from .validator_stage import ValidatorStage

__all__ = [
    'BaseStage',
    'PlannerStage',
    'RunnerStage',
    'ValidatorStage'
]
