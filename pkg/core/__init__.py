"""
Core Package
Simulation engine, configuration and suite orchestration
"""

from .errors import (
    CapExceededError,
    ConvergenceError,
    InstanceError,
    PreconditionError,
    StoqlabError
)
from .settings import ExperimentConfig, Settings, get_settings, reset_settings
from .state import (
    CriterionRecord,
    CriterionStatus,
    SuiteState,
    create_initial_state,
    failed_records
)

__all__ = [
    # Errors
    'StoqlabError',
    'InstanceError',
    'CapExceededError',
    'PreconditionError',
    'ConvergenceError',

    # Configuration
    'Settings',
    'ExperimentConfig',
    'get_settings',
    'reset_settings',

    # Suite state
    'SuiteState',
    'CriterionRecord',
    'CriterionStatus',
    'create_initial_state',
    'failed_records'
]
