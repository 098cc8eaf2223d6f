"""
Utils Package
Logging setup and report helpers
"""

from .logger import setup_logger, log_stage_action, log_experiment, log_state_transition, log_error
from .helpers import (
    SCHEMA_VERSION,
    build_report,
    dump_report,
    ensure_directory,
    exact,
    format_duration,
    jsonable,
    read_json,
    write_csv,
    write_report
)

__all__ = [
    # Logger functions
    'setup_logger',
    'log_stage_action',
    'log_experiment',
    'log_state_transition',
    'log_error',

    # Report helpers
    'SCHEMA_VERSION',
    'build_report',
    'dump_report',
    'ensure_directory',
    'exact',
    'format_duration',
    'jsonable',
    'read_json',
    'write_csv',
    'write_report'
]
