"""
Rectangular Closure Package
SepRCD instances, closure parameters and the seed-by-seed closure tester
"""

from .params import RectClosureParams, completeness_log_eps, log2_tau, round_bound, tau_schedule
from .instance import (
    SepRcdInstance,
    SoundnessCertificate,
    Transition,
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
from .tester import ClosureVerdict, closure_round, rect_closure_test, rect_closure_test_recursive

__all__ = [
    # Parameters
    'RectClosureParams',
    'round_bound',
    'log2_tau',
    'tau_schedule',
    'completeness_log_eps',

    # Instances
    'SepRcdInstance',
    'Transition',
    'load_seprcd',
    'transition',
    'is_closed_rectangle',
    'perfectly_agreeing_instance',
    'random_instance',
    'rectangle_value_max',
    'SoundnessCertificate',
    'certify_soundness',
    'escaping_instance',
    'sample_no_instance',

    # Tester
    'ClosureVerdict',
    'closure_round',
    'rect_closure_test',
    'rect_closure_test_recursive'
]
