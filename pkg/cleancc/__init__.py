"""
CleanCC Package
Clean connected-component instances and their stoquastic verifier
"""

from .instance import (
    CleanCcInstance,
    CleanCcWitness,
    build_gamma,
    connected_catalog,
    from_edges,
    labeled_instances,
    load_cleancc,
    return_index
)
from .verifier import (
    NoInstanceSweep,
    OptimumResult,
    acceptance,
    build_protocol6_verifier,
    loss,
    max_acceptance,
    no_instance_sweep,
    protocol6_construction,
    quadratic_form,
    rejection,
    simulated_acceptance,
    soundness_bound
)

__all__ = [
    # Instances
    'CleanCcInstance',
    'CleanCcWitness',
    'load_cleancc',
    'from_edges',
    'return_index',
    'build_gamma',
    'connected_catalog',
    'labeled_instances',

    # Verifier
    'acceptance',
    'rejection',
    'loss',
    'quadratic_form',
    'max_acceptance',
    'soundness_bound',
    'no_instance_sweep',
    'protocol6_construction',
    'build_protocol6_verifier',
    'simulated_acceptance',
    'OptimumResult',
    'NoInstanceSweep'
]
