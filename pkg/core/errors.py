"""
Error Types
Exception hierarchy shared by the engine, the experiment tools and the CLI
"""


class StoqlabError(Exception):
    """Base class for every failure the lab reports as a usage or instance error"""

    exit_code = 2


class InstanceError(StoqlabError):
    """Malformed circuit, state, matrix or instance input"""


class CapExceededError(StoqlabError):
    """A simulation or enumeration cap would be exceeded"""


class PreconditionError(StoqlabError):
    """An operation was called outside its documented precondition"""


class ConvergenceError(StoqlabError):
    """An iterative routine hit its iteration cap without converging"""
