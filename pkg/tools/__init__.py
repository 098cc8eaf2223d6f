"""
Tools Package
Experiment tools, one per CLI subcommand, and the acceptance-criteria tools
"""

from typing import Dict, Type

from .base_tool import ACCEPT, FAIL, PASS, REJECT, STATUS_EXIT_CODES, SUCCESS, VIOLATION, BaseTool
from .closure_tools import CleanccTool, RectClosureTool, SosRoundTool
from .criteria import CRITERIA, CriterionTool
from .engine_tools import CircuitTool, MultCheckTool, SepvalTool, VerifyTool
from .np_tools import BirthdayTool, Np4Tool, Np5Tool
from .protocol_tools import CompressTool, ProductTestTool, RepeatTool, SymmetrizeTool

TOOL_REGISTRY: Dict[str, Type[BaseTool]] = {
    "circuit": CircuitTool,
    "verify": VerifyTool,
    "sepval": SepvalTool,
    "mult-check": MultCheckTool,
    "product-test": ProductTestTool,
    "symmetrize": SymmetrizeTool,
    "compress": CompressTool,
    "repeat": RepeatTool,
    "np4": Np4Tool,
    "np5": Np5Tool,
    "birthday": BirthdayTool,
    "rect-closure": RectClosureTool,
    "sos-round": SosRoundTool,
    "cleancc": CleanccTool,
}

__all__ = [
    'BaseTool',
    'CriterionTool',
    'TOOL_REGISTRY',
    'CRITERIA',
    'STATUS_EXIT_CODES',
    'ACCEPT',
    'REJECT',
    'SUCCESS',
    'VIOLATION',
    'PASS',
    'FAIL',
    'CircuitTool',
    'VerifyTool',
    'SepvalTool',
    'MultCheckTool',
    'ProductTestTool',
    'SymmetrizeTool',
    'CompressTool',
    'RepeatTool',
    'Np4Tool',
    'Np5Tool',
    'BirthdayTool',
    'RectClosureTool',
    'SosRoundTool',
    'CleanccTool',
]
