"""
Base Tool Interface
Every experiment and acceptance-criterion tool inherits from this abstract class
"""

from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Any, Callable, Dict, Optional, Tuple

from loguru import logger

from core.arith import ArithmeticMode, parse_mode
from core.errors import InstanceError, StoqlabError
from core.settings import ExperimentConfig, Settings, get_settings
from core.verifier import Thresholds
from utils.helpers import read_json
from utils.logger import log_error, log_experiment

ACCEPT = "ACCEPT"
REJECT = "REJECT"
SUCCESS = "SUCCESS"
VIOLATION = "VIOLATION"
PASS = "PASS"
FAIL = "FAIL"

STATUS_EXIT_CODES = {ACCEPT: 0, SUCCESS: 0, PASS: 0, REJECT: 1, VIOLATION: 1, FAIL: 1}


class BaseTool(ABC):
    """Abstract base class for all tools"""

    def __init__(self, name: str, description: str, settings: Optional[Settings] = None):
        """
        Initialize tool

        Args:
            name: Tool identifier, equal to its CLI subcommand
            description: What the tool does
            settings: Configuration; the process-wide settings by default
        """
        self.name = name
        self.description = description
        self.settings = settings or get_settings()
        logger.debug(f"Initialized tool: {name}")

    @abstractmethod
    def run(self, config: ExperimentConfig) -> Tuple[str, Dict[str, Any]]:
        """
        Tool logic

        Returns:
            (status, result) with status one of the STATUS_EXIT_CODES keys
        """
        pass

    def execute(self, config: ExperimentConfig) -> Dict[str, Any]:
        """
        Run the tool, converting failures into an error response

        Returns:
            Dict with 'success', 'result', 'error' keys; successes carry the
            status in metadata
        """
        log_experiment(self.name, {"instance": config.instance, "seed": config.seed, "mode": config.mode}, "start")
        try:
            status, result = self.run(config)
        except StoqlabError as e:
            return self._error_response(str(e), type(e).__name__)
        except (ValueError, ZeroDivisionError, OverflowError) as e:
            return self._error_response(f"{type(e).__name__}: {e}", "InstanceError")
        log_experiment(self.name, {"seed": config.seed}, status)
        return self._success_response(result, {"status": status})

    def _success_response(self, result: Any, metadata: Optional[Dict] = None) -> Dict[str, Any]:
        """Format successful execution response"""
        response = {
            "success": True,
            "result": result,
            "error": None,
            "tool": self.name
        }
        if metadata:
            response["metadata"] = metadata
        return response

    def _error_response(self, error: str, error_type: str = "ToolError") -> Dict[str, Any]:
        """Format error response"""
        log_error(self.name, f"{error_type}: {error}", {"description": self.description})
        return {
            "success": False,
            "result": None,
            "error": error,
            "error_type": error_type,
            "tool": self.name
        }

    # Input plumbing shared by the experiment tools

    def path(self, config: ExperimentConfig, key: str, required: bool = True) -> Optional[str]:
        value = config.instance if key == "instance" else config.paths.get(key)
        if value is None and required:
            raise InstanceError(f"'{self.name}' needs --{key.replace('_', '-')}")
        return value

    def load(self, config: ExperimentConfig, key: str, loader: Callable[..., Any], *args: Any) -> Any:
        return loader(read_json(self.path(config, key)), *args)

    def knob(self, config: ExperimentConfig, key: str, default: Any = None) -> Any:
        value = config.knobs.get(key)
        return default if value is None else value

    def fraction(self, config: ExperimentConfig, key: str, default: Any = None) -> Optional[Fraction]:
        value = self.knob(config, key, default)
        if value is None:
            return None
        try:
            return Fraction(str(value))
        except (ValueError, ZeroDivisionError):
            raise InstanceError(f"--{key} expects a rational such as 2/3, got {value!r}")

    def thresholds(self, config: ExperimentConfig) -> Thresholds:
        c, s = self.fraction(config, "c"), self.fraction(config, "s")
        if c is None or s is None:
            raise InstanceError(f"'{self.name}' needs --c and --s")
        return Thresholds(c, s)

    def mode(self, config: ExperimentConfig) -> ArithmeticMode:
        return parse_mode(config.mode)

    def __str__(self) -> str:
        return f"{self.name}: {self.description}"
