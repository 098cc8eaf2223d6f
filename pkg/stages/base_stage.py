"""
Base Stage Class
All suite stages inherit from this
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, Optional

from loguru import logger

from core.settings import Settings, get_settings
from core.state import SuiteState
from utils.logger import log_stage_action


class BaseStage(ABC):
    """Abstract base class for all suite stages"""

    def __init__(self, name: str, role: str, settings: Optional[Settings] = None):
        """
        Initialize stage

        Args:
            name: Stage identifier, equal to its graph node
            role: Stage's role description
            settings: Configuration; the process-wide settings by default
        """
        self.name = name
        self.role = role
        self.settings = settings or get_settings()
        logger.info(f"Initialized stage: {name} ({role})")

    @abstractmethod
    def execute(self, state: SuiteState) -> Dict[str, Any]:
        """
        Execute stage logic

        Args:
            state: Current suite state

        Returns:
            Partial state update; list fields are appended by the graph
        """
        pass

    def log_action(self, action: str, details: str = ""):
        """Log stage action"""
        log_stage_action(self.name, action, details)

    def __str__(self) -> str:
        return f"Stage({self.name}, role={self.role})"
