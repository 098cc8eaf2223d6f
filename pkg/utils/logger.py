"""
Centralized Logging Configuration
Uses loguru for structured logging
"""

import os
import sys
from pathlib import Path
from typing import Any, Dict, Optional

from loguru import logger


def setup_logger(log_level: str = "INFO", log_file: Optional[str] = "./data/logs/stoqlab.log"):
    """
    Configure loguru logger with console and file output

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR)
        log_file: Path to log file; None keeps console output only
    """
    logger.remove()

    # stderr keeps report JSON on stdout clean
    logger.add(
        sys.stderr,
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan> | <level>{message}</level>",
        level=log_level,
        colorize=True
    )

    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        logger.add(
            log_file,
            format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} | {message}",
            level=log_level,
            rotation="10 MB",
            retention="7 days",
            compression="zip"
        )

    logger.debug(f"Logger initialized - Level: {log_level}, File: {log_file}")
    return logger


def log_stage_action(stage: str, action: str, details: str = ""):
    """Log suite-stage actions"""
    logger.info(f"[{stage}] {action} | {details}")


def log_experiment(tool_name: str, inputs: Dict[str, Any], status: str = ""):
    """Log an experiment tool run"""
    shown = ", ".join(f"{k}={v}" for k, v in sorted(inputs.items()) if v is not None)
    logger.debug(f"[TOOL:{tool_name}] {shown[:200]} | {status}")


def log_state_transition(from_stage: str, to_stage: str, reason: str = ""):
    """Log suite graph transitions"""
    logger.info(f"[SUITE] {from_stage} → {to_stage} | {reason}")


def log_error(component: str, error_message: str, context: Optional[dict] = None):
    """Log errors with context"""
    logger.error(f"[{component}] {error_message} | Context: {context}")


# Initialize logger on import
setup_logger(os.getenv("LOG_LEVEL", "INFO"), None)
