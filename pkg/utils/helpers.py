"""
Report Helpers
JSON input, normalized JSON reports and pandas CSV projections
"""

import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
import sympy
from loguru import logger

from core.arith import to_text
from core.errors import InstanceError

SCHEMA_VERSION = "1.0"


def ensure_directory(path: str) -> Path:
    """
    Ensure directory exists, create if not

    Args:
        path: Directory path

    Returns:
        Path object
    """
    dir_path = Path(path)
    dir_path.mkdir(parents=True, exist_ok=True)
    return dir_path


def read_json(path: str) -> Dict[str, Any]:
    """
    Load a JSON input file

    Raises:
        InstanceError: missing file or invalid JSON
    """
    file_path = Path(path)
    if not file_path.is_file():
        raise InstanceError(f"input file not found: {path}")
    try:
        with open(file_path, "r") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise InstanceError(f"{path} is not valid JSON: {e}")


def exact(value: Any) -> Dict[str, Any]:
    """An exact scalar as its text form with a float projection"""
    return {"exact": to_text(value), "float": float(value)}


def jsonable(value: Any) -> Any:
    """Recursively convert numpy, sympy, Fraction and tuple values into JSON types"""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [jsonable(v) for v in items]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, (Fraction, sympy.Basic)):
        return to_text(value)
    if hasattr(value, "to_dict"):
        return jsonable(value.to_dict())
    if value is None or isinstance(value, str):
        return value
    return str(value)


def build_report(command: str, status: str, result: Dict[str, Any]) -> Dict[str, Any]:
    return {"schema_version": SCHEMA_VERSION, "command": command, "status": status, "result": jsonable(result)}


def dump_report(report: Dict[str, Any]) -> str:
    """Sorted keys and fixed separators so equal reports are byte-identical"""
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def write_report(report: Dict[str, Any], out: Optional[str]) -> None:
    """Write the report to `out`, or to stdout when no path is given"""
    text = dump_report(report)
    if out is None:
        print(text, end="")
        return
    path = Path(out)
    ensure_directory(str(path.parent))
    path.write_text(text)
    logger.info(f"[Report] {report['command']} -> {path}")


def report_rows(result: Dict[str, Any]) -> List[Dict[str, Any]]:
    """Flat rows for CSV: the result's 'rows' list if present, else the result itself"""
    rows = result.get("rows")
    if isinstance(rows, list) and rows and all(isinstance(r, dict) for r in rows):
        return rows
    return [result]


def write_csv(report: Dict[str, Any], path: str) -> None:
    """Flat CSV projection of a report through pandas.json_normalize"""
    frame = pd.json_normalize(report_rows(report["result"]), sep=".")
    frame.insert(0, "command", report["command"])
    frame = frame.reindex(columns=["command"] + sorted(c for c in frame.columns if c != "command"))
    ensure_directory(str(Path(path).parent))
    frame.to_csv(path, index=False)
    logger.info(f"[Report] CSV with {len(frame)} rows -> {path}")


def format_duration(seconds: float) -> str:
    """
    Format duration in human-readable format

    Args:
        seconds: Duration in seconds

    Returns:
        Formatted string (e.g., "2m 30s")
    """
    if seconds < 1:
        return f"{int(seconds * 1000)}ms"
    elif seconds < 60:
        return f"{seconds:.1f}s"
    elif seconds < 3600:
        minutes = int(seconds // 60)
        secs = int(seconds % 60)
        return f"{minutes}m {secs}s"
    else:
        hours = int(seconds // 3600)
        minutes = int((seconds % 3600) // 60)
        return f"{hours}h {minutes}m"
