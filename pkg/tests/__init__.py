"""
Tests Package
Unit tests per module, CLI exit-code tests and suite runs
"""

import sys
from pathlib import Path

# Project root on sys.path so `main` and the packages import without installation
PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))
