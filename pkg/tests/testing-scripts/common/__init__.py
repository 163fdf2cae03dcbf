"""Shared utilities for the cspzip test runners.

Importing the package puts ``app/`` on ``sys.path`` so runners can import
the flat application modules (``constraint_network``, ``cspzip`` ...).
"""

import sys
from pathlib import Path

APP_DIR = Path(__file__).resolve().parents[3] / "app"
if str(APP_DIR) not in sys.path:
    sys.path.insert(0, str(APP_DIR))
