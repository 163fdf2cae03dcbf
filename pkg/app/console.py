"""Tagged console output shared by the cspzip modules.

Lines look like ``[CSPZIP CGR] accepted s=(x2,x3) delta=+2``. They go to
stderr so command results printed on stdout stay machine-readable.
"""

from __future__ import annotations

import sys

_TAG = "CSPZIP"
_enabled = False


def set_enabled(enabled: bool) -> None:
    """Turn tagged log lines on or off for the whole process."""
    global _enabled
    _enabled = bool(enabled)


def format_line(stage: str | None, message: str) -> str:
    prefix = f"[{_TAG} {stage.upper()}]" if stage else f"[{_TAG}]"
    return f"{prefix} {message}"


def log(stage: str, message: str) -> None:
    if _enabled:
        print(format_line(stage, message), file=sys.stderr)


def warn(stage: str, message: str) -> None:
    if _enabled:
        print(format_line(stage, f"WARNING: {message}"), file=sys.stderr)


def error(message: str) -> None:
    """Errors are always printed, whatever the switch says."""
    print(format_line(None, f"ERROR: {message}"), file=sys.stderr)
