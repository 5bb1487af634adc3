"""
Stderr logging helpers.

Messages are printed to stderr with a bracketed level tag so that stdout stays
reserved for machine-readable command output.
"""

import sys

_LEVELS = {"DEBUG": 10, "INFO": 20, "WARNING": 30, "ERROR": 40, "CRITICAL": 50}
_threshold = _LEVELS["INFO"]


def set_log_level(level: str) -> None:
    """Set the minimum level that gets printed."""
    global _threshold
    normalized = (level or "INFO").strip().upper()
    if normalized not in _LEVELS:
        raise ValueError(f"Unknown log level: {level!r}. Supported: {sorted(_LEVELS)}")
    _threshold = _LEVELS[normalized]


def get_log_level() -> str:
    for name, value in _LEVELS.items():
        if value == _threshold:
            return name
    return "INFO"


def is_debug_enabled() -> bool:
    return _threshold <= _LEVELS["DEBUG"]


def debug_print(*args, **kwargs) -> None:
    """
    Print a message to stderr.

    The first argument may start with a level tag such as ``[DEBUG]`` or
    ``[WARNING]``; untagged messages count as INFO.
    """
    level = _LEVELS["INFO"]
    if args and isinstance(args[0], str) and args[0].startswith("["):
        tag = args[0][1:args[0].find("]")] if "]" in args[0] else ""
        level = _LEVELS.get(tag.upper(), level)
    if level < _threshold:
        return
    print(*args, file=sys.stderr, flush=True, **kwargs)


__all__ = ["debug_print", "set_log_level", "get_log_level", "is_debug_enabled"]
