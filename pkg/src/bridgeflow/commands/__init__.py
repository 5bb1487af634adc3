"""
Subcommand implementations for the ``bridgeflow`` command line tool.

Each module exposes ``run(args, settings) -> dict``. Modules are imported
lazily by ``bridgeflow.main`` so that thread settings apply before numpy loads.
"""

COMMANDS = ("gen", "cost", "ot", "train", "predict", "eval")

__all__ = ["COMMANDS"]
