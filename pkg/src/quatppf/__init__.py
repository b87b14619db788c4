"""Velocity-free unit-quaternion observer-based attitude tracking with
prescribed performance."""

__version__ = "0.1.0"

from .config import SimConfig, ValidationError, load_config, paper_config, validate  # noqa: E402
from .simulate import ObserverController, SimLogRecord, read_log, run, summarize, write_log  # noqa: E402

__all__ = [
    "SimConfig", "ValidationError", "load_config", "paper_config", "validate",
    "ObserverController", "SimLogRecord", "read_log", "run", "summarize", "write_log",
]
