"""Deadline-budgeted majority-vote inference: statistics, simulation, orchestration."""

__version__ = "0.1.0"

from . import budget, stats, voting  # noqa: F401
