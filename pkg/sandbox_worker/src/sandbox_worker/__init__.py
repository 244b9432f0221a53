"""Pooled persistent Python execution workers with strict timeouts."""

__version__ = "0.1.0"

from .pool import WorkerPool  # noqa: F401
from .server import SandboxServer, serve  # noqa: F401
