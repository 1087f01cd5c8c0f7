"""HTTP service layer."""

from .app import (
    ETH_CONFIRMED,
    ETH_NOT_ANCHORED,
    ETH_PENDING,
    SourceGate,
    create_app,
)
from .schemas import IngestMessage, rfc1123

__all__ = [
    "ETH_CONFIRMED",
    "ETH_NOT_ANCHORED",
    "ETH_PENDING",
    "IngestMessage",
    "SourceGate",
    "create_app",
    "rfc1123",
]
