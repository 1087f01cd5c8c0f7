"""Whole-chain validation."""

from __future__ import annotations

from dataclasses import dataclass

from ..codec import DecodeError
from .errors import LedgerError
from .state import ChainState
from .types import Block


@dataclass
class ValidationReport:
    valid: bool
    height: int | None = None   # first offending height when invalid
    reason: str | None = None
    blocks_checked: int = 0

    def __bool__(self) -> bool:
        return self.valid


def validate_chain(blocks: list[Block], difficulty: int) -> ValidationReport:
    """Replay the chain from genesis, checking every link, proof of work,
    signature, permission rule and asset-uniqueness constraint. Stops at the
    first offending block and reports its height and reason."""
    if not blocks:
        return ValidationReport(valid=False, reason="empty chain")
    try:
        state = ChainState.genesis(blocks[0], difficulty)
    except (LedgerError, DecodeError, ValueError) as exc:
        return ValidationReport(valid=False, height=0, reason=str(exc))
    checked = 1
    for block in blocks[1:]:
        try:
            state = state.append(block)
        except (LedgerError, DecodeError, ValueError) as exc:
            return ValidationReport(valid=False, height=checked, reason=str(exc),
                                    blocks_checked=checked)
        checked += 1
    return ValidationReport(valid=True, blocks_checked=checked)
