"""Ledger error types."""


class LedgerError(Exception):
    pass


class AssetFormatError(LedgerError):
    """Malformed asset fields (md5/sha256 shape, missing values)."""


class InvalidTransactionError(LedgerError):
    def __init__(self, message: str, tx_id: str | None = None):
        super().__init__(message)
        self.tx_id = tx_id


class DuplicateAssetError(InvalidTransactionError):
    """md5 index already issued on chain or earlier in the same batch."""

    def __init__(self, md5_index: str, tx_id: str | None = None):
        super().__init__(f"asset {md5_index} already issued", tx_id)
        self.md5_index = md5_index


class PermissionDeniedError(InvalidTransactionError):
    def __init__(self, node: str, permission: str, tx_id: str | None = None):
        super().__init__(f"node {node!r} lacks {permission!r} permission", tx_id)
        self.node = node
        self.permission = permission


class InvalidBlockError(LedgerError):
    pass


class StaleParentError(InvalidBlockError):
    """Block does not extend the current tip."""


class InvalidProofError(InvalidBlockError):
    """Block hash does not meet the difficulty target."""


class InsufficientDepthError(LedgerError):
    """Chain is shorter than the requested confirmation depth."""
