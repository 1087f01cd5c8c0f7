"""Public-chain anchoring: transaction building/signing, backends, durable
anchor history, and the orchestration service."""

from .backends import (
    BackendConnectionError,
    HttpRpcBackend,
    PublicChainBackend,
    Receipt,
    TxRejectedError,
)
from .ethtx import (
    EthereumTx,
    TxFormatError,
    build_anchor_transaction,
    decode_raw,
    gas_with_margin,
    intrinsic_gas,
)
from .log import (
    STATUS_CONFIRMED,
    STATUS_FAILED,
    STATUS_SUBMITTED,
    AnchorLog,
    AnchorRecord,
)
from .mockchain import MockPublicChain, rpc_app
from .service import (
    AnchorOutcome,
    AnchorService,
    AnchorStatus,
    AnchorWallet,
    CostCheck,
    WALLET_KEY_ENV,
    WalletKeyError,
)

__all__ = [
    "AnchorLog", "AnchorOutcome", "AnchorRecord", "AnchorService",
    "AnchorStatus", "AnchorWallet", "BackendConnectionError", "CostCheck",
    "EthereumTx", "HttpRpcBackend", "MockPublicChain", "PublicChainBackend",
    "Receipt", "STATUS_CONFIRMED", "STATUS_FAILED", "STATUS_SUBMITTED",
    "TxFormatError", "TxRejectedError", "WALLET_KEY_ENV", "WalletKeyError",
    "build_anchor_transaction", "decode_raw", "gas_with_margin",
    "intrinsic_gas", "rpc_app",
]
