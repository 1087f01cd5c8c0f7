"""Peer-to-peer replication: framed transports, signed envelopes, and the
node logic that gates admission, spreads transactions and blocks, and
reconciles forks."""

from .messages import (
    CHALLENGE_LEN,
    KIND_BLOCK_BROADCAST,
    KIND_BLOCKS_REPLY,
    KIND_GET_BLOCKS,
    KIND_HELLO,
    KIND_HELLO_ACK,
    KIND_TX_BROADCAST,
    MESSAGE_KINDS,
    BlocksReply,
    Envelope,
    GetBlocks,
    Hello,
    HelloAck,
    new_challenge,
)
from .node import (
    SESSION_ACTIVE,
    SESSION_CLOSED,
    SESSION_HANDSHAKING,
    SESSION_REJECTED,
    DeliveryReport,
    ForkDecision,
    HandshakeError,
    IncompatibleNetworkError,
    Node,
    PeerSession,
    resolve_fork,
)
from .transport import (
    LoopbackTransport,
    TcpTransport,
    TransportClosed,
    TransportTimeout,
)

__all__ = [
    "CHALLENGE_LEN",
    "KIND_BLOCK_BROADCAST",
    "KIND_BLOCKS_REPLY",
    "KIND_GET_BLOCKS",
    "KIND_HELLO",
    "KIND_HELLO_ACK",
    "KIND_TX_BROADCAST",
    "MESSAGE_KINDS",
    "BlocksReply",
    "DeliveryReport",
    "Envelope",
    "ForkDecision",
    "GetBlocks",
    "HandshakeError",
    "Hello",
    "HelloAck",
    "IncompatibleNetworkError",
    "LoopbackTransport",
    "Node",
    "PeerSession",
    "SESSION_ACTIVE",
    "SESSION_CLOSED",
    "SESSION_HANDSHAKING",
    "SESSION_REJECTED",
    "TcpTransport",
    "TransportClosed",
    "TransportTimeout",
    "new_challenge",
    "resolve_fork",
]
