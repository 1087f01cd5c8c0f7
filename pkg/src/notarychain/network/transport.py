"""Message transports: framed TCP for real links, an in-process loopback
implementing the identical contract for deterministic tests.

Framing: 4-byte big-endian payload length, then the payload. A frame is the
byte form of one Envelope.
"""

from __future__ import annotations

import queue
import socket
import struct
import threading

MAX_FRAME = 64 * 1024 * 1024  # hard cap against hostile length prefixes


class TransportClosed(ConnectionError):
    """Peer went away (EOF, reset, or explicit close)."""


class TransportTimeout(TimeoutError):
    """The per-operation deadline elapsed."""


class TcpTransport:
    """One framed stream over a connected socket. Sends are serialized;
    a single reader thread per session calls recv()."""

    def __init__(self, sock: socket.socket):
        self._sock = sock
        self._send_lock = threading.Lock()
        self._recv_buffer = b""
        try:
            peer = sock.getpeername()
        except OSError:
            peer = None
        if isinstance(peer, tuple) and len(peer) >= 2:
            self.remote_address = f"{peer[0]}:{peer[1]}"
        else:  # AF_UNIX sockets name peers with a plain string (often empty)
            self.remote_address = str(peer) if peer else "?"

    @classmethod
    def connect(cls, host: str, port: int, timeout: float = 5.0) -> "TcpTransport":
        try:
            sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as exc:
            raise TransportClosed(f"connect {host}:{port}: {exc}") from exc
        sock.settimeout(None)
        return cls(sock)

    def send(self, payload: bytes, timeout: float | None = None) -> None:
        frame = struct.pack(">I", len(payload)) + payload
        with self._send_lock:
            try:
                self._sock.settimeout(timeout)
                self._sock.sendall(frame)
            except socket.timeout as exc:
                raise TransportTimeout(f"send to {self.remote_address}") from exc
            except OSError as exc:
                raise TransportClosed(str(exc)) from exc
            finally:
                try:
                    self._sock.settimeout(None)
                except OSError:
                    pass

    def recv(self, timeout: float | None = None) -> bytes:
        header = self._recv_exact(4, timeout)
        (length,) = struct.unpack(">I", header)
        if length > MAX_FRAME:
            raise TransportClosed(f"oversized frame: {length} bytes")
        return self._recv_exact(length, timeout)

    def _recv_exact(self, n: int, timeout: float | None) -> bytes:
        try:
            self._sock.settimeout(timeout)
        except OSError as exc:
            raise TransportClosed(str(exc)) from exc
        chunks = []
        remaining = n
        while remaining:
            try:
                chunk = self._sock.recv(remaining)
            except socket.timeout as exc:
                raise TransportTimeout(
                    f"recv from {self.remote_address}") from exc
            except OSError as exc:
                raise TransportClosed(str(exc)) from exc
            if not chunk:
                raise TransportClosed("peer closed the connection")
            chunks.append(chunk)
            remaining -= len(chunk)
        return b"".join(chunks)

    def close(self) -> None:
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


class LoopbackTransport:
    """In-memory pipe endpoint; create_pair() wires two together."""

    def __init__(self, label: str = "loopback"):
        self._inbox: queue.Queue[bytes | None] = queue.Queue()
        self._peer: "LoopbackTransport | None" = None
        self._closed = threading.Event()
        self.remote_address = label

    @classmethod
    def create_pair(cls, label_a: str = "a", label_b: str = "b"):
        a, b = cls(label_b), cls(label_a)
        a._peer, b._peer = b, a
        return a, b

    def send(self, payload: bytes, timeout: float | None = None) -> None:
        if self._closed.is_set() or self._peer is None \
                or self._peer._closed.is_set():
            raise TransportClosed("loopback closed")
        self._peer._inbox.put(bytes(payload))

    def recv(self, timeout: float | None = None) -> bytes:
        if self._closed.is_set():
            raise TransportClosed("loopback closed")
        try:
            item = self._inbox.get(timeout=timeout)
        except queue.Empty as exc:
            raise TransportTimeout("loopback recv") from exc
        if item is None:
            raise TransportClosed("peer closed the connection")
        return item

    def close(self) -> None:
        if not self._closed.is_set():
            self._closed.set()
            if self._peer is not None:
                self._peer._inbox.put(None)  # wake the peer's reader with EOF
