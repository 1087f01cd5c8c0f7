"""On-disk chain persistence.

The block log is an append-only file of length-prefixed canonical block
records (u32 big-endian length, then the block bytes; layout in
docs/wire-formats.md). Because the canonical encoding is deterministic, two
nodes holding the same chain produce byte-identical logs.

A sidecar index (<log>.idx, u64 big-endian offsets, one per block) makes
random access cheap; it is purely derived and is rebuilt whenever it is
missing or does not match the log.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

from ..codec import DecodeError
from .types import Block


class BlockLog:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.index_path = self.path.with_suffix(self.path.suffix + ".idx")
        self._offsets: list[int] = []
        if self.path.exists():
            if not self._load_index():
                self.rebuild_index()
        else:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.touch()
            self._write_index()

    def __len__(self) -> int:
        return len(self._offsets)

    def append(self, block: Block) -> None:
        record = block.canonical_bytes()
        with open(self.path, "ab") as fh:
            offset = fh.tell()
            fh.write(struct.pack(">I", len(record)))
            fh.write(record)
            fh.flush()
            os.fsync(fh.fileno())
        self._offsets.append(offset)
        with open(self.index_path, "ab") as fh:
            fh.write(struct.pack(">Q", offset))
            fh.flush()
            os.fsync(fh.fileno())

    def read_all(self) -> list[Block]:
        return [self.read_at(i) for i in range(len(self._offsets))]

    def read_at(self, position: int) -> Block:
        with open(self.path, "rb") as fh:
            fh.seek(self._offsets[position])
            (length,) = struct.unpack(">I", fh.read(4))
            data = fh.read(length)
        if len(data) != length:
            raise DecodeError(f"truncated block record at position {position}")
        return Block.from_bytes(data)

    def rewrite(self, blocks: list[Block]) -> None:
        """Atomically replace the whole log (fork adoption)."""
        tmp = self.path.with_suffix(".tmp")
        offsets = []
        with open(tmp, "wb") as fh:
            for block in blocks:
                offsets.append(fh.tell())
                record = block.canonical_bytes()
                fh.write(struct.pack(">I", len(record)))
                fh.write(record)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, self.path)
        self._offsets = offsets
        self._write_index()

    def rebuild_index(self) -> list[int]:
        """Scan the log and regenerate the offset index."""
        offsets = []
        size = self.path.stat().st_size
        with open(self.path, "rb") as fh:
            while True:
                offset = fh.tell()
                raw = fh.read(4)
                if not raw:
                    break
                if len(raw) < 4:
                    raise DecodeError("truncated length prefix in block log")
                (length,) = struct.unpack(">I", raw)
                if offset + 4 + length > size:
                    raise DecodeError("block record overruns the log file")
                offsets.append(offset)
                fh.seek(length, os.SEEK_CUR)
        self._offsets = offsets
        self._write_index()
        return offsets

    def _write_index(self) -> None:
        tmp = self.index_path.with_suffix(".tmp")
        with open(tmp, "wb") as fh:
            for offset in self._offsets:
                fh.write(struct.pack(">Q", offset))
        os.replace(tmp, self.index_path)

    def _load_index(self) -> bool:
        """Load the sidecar; returns False when absent or inconsistent."""
        if not self.index_path.exists():
            return False
        raw = self.index_path.read_bytes()
        if len(raw) % 8:
            return False
        offsets = [struct.unpack(">Q", raw[i:i + 8])[0] for i in range(0, len(raw), 8)]
        size = self.path.stat().st_size
        # Cheap consistency probe: offsets ascend and the last record ends
        # exactly at EOF.
        if offsets:
            if any(b <= a for a, b in zip(offsets, offsets[1:])):
                return False
            try:
                with open(self.path, "rb") as fh:
                    fh.seek(offsets[-1])
                    (length,) = struct.unpack(">I", fh.read(4))
            except struct.error:
                return False
            if offsets[-1] + 4 + length != size:
                return False
        elif size != 0:
            return False
        self._offsets = offsets
        return True
