"""Node identity: a name bound to a secp256k1 keypair."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import crypto


@dataclass
class NodeIdentity:
    name: str
    private_key: int
    _pub: bytes | None = field(default=None, repr=False, compare=False)

    @property
    def public_key(self) -> bytes:
        if self._pub is None:
            self._pub = crypto.public_key_bytes(self.private_key)
        return self._pub

    @classmethod
    def generate(cls, name: str) -> "NodeIdentity":
        return cls(name=name, private_key=crypto.generate_private_key())

    def sign(self, digest: bytes) -> bytes:
        return crypto.sign_digest(digest, self.private_key)

    def save(self, path: str | Path) -> None:
        path = Path(path)
        payload = {"name": self.name, "private_key": f"{self.private_key:064x}"}
        path.write_text(json.dumps(payload, indent=2) + "\n")
        path.chmod(0o600)

    @classmethod
    def load(cls, path: str | Path) -> "NodeIdentity":
        payload = json.loads(Path(path).read_text())
        return cls(name=payload["name"],
                   private_key=crypto.private_key_from_hex(payload["private_key"]))
