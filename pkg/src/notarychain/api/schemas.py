"""Wire schemas for the HTTP service.

The submission body uses dotted key names ("hash.md5", "processed.ts", ...)
and the verification response uses the fixed ten-key shape; both are frozen
contracts, documented in docs/api.md.
"""

from __future__ import annotations

import re
from email.utils import formatdate

from pydantic import BaseModel, ConfigDict, Field, StrictInt, StrictStr, field_validator

from ..ledger.types import AssetRecord

_MD5_RE = re.compile(r"^[0-9a-f]{32}$")
_SHA256_RE = re.compile(r"^[0-9a-f]{64}$")


def rfc1123(unix_seconds: int) -> str:
    """'Thu, 05 Apr 2018 20:09:38 GMT' — the timestamp format of every
    human-facing field."""
    return formatdate(unix_seconds, usegmt=True)


class IngestMessage(BaseModel):
    """Submission body: file hashes, capture timestamp, and origin.

    Extra top-level keys (free-form pipeline metadata) are tolerated and
    ignored; only the canonical fields are notarized.
    """

    model_config = ConfigDict(populate_by_name=True, extra="allow")

    md5: StrictStr = Field(alias="hash.md5")
    sha256: StrictStr = Field(alias="hash.sha256")
    processed_ts: StrictInt = Field(alias="processed.ts")
    source_uri: StrictStr = Field(alias="source.uri")
    parent_md5: StrictStr | None = Field(default=None, alias="parent.md5")

    @field_validator("md5", "parent_md5")
    @classmethod
    def _md5_hex(cls, v):
        if v is not None and not _MD5_RE.fullmatch(v):
            raise ValueError("must be exactly 32 lowercase hex characters")
        return v

    @field_validator("sha256")
    @classmethod
    def _sha256_hex(cls, v):
        if not _SHA256_RE.fullmatch(v):
            raise ValueError("must be exactly 64 lowercase hex characters")
        return v

    @field_validator("processed_ts")
    @classmethod
    def _ts_range(cls, v):
        if not 0 <= v < 1 << 64:
            raise ValueError("must be a non-negative epoch-milliseconds value")
        return v

    @field_validator("source_uri")
    @classmethod
    def _source_nonempty(cls, v):
        if not v.strip():
            raise ValueError("must not be empty")
        return v

    def to_asset_record(self) -> AssetRecord:
        return AssetRecord(md5_index=self.md5, sha256=self.sha256,
                           source_uri=self.source_uri,
                           processed_ts=self.processed_ts,
                           parent_md5=self.parent_md5)
