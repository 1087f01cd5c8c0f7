"""Service configuration: one YAML file describing a node deployment.

Unknown keys are rejected loudly — a typo'd setting silently falling back to
a default is worse than a startup failure.  The anchor wallet key is *not*
part of the file; it arrives only through the environment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, fields
from datetime import time as dtime
from pathlib import Path

import yaml

DEFAULT_EXPLORER_TEMPLATE = "https://etherscan.io/tx/{tx_hash}"


class ConfigError(ValueError):
    """Malformed or contradictory configuration."""


@dataclass
class ServiceConfig:
    data_dir: Path = Path("notarychain-data")
    network_name: str = "notarychain"
    difficulty: int = 4                    # leading zero hex chars of PoW hash
    listen: str = "127.0.0.1:7740"         # peer-to-peer endpoint
    api_listen: str = "127.0.0.1:8440"
    peers: list[str] = field(default_factory=list)
    allowlist: list[str] = field(default_factory=lambda: ["127.0.0.1/32"])
    gas_price_wei: int = 4_000_000_000
    fire_time: str = "02:00"               # daily anchor schedule, UTC
    confirm_depth: int = 6
    backends: list[str] = field(default_factory=lambda: ["mock"])
    usd_per_eth: float = 600.0
    explorer_template: str = DEFAULT_EXPLORER_TEMPLATE
    ingest_parallelism: int = 4

    # -- derived paths -----------------------------------------------------

    @property
    def identity_path(self) -> Path:
        return self.data_dir / "node_key.json"

    @property
    def block_log_path(self) -> Path:
        return self.data_dir / "blocks.log"

    @property
    def anchor_log_path(self) -> Path:
        return self.data_dir / "anchors.db"

    @property
    def journal_path(self) -> Path:
        return self.data_dir / "ingest-journal.jsonl"

    @property
    def source_prefix(self) -> str:
        return f"network.{self.network_name}/ingest"

    # -- parsing helpers ---------------------------------------------------

    def fire_time_utc(self) -> dtime:
        return parse_fire_time(self.fire_time)

    def listen_hostport(self) -> tuple[str, int]:
        return parse_hostport(self.listen)

    def api_hostport(self) -> tuple[str, int]:
        return parse_hostport(self.api_listen)

    def peer_hostports(self) -> list[tuple[str, int]]:
        return [parse_hostport(p) for p in self.peers]

    def api_url(self) -> str:
        host, port = self.api_hostport()
        return f"http://{host}:{port}"

    def validate(self) -> "ServiceConfig":
        if not 1 <= self.difficulty <= 16:
            raise ConfigError("difficulty must be between 1 and 16 hex chars")
        if self.confirm_depth < 0:
            raise ConfigError("confirm_depth must be >= 0")
        if self.gas_price_wei <= 0:
            raise ConfigError("gas_price_wei must be positive")
        if self.usd_per_eth <= 0:
            raise ConfigError("usd_per_eth must be positive")
        if not self.backends:
            raise ConfigError("at least one backend must be configured")
        if self.ingest_parallelism < 1:
            raise ConfigError("ingest_parallelism must be >= 1")
        try:  # anchor views render the template with tx_hash=<hex>
            self.explorer_template.format(tx_hash="0" * 64)
        except (KeyError, IndexError, ValueError) as exc:
            raise ConfigError(
                f"explorer_template must only use the {{tx_hash}} "
                f"placeholder: {exc}") from None
        self.fire_time_utc()
        self.listen_hostport()
        self.api_hostport()
        self.peer_hostports()
        return self


def parse_fire_time(text: str) -> dtime:
    match = re.fullmatch(r"(\d{1,2}):(\d{2})", str(text).strip())
    if not match:
        raise ConfigError(f"fire_time {text!r} is not HH:MM")
    hour, minute = int(match.group(1)), int(match.group(2))
    if hour > 23 or minute > 59:
        raise ConfigError(f"fire_time {text!r} out of range")
    return dtime(hour=hour, minute=minute)


def parse_hostport(text: str) -> tuple[str, int]:
    host, sep, port = str(text).rpartition(":")
    if not sep or not host:
        raise ConfigError(f"endpoint {text!r} is not host:port")
    try:
        number = int(port)
    except ValueError:
        raise ConfigError(f"endpoint {text!r} has a non-numeric port") from None
    if not 0 <= number <= 65535:
        raise ConfigError(f"endpoint {text!r} port out of range")
    return host, number


def load_config(path: str | Path) -> ServiceConfig:
    """Read YAML, apply defaults, reject unknown keys, validate ranges."""
    raw = yaml.safe_load(Path(path).read_text())
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be a mapping")
    known = {f.name for f in fields(ServiceConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    if "data_dir" in raw:
        raw["data_dir"] = Path(raw["data_dir"])
    config = ServiceConfig(**raw)
    return config.validate()


def dump_default_config(path: str | Path, **overrides) -> ServiceConfig:
    """Write a commented starter file; returns the effective config."""
    config = ServiceConfig(**overrides).validate()
    lines = [
        "# notarychain node configuration",
        "# The anchor wallet key is NOT configured here: export it as",
        "# NOTARYCHAIN_WALLET_KEY (64 hex chars) in the environment.",
        f"data_dir: {config.data_dir}",
        f"network_name: {config.network_name}",
        f"difficulty: {config.difficulty}",
        f"listen: {config.listen}",
        f"api_listen: {config.api_listen}",
        f"peers: {config.peers}",
        f"allowlist: {config.allowlist}",
        f"gas_price_wei: {config.gas_price_wei}",
        f"fire_time: \"{config.fire_time}\"",
        f"confirm_depth: {config.confirm_depth}",
        f"backends: {config.backends}",
        f"usd_per_eth: {config.usd_per_eth}",
        f"explorer_template: {config.explorer_template}",
        f"ingest_parallelism: {config.ingest_parallelism}",
    ]
    Path(path).write_text("\n".join(lines) + "\n")
    return config
