"""Command-line entry points: node lifecycle, ingestion, anchoring, and the
local verification client.

The verification verdict is machine-readable: the last line printed is always
"VERDICT: <status>" and the exit status encodes the outcome —

    0  asset found, local sha256 matches, anchor confirmed
    1  asset found and hash matches, but not (yet) publicly anchored
    2  asset not on the ledger
    3  server-side sha256 disagrees with the locally computed one
    4  file unreadable or API unreachable

The sha256 cross-check is not optional: a verdict never relies solely on the
server's md5 lookup.
"""

from __future__ import annotations

import json
import logging
import sys
import threading
import time
from pathlib import Path

import click
import httpx

from . import ingest
from .anchor import (
    AnchorLog,
    AnchorService,
    AnchorWallet,
    HttpRpcBackend,
    MockPublicChain,
    WALLET_KEY_ENV,
    WalletKeyError,
)
from .api import create_app
from .config import ServiceConfig, dump_default_config, load_config
from .identity import NodeIdentity
from .ledger import BlockLog, ChainState, create_genesis, validate_chain
from .network import Node

DEFAULT_API = "http://127.0.0.1:8440"

VERDICT_CONFIRMED = "Confirmed"
VERDICT_NOT_FOUND = "NotFound"
VERDICT_HASH_MISMATCH = "HashMismatch"
VERDICT_ERROR = "Error"

EXIT_VERIFIED = 0
EXIT_UNANCHORED = 1
EXIT_NOT_FOUND = 2
EXIT_HASH_MISMATCH = 3
EXIT_IO_ERROR = 4

# demo balance granted to the wallet on an in-process mock backend; the mock
# has no faucet, so an unfunded wallet could never anchor at all
MOCK_FUND_WEI = 10 * 10**18


def _make_client(api_url: str) -> httpx.Client:
    return httpx.Client(base_url=api_url, timeout=10.0)


# -- verification ------------------------------------------------------------


def verify_file(path: str | Path, api_url: str = DEFAULT_API, *,
                client: httpx.Client | None = None) -> tuple[int, dict, str]:
    """Hash a file locally, look it up, cross-check, and classify.

    Returns (exit_code, response_document, verdict).  The document is empty
    on I/O or transport failures.
    """
    try:
        md5, sha256, _count = ingest.hash_file(path)
    except OSError as exc:
        return EXIT_IO_ERROR, {}, f"{VERDICT_ERROR}: {exc}"

    owns = client is None
    if owns:
        client = _make_client(api_url)
    try:
        response = client.get(f"/assets/{md5}")
    except httpx.HTTPError as exc:
        return EXIT_IO_ERROR, {}, f"{VERDICT_ERROR}: {exc}"
    finally:
        if owns:
            client.close()

    if response.status_code == 404:
        return EXIT_NOT_FOUND, {}, VERDICT_NOT_FOUND
    if response.status_code != 200:
        return (EXIT_IO_ERROR, {},
                f"{VERDICT_ERROR}: unexpected status {response.status_code}")
    document = response.json()

    # the md5 index alone is never trusted: the server's sha256 must match
    # the one computed from the local bytes
    if document.get("sha256") != sha256:
        return EXIT_HASH_MISMATCH, document, VERDICT_HASH_MISMATCH
    status = document.get("ethStatus", "NotAnchored")
    if status == "Confirmed":
        return EXIT_VERIFIED, document, VERDICT_CONFIRMED
    return EXIT_UNANCHORED, document, status


# -- runtime assembly --------------------------------------------------------


def build_backends(config: ServiceConfig, wallet: AnchorWallet):
    backends = []
    for entry in config.backends:
        if entry == "mock":
            mock = MockPublicChain(gas_price_wei=config.gas_price_wei)
            mock.fund(wallet.address, MOCK_FUND_WEI)
            backends.append(mock)
        else:
            backends.append(HttpRpcBackend(entry))
    return backends


def build_runtime(config: ServiceConfig) -> tuple[Node, AnchorService]:
    """Load the chain from disk and assemble the node and anchor service."""
    identity = NodeIdentity.load(config.identity_path)
    block_log = BlockLog(config.block_log_path)
    blocks = block_log.read_all()
    if not blocks:
        raise click.ClickException(
            f"no chain at {config.block_log_path}; run 'init' first")
    report = validate_chain(blocks, config.difficulty)
    if not report:
        raise click.ClickException(f"stored chain invalid: {report.reason}")
    state = ChainState.from_blocks(blocks, config.difficulty)
    node = Node(identity, state, block_log=block_log)

    wallet = AnchorWallet()
    service = AnchorService(
        AnchorLog(config.anchor_log_path),
        build_backends(config, wallet),
        wallet,
        confirm_depth=config.confirm_depth,
        default_gas_price=config.gas_price_wei,
        fire_time_utc=config.fire_time_utc(),
        usd_per_eth=config.usd_per_eth,
        explorer_template=config.explorer_template,
    )
    return node, service


def schedule_loop(node: Node, service: AnchorService,
                  stop: threading.Event, interval: float = 30.0) -> None:
    """Fire the daily anchor when its time crosses; manual triggers are
    independent of this loop."""
    log = logging.getLogger("notarychain.schedule")
    while not stop.is_set():
        try:
            if service.run_schedule_tick() == "anchor":
                outcome = service.submit_anchor(node.state)
                if outcome.ok:
                    log.info("scheduled anchor at height %s via %s",
                             outcome.record.private_height, outcome.backend)
                else:
                    log.warning("scheduled anchor not submitted: %s",
                                outcome.reason)
        except Exception:  # the loop must survive backend hiccups
            log.exception("schedule tick failed")
        stop.wait(interval)


# -- click wiring ------------------------------------------------------------


@click.group()
def main() -> None:
    """Private notarization ledger with public-chain anchoring."""


@main.command()
@click.option("--dir", "data_dir", default="notarychain-data",
              show_default=True, help="Data directory to create.")
@click.option("--name", default="master", show_default=True,
              help="Node name recorded on chain.")
@click.option("--difficulty", default=4, show_default=True, type=int)
def init(data_dir: str, name: str, difficulty: int) -> None:
    """Create a new chain: keypair, genesis block, and a starter config."""
    root = Path(data_dir)
    root.mkdir(parents=True, exist_ok=True)
    config_path = root / "config.yaml"
    if (root / "node_key.json").exists():
        raise click.ClickException(f"{root} already holds a node key")
    config = dump_default_config(config_path, data_dir=root,
                                 difficulty=difficulty)
    identity = NodeIdentity.generate(name)
    identity.save(config.identity_path)
    genesis = create_genesis(identity, difficulty)
    BlockLog(config.block_log_path).append(genesis)
    click.echo(f"initialized chain in {root}")
    click.echo(f"genesis hash: {genesis.hash_hex}")
    click.echo(f"edit {config_path} and run: notarychain serve "
               f"--config {config_path}")


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True), help="Path to config.yaml.")
def serve(config_path: str) -> None:
    """Run the node: P2P listener, HTTP API, and the anchor scheduler."""
    import uvicorn

    logging.basicConfig(level=logging.INFO,
                        format="%(asctime)s %(name)s %(message)s")
    config = load_config(config_path)
    try:
        node, service = build_runtime(config)
    except WalletKeyError as exc:
        raise click.ClickException(
            f"{exc} (set {WALLET_KEY_ENV} to a 64-char hex key)") from None

    host, port = config.listen_hostport()
    node.serve(host, port)
    for peer_host, peer_port in config.peer_hostports():
        try:
            node.dial(peer_host, peer_port)
        except Exception as exc:
            logging.getLogger("notarychain").warning(
                "could not reach peer %s:%s: %s", peer_host, peer_port, exc)

    stop = threading.Event()
    ticker = threading.Thread(target=schedule_loop,
                              args=(node, service, stop), daemon=True)
    ticker.start()

    app = create_app(node, service, allowlist=tuple(config.allowlist))
    api_host, api_port = config.api_hostport()
    try:
        uvicorn.run(app, host=api_host, port=api_port, log_level="warning")
    finally:
        stop.set()
        node.close()


@main.command()
@click.option("--api", default=DEFAULT_API, show_default=True)
def status(api: str) -> None:
    """Print the node's status document."""
    try:
        with _make_client(api) as client:
            response = client.get("/status")
            response.raise_for_status()
            click.echo(json.dumps(response.json(), indent=2))
    except httpx.HTTPError as exc:
        raise click.ClickException(str(exc)) from None


@main.command("anchor-now")
@click.option("--api", default=DEFAULT_API, show_default=True)
@click.option("--backend", default=None,
              help="Configured backend name to use for this anchor.")
def anchor_now(api: str, backend: str | None) -> None:
    """Manually anchor the current confirmed blockhash right now."""
    body = {"backend": backend} if backend else {}
    try:
        with _make_client(api) as client:
            response = client.post("/anchors/trigger", json=body)
    except httpx.HTTPError as exc:
        raise click.ClickException(str(exc)) from None
    document = response.json()
    if response.status_code == 201:
        click.echo(json.dumps(document, indent=2))
        return
    raise click.ClickException(document.get("error", "anchor failed"))


@main.group("ingest")
def ingest_group() -> None:
    """Hash files and submit them for notarization."""


@ingest_group.command("scan")
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.option("--api", default=DEFAULT_API, show_default=True)
@click.option("--parallelism", default=4, show_default=True, type=int)
@click.option("--journal", default=None, type=click.Path(),
              help="Append state transitions to this JSONL file.")
def ingest_scan(directory: str, api: str, parallelism: int,
                journal: str | None) -> None:
    """One pass over DIRECTORY: every file is hashed and submitted."""
    with _make_client(api) as client:
        tasks = ingest.scan_directory(
            directory, client=client, parallelism=parallelism,
            journal=ingest.IngestJournal(journal) if journal else None)
    for task in tasks:
        line = f"{task.state:<20} {task.path}"
        if task.detail:
            line += f" ({task.detail})"
        click.echo(line)
    click.echo(f"{sum(t.accepted for t in tasks)}/{len(tasks)} accepted")
    if not ingest.all_accepted(tasks):
        sys.exit(1)


@ingest_group.command("watch")
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.option("--api", default=DEFAULT_API, show_default=True)
@click.option("--interval", default=5.0, show_default=True, type=float)
@click.option("--journal", default=None, type=click.Path())
def ingest_watch(directory: str, api: str, interval: float,
                 journal: str | None) -> None:
    """Poll DIRECTORY and submit new files as they appear (Ctrl-C stops)."""
    watcher = ingest.DirectoryWatcher(
        directory, api,
        journal=ingest.IngestJournal(journal) if journal else None)
    click.echo(f"watching {directory} every {interval}s")
    try:
        while True:
            for task in watcher.cycle():
                click.echo(f"{task.state:<20} {task.path}")
            time.sleep(interval)
    except KeyboardInterrupt:
        click.echo(f"{sum(t.accepted for t in watcher.results)}"
                   f"/{len(watcher.results)} accepted")


@main.command()
@click.argument("file", type=click.Path())
@click.option("--api", default=DEFAULT_API, show_default=True)
@click.option("--quiet", is_flag=True,
              help="Print only the verdict line.")
def verify(file: str, api: str, quiet: bool) -> None:
    """Hash FILE locally and verify its notarization and anchor status."""
    code, document, verdict = verify_file(file, api)
    if document and not quiet:
        click.echo(json.dumps(document, indent=2))
    click.echo(f"VERDICT: {verdict}")
    sys.exit(code)


if __name__ == "__main__":  # pragma: no cover
    main()
