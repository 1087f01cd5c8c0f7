"""notarychain: a permissioned hash-chain ledger for notarizing data assets,
periodically anchored to an Ethereum-format public chain."""

__version__ = "0.1.0"
