#!/usr/bin/env python3
"""Compare the compiled hash kernels against the pure-Python fallback.

Covers the three kernel entry points (double_sha256, keccak256, pow_search)
for every importable backend, plus signature verification with and without
the OpenSSL-backed fast path. Run from a source checkout:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --difficulty 5 --repeat 7

Results are best-of-N wall times; the ratio column is fallback time over
compiled time for the same workload.
"""

from __future__ import annotations

import argparse
import os
import secrets
import time

from notarychain import crypto
from notarychain._kernels import BACKEND, available_backends
from notarychain.ledger.mining import HEADER_NONCE_OFFSET
from notarychain.ledger.types import ZERO_ROOT, BlockHeader


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        started = time.perf_counter()
        fn()
        times.append(time.perf_counter() - started)
    return min(times)


RUN_BYTE_BUDGET = 256 << 10  # keeps pure-python keccak runs near a second


def calls_for(size: int, cap: int) -> int:
    return max(4, min(cap, RUN_BYTE_BUDGET // size))


def hash_workloads(sizes: list[int], cap: int):
    payloads = {size: secrets.token_bytes(size) for size in sizes}

    def make(kernel, size):
        data = payloads[size]
        count = calls_for(size, cap)

        def run():
            for _ in range(count):
                kernel(data)
        return run

    for name in ("double_sha256", "keccak256"):
        for size in sizes:
            label = f"{name:<13} {size:>6}B x{calls_for(size, cap)}"
            yield label, name, size, make


def pow_workload(impl, difficulty: int):
    # a realistic header: the nonce field sits at a fixed offset in the
    # canonical bytes, exactly as the miner patches it
    header = BlockHeader(height=1, prev_hash="11" * 32, tx_root=ZERO_ROOT,
                         timestamp=1_700_000_000, nonce=0, miner="bench")
    encoded = header.canonical_bytes()

    def run():
        found = impl.pow_search(encoded, HEADER_NONCE_OFFSET, difficulty)
        assert found is not None
    return run


def bench_kernels(args) -> None:
    impls = available_backends()
    print(f"kernel backends available: {', '.join(impls)} "
          f"(selected at import: {BACKEND})")
    print()

    rows: list[tuple[str, dict[str, float]]] = []
    for label, name, size, make in hash_workloads(args.sizes, args.max_calls):
        timings = {backend: best_of(make(getattr(impl, name), size),
                                    args.repeat)
                   for backend, impl in impls.items()}
        rows.append((label, timings))

    label = f"pow_search    difficulty {args.difficulty}"
    rows.append((label, {backend: best_of(pow_workload(impl, args.difficulty),
                                          args.repeat)
                         for backend, impl in impls.items()}))

    columns = sorted(impls)
    header = f"{'workload':<32}" + "".join(f"{c:>12}" for c in columns)
    if len(columns) > 1:
        header += f"{'ratio':>8}"
    print(header)
    for label, timings in rows:
        line = f"{label:<32}"
        for backend in columns:
            line += f"{timings[backend] * 1000:>10.2f}ms"
        if len(columns) > 1 and "c" in timings and timings["c"]:
            line += f"{timings['python'] / timings['c']:>7.1f}x"
        print(line)


def bench_verify(args) -> None:
    priv = crypto.generate_private_key()
    pub = crypto.public_key_bytes(priv)
    digest = crypto.double_sha256(b"bench")
    sig = crypto.sign_digest(digest, priv)

    def run_with(backend: str) -> float:
        previous = crypto.VERIFY_BACKEND
        crypto.VERIFY_BACKEND = backend
        try:
            def run():
                for _ in range(args.verify_iterations):
                    assert crypto.verify_digest(digest, sig, pub)
            return best_of(run, args.repeat)
        finally:
            crypto.VERIFY_BACKEND = previous

    print()
    print(f"signature verification x{args.verify_iterations} "
          f"(selected at import: {crypto.VERIFY_BACKEND})")
    backends = ["pure"]
    if crypto.VERIFY_BACKEND == "openssl":
        backends.insert(0, "openssl")
    timings = {backend: run_with(backend) for backend in backends}
    for backend in backends:
        per_call = timings[backend] / args.verify_iterations * 1000
        print(f"  {backend:<8} {timings[backend] * 1000:>9.2f}ms total "
              f"({per_call:.3f}ms/verify)")
    if len(timings) > 1:
        print(f"  ratio    {timings['pure'] / timings['openssl']:>8.1f}x")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3,
                        help="take the best of this many runs (default 3)")
    parser.add_argument("--max-calls", type=int, default=1000,
                        help="cap on hash calls per run (default 1000; "
                             "small payloads hit the cap, large ones are "
                             "limited by a per-run byte budget)")
    parser.add_argument("--sizes", type=int, nargs="+",
                        default=[64, 4096, 65536],
                        help="payload sizes in bytes")
    parser.add_argument("--difficulty", type=int, default=4,
                        help="leading zero hex chars for the pow workload")
    parser.add_argument("--verify-iterations", type=int, default=200,
                        help="signature verifications per run (default 200)")
    args = parser.parse_args()

    if os.environ.get("NOTARYCHAIN_PURE_KERNELS"):
        print("note: NOTARYCHAIN_PURE_KERNELS is set; the compiled backend "
              "is still benchmarked if importable\n")
    bench_kernels(args)
    bench_verify(args)


if __name__ == "__main__":
    main()
