"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--csv out.csv]

Each case runs on every available backend; the last column is the fallback
time divided by the compiled time.
"""
import argparse
import csv
import sys
import time

import numpy as np

from hcie import _backend
from hcie.model import PublicParams


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng):
    bits = {s: rng.integers(0, 2, (3 * s + 3 * s - 2) * 9).astype(np.uint8) for s in (16, 32, 256)}
    codes = rng.integers(0, 1 << 20, 3 * 256 * 256)
    ids = rng.integers(0, 60000, 2 * 256 * 256)
    plain = rng.integers(0, 256, (16, 16))
    p = PublicParams(4, 4, 1, 1, 1, 1)
    from hcie.cipher import encrypt
    from hcie.keystream import Key
    from hcie.model import Image
    cipher = encrypt(Image(plain), Key(11, 50, 6), p).pixels
    x0s = np.arange(1, 64, dtype=np.uint64)
    mus = np.arange(1, 65, dtype=np.uint64)
    return [
        ("logistic_bytes L=32 x4096", lambda k: k.logistic_bytes(0x50000001, 0xFFFFFFF0, 32, 4096)),
        ("sub_hcie 16x16 no=9", lambda k: k.sub_hcie_gather(16, 16, bits[16], 4, 2, 1, 9)),
        ("sub_hcie 32x32 no=9", lambda k: k.sub_hcie_gather(32, 32, bits[32], 4, 2, 1, 9)),
        ("sub_hcie 256x256 no=9", lambda k: k.sub_hcie_gather(256, 256, bits[256], 6, 3, 3, 9)),
        ("densify 196608 codes", lambda k: k.densify(codes)),
        ("bucket_order 131072 ids", lambda k: k.bucket_order(ids, 60000)),
        ("brute_force_scan L=6 (4032 keys)",
         lambda k: k.brute_force_scan(plain, cipher, 16, 16, 4, 4, 1, 1, 1, 1, 6, x0s, mus)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--csv")
    args = ap.parse_args(argv)

    backends = _backend.available()
    if len(backends) == 1:
        print("compiled extension not built; timing the fallback only", file=sys.stderr)
    rows = []
    for name, fn in cases(np.random.default_rng(0)):
        t = {k.NAME: best_of(lambda: fn(k), args.repeat) for k in backends}
        speedup = t["python"] / t["compiled"] if "compiled" in t else float("nan")
        rows.append((name, t.get("compiled", float("nan")), t["python"], speedup))

    print(f"{'case':36s} {'compiled ms':>12s} {'python ms':>12s} {'speedup':>8s}")
    for name, c, py, s in rows:
        print(f"{name:36s} {c * 1e3:12.3f} {py * 1e3:12.3f} {s:8.1f}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["case", "compiled_ms", "python_ms", "speedup"])
            w.writerows((n, f"{c * 1e3:.4f}", f"{py * 1e3:.4f}", f"{s:.2f}") for n, c, py, s in rows)


if __name__ == "__main__":
    main()
