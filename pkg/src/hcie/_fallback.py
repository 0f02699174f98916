"""Pure-Python (numpy) implementations of the hot kernels.

Same functions and signatures as the compiled ``_kernels`` module; selected
by :mod:`hcie._backend` when the extension is unavailable.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ._tables import line_table

NAME = "python"


def logistic_bytes(x0: int, mu: int, precision: int, count: int) -> np.ndarray:
    """Top 8 fractional bits of states ``x(1) .. x(count)`` of the fixed-point map."""
    L = precision
    one = 1 << L
    top = one - 1
    mu_shift = L - 2
    out = np.empty(count, dtype=np.uint8)
    x = x0
    for n in range(count):
        x = ((mu * ((x * (one - x)) >> L)) >> mu_shift)
        if x > top:
            x = top
        out[n] = (x >> (L - 8)) if L >= 8 else (x << (8 - L))
    return out


@lru_cache(maxsize=64)
def _stages(sm: int, sn: int):
    table = line_table(sm, sn)
    nlines = table.start.size - 1
    lengths = np.diff(table.start)
    line_of = np.repeat(np.arange(nlines), lengths)
    offset = np.arange(table.pos.size) - table.start[line_of]
    stages = []
    for kind in range(4):
        lines = np.flatnonzero(table.kind == kind)
        lo, hi = table.start[lines[0]], table.start[lines[-1] + 1]
        g = line_of[lo:hi]
        stages.append((
            lines[0], lines.size,
            table.pos[lo:hi], g - lines[0], offset[lo:hi],
            lengths[g], table.start[g] - lo, table.sign[lines].astype(np.int64),
        ))
    return stages


def sub_hcie_gather(sm, sn, bits, alpha, beta, gamma, no):
    """Gather map of Sub_HCIE: output position ``t`` holds input ``src[t]``."""
    bits = np.asarray(bits, dtype=np.int64)
    seg = 3 * sm + 3 * sn - 2
    if bits.size < seg * no:
        raise ValueError("not enough bits for Sub_HCIE")
    a = np.arange(sm * sn, dtype=np.int64)
    stages = _stages(sm, sn)
    for ite in range(no):
        q = seg * ite
        p = alpha + beta * bits[q] + gamma * bits[q + 1]
        for first, count, pos, g, t, n, lstart, sign in stages:
            b = bits[q + first: q + first + count]
            shift = sign * p * (1 - 2 * b)
            src = lstart + (t + shift[g]) % n
            a[pos] = a[pos[src]]
    return a


def densify(codes):
    """Relabel values with dense ids ``0..k-1`` in first-occurrence order."""
    codes = np.asarray(codes, dtype=np.int64)
    if codes.size == 0:
        return np.zeros(0, dtype=np.int64), 0
    _, first, inverse = np.unique(codes, return_index=True, return_inverse=True)
    rank = np.empty(first.size, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(first.size)
    return rank[inverse.ravel()], int(first.size)


def bucket_order(ids, nb):
    """Positions grouped by id (ascending), raster order within each id."""
    return np.argsort(np.asarray(ids, dtype=np.int64), kind="stable")


def brute_force_scan(plain, cipher, M, N, sm, sn, alpha, beta, gamma, no,
                     precision, x0_values, mu_values):
    """All ``(x0, mu)`` pairs whose HCIE encryption maps ``plain`` to ``cipher``."""
    rows, cols = M // sm, N // sn
    K = rows * cols
    seg = (3 * sm + 3 * sn - 2) * no
    nbits = (1 + K) * seg
    nbytes = -(-nbits // 8)

    def blocks(img):
        a = np.asarray(img, dtype=np.int64).reshape(rows, sm, cols, sn)
        return a.swapaxes(1, 2).reshape(K, sm * sn)

    pb, cb = blocks(plain), blocks(cipher)
    matches = []
    for mu in mu_values:
        for x0 in x0_values:
            bits = np.unpackbits(logistic_bytes(int(x0), int(mu), precision, nbytes))[:nbits]
            g = sub_hcie_gather(sm, sn, bits[:seg], alpha, beta, gamma, no)
            order = g[g < K]
            for t in range(K):
                lo = (1 + t) * seg
                low = sub_hcie_gather(sm, sn, bits[lo:lo + seg], alpha, beta, gamma, no)
                if not np.array_equal(pb[order[t]][low], cb[t]):
                    break
            else:
                matches.append((int(x0), int(mu)))
    return matches
