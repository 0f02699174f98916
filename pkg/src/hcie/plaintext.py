"""Known- and chosen-plaintext attacks on permutation-only ciphers.

Candidate sets are computed by bucketing positions on their value tuples
across all known images (hash/bucket passes, linear in ``n * H * W``), never
by pairwise set intersection.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _backend
from .errors import DimensionError, InconsistentPairsError, ParamError
from .model import (
    HierarchicalPermutation,
    Image,
    PermutationMatrix,
    PublicParams,
    invert,
    partition,
)

FEATURE_KINDS = ("mean", "histogram")


# -- candidate matrices -------------------------------------------------------

class CandidateMatrix:
    """Candidate destinations for every source position.

    ``plain_bucket[s]`` and ``cipher_bucket[c]`` are flat arrays of bucket ids;
    the candidate set of source ``s`` is every cipher position sharing its id.
    A source whose tuple matches no cipher position has an empty set.
    """

    __slots__ = ("shape", "plain_bucket", "cipher_bucket", "nbuckets")

    def __init__(self, shape, plain_bucket, cipher_bucket, nbuckets: int):
        self.shape = tuple(shape)
        self.plain_bucket = np.asarray(plain_bucket, dtype=np.int64)
        self.cipher_bucket = np.asarray(cipher_bucket, dtype=np.int64)
        self.nbuckets = int(nbuckets)

    def _counts(self):
        nb = self.nbuckets
        return (np.bincount(self.plain_bucket, minlength=nb),
                np.bincount(self.cipher_bucket, minlength=nb))

    def candidates(self, i: int, j: int) -> list[tuple[int, int]]:
        W = self.shape[1]
        hits = np.flatnonzero(self.cipher_bucket == self.plain_bucket[i * W + j])
        return [divmod(int(c), W) for c in hits]

    def cardinality(self) -> np.ndarray:
        """``|W_hat(i, j)|`` for every source position, as an ``H x W`` array."""
        _, cc = self._counts()
        return cc[self.plain_bucket].reshape(self.shape)

    @property
    def consistent(self) -> bool:
        cp, cc = self._counts()
        return bool(np.array_equal(cp, cc))

    @property
    def ambiguous(self) -> np.ndarray:
        """Flat source positions whose candidate set has more than one element."""
        return np.flatnonzero(self.cardinality().ravel() > 1)

    def contains(self, truth: PermutationMatrix) -> np.ndarray:
        """Per-source flag: is the true destination inside the candidate set."""
        return self.cipher_bucket[truth.dest] == self.plain_bucket


def avg_cardinality(cm: CandidateMatrix) -> Fraction:
    card = cm.cardinality()
    return Fraction(int(card.sum()), card.size)


def error_ratio(truth: Image, decrypted: Image) -> float:
    if truth.shape != decrypted.shape:
        raise DimensionError(f"{truth.shape} vs {decrypted.shape}")
    return float(np.mean(truth.pixels != decrypted.pixels))


# -- generic estimation -------------------------------------------------------

@dataclass(frozen=True)
class KnownPairSet:
    """``n`` plain-images and their cipher-images, all the same size and levels."""

    plain: tuple[Image, ...]
    cipher: tuple[Image, ...]

    def __post_init__(self):
        object.__setattr__(self, "plain", tuple(self.plain))
        object.__setattr__(self, "cipher", tuple(self.cipher))
        if not self.plain:
            raise ParamError("at least one known pair is required")
        if len(self.plain) != len(self.cipher):
            raise ParamError(f"{len(self.plain)} plain-images vs {len(self.cipher)} cipher-images")
        shape, levels = self.plain[0].shape, self.plain[0].levels
        for img in self.plain + self.cipher:
            if img.shape != shape or img.levels != levels:
                raise DimensionError("all images in a pair set must share size and levels")

    def __len__(self):
        return len(self.plain)

    @property
    def shape(self) -> tuple[int, int]:
        return self.plain[0].shape

    @property
    def levels(self) -> int:
        return self.plain[0].levels

    def head(self, n: int) -> KnownPairSet:
        return KnownPairSet(self.plain[:n], self.cipher[:n])

    def stacks(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.stack([f.pixels.ravel() for f in self.plain]),
                np.stack([f.pixels.ravel() for f in self.cipher]))


def tuple_ids(plain_vals, cipher_vals, base: int, start=None):
    """Joint dense ids of per-position value tuples on both sides.

    ``plain_vals`` and ``cipher_vals`` are ``(n, P)`` arrays with entries in
    ``[0, base)``.  Refines one image at a time so codes stay below
    ``2 * P * base`` however large ``n`` is.
    """
    P = plain_vals.shape[1]
    ids = np.zeros(2 * P, dtype=np.int64) if start is None else np.asarray(start, dtype=np.int64)
    nb = int(ids.max()) + 1 if ids.size else 0
    for p_row, c_row in zip(plain_vals, cipher_vals):
        codes = ids * base + np.concatenate([p_row, c_row])
        ids, nb = _backend.densify(codes)
    return ids[:P], ids[P:], max(nb, 1)


def pair_buckets(plain_ids, cipher_ids, nb: int, strict: bool = True) -> np.ndarray:
    """Destination per source: pair matching buckets in raster order.

    With ``strict`` an unmatched source raises; otherwise leftovers on both
    sides are paired in raster order so the result is always a bijection.
    """
    P = plain_ids.size
    cp = np.bincount(plain_ids, minlength=nb)
    cc = np.bincount(cipher_ids, minlength=nb)
    if strict:
        empty = np.flatnonzero((cp > 0) & (cc == 0))
        if empty.size:
            s = int(np.flatnonzero(plain_ids == empty[0])[0])
            raise InconsistentPairsError(
                f"no cipher position matches the value tuple of source {s} "
                f"({empty.size} unmatched buckets); the pairs are not related by one permutation"
            )
        if not np.array_equal(cp, cc):
            warnings.warn("bucket sizes differ between plain and cipher sides", RuntimeWarning)

    p_order = _backend.bucket_order(plain_ids, nb)
    c_order = _backend.bucket_order(cipher_ids, nb)
    p_start = np.concatenate([[0], np.cumsum(cp)[:-1]])
    c_start = np.concatenate([[0], np.cumsum(cc)[:-1]])
    bucket = plain_ids[p_order]
    rank = np.arange(P) - p_start[bucket]
    hit = rank < cc[bucket]

    dest = np.full(P, -1, dtype=np.int64)
    dest[p_order[hit]] = c_order[c_start[bucket[hit]] + rank[hit]]
    missing = dest < 0
    if missing.any():
        used = np.zeros(P, dtype=bool)
        used[dest[~missing]] = True
        dest[missing] = np.flatnonzero(~used)
    return dest


def _estimate(plain_vals, cipher_vals, base, shape, strict=True, start=None):
    pid, cid, nb = tuple_ids(plain_vals, cipher_vals, base, start)
    dest = pair_buckets(pid, cid, nb, strict)
    return CandidateMatrix(shape, pid, cid, nb), PermutationMatrix(dest, shape)


def get_permutation_matrix(pairs: KnownPairSet, H: int | None = None, W: int | None = None,
                           strict: bool = True):
    """Estimate the permutation relating ``pairs``: ``(candidates, W_tilde)``."""
    shape = pairs.shape
    if (H, W) != (None, None) and (H, W) != shape:
        raise DimensionError(f"pairs are {shape}, asked for {(H, W)}")
    p, c = pairs.stacks()
    return _estimate(p, c, pairs.levels, shape, strict)


# -- block features -----------------------------------------------------------

def block_mean_image(img: Image, params: PublicParams) -> Image:
    blocks = partition(img, params).blocks
    means = blocks.sum(axis=(2, 3)) // params.block_size
    return Image(means, img.levels)


def block_invariant_image(img: Image, params: PublicParams, kind: str = "mean") -> np.ndarray:
    """Per-block feature unchanged by any within-block pixel permutation.

    ``mean`` gives an ``R x C`` grid of floor means, ``histogram`` an
    ``R x C x T`` grid of bin counts.
    """
    if kind == "mean":
        return block_mean_image(img, params).pixels
    if kind == "histogram":
        blocks = partition(img, params).blocks
        R, C = blocks.shape[:2]
        flat = blocks.reshape(R * C, -1)
        offsets = (np.arange(R * C) * img.levels)[:, None]
        counts = np.bincount((flat + offsets).ravel(), minlength=R * C * img.levels)
        return counts.reshape(R, C, img.levels)
    raise ParamError(f"feature kind must be one of {FEATURE_KINDS}, got {kind!r}")


def resolve_kind(kind: str, levels: int, params: PublicParams) -> str:
    # floor means collide too often when both the level count and the block are tiny
    if kind == "auto":
        return "histogram" if levels <= 16 and params.block_size <= 16 else "mean"
    if kind not in FEATURE_KINDS:
        raise ParamError(f"feature kind must be 'auto' or one of {FEATURE_KINDS}, got {kind!r}")
    return kind


def _feature_codes(pairs: KnownPairSet, params: PublicParams, kind: str):
    """Block features as ``(n, K)`` integer codes plus their base."""
    if kind == "mean":
        p = np.stack([block_mean_image(f, params).pixels.ravel() for f in pairs.plain])
        c = np.stack([block_mean_image(f, params).pixels.ravel() for f in pairs.cipher])
        return p, c, pairs.levels
    p_rows, c_rows = [], []
    for fp, fc in zip(pairs.plain, pairs.cipher):
        hp = block_invariant_image(fp, params, kind).reshape(-1, pairs.levels)
        hc = block_invariant_image(fc, params, kind).reshape(-1, pairs.levels)
        _, code = np.unique(np.concatenate([hp, hc]), axis=0, return_inverse=True)
        code = code.ravel()
        p_rows.append(code[:len(hp)])
        c_rows.append(code[len(hp):])
    K = p_rows[0].size
    return np.stack(p_rows), np.stack(c_rows), 2 * K


# -- hierarchical known-plaintext attack -------------------------------------

def kpa_high_level(pairs: KnownPairSet, params: PublicParams, kind: str = "auto"):
    """Estimate the block-level matrix from block features: ``(candidates, W0_tilde)``."""
    rows, cols = params.grid(*pairs.shape)
    kind = resolve_kind(kind, pairs.levels, params)
    p, c, base = _feature_codes(pairs, params, kind)
    return _estimate(p, c, base, (rows, cols), strict=True)


def _block_stacks(images, params: PublicParams) -> np.ndarray:
    """``(n, K, S_M*S_N)`` pixel stacks, blocks in raster order."""
    out = []
    for f in images:
        b = partition(f, params).blocks
        out.append(b.reshape(b.shape[0] * b.shape[1], -1))
    return np.stack(out)


def kpa_low_level(pairs: KnownPairSet, W0: PermutationMatrix, params: PublicParams):
    """Estimate one in-block matrix per plain block ``b``, against cipher block ``W0(b)``.

    Returns ``[(candidates, W_tilde), ...]`` in plain-block raster order.  A
    block whose pairs do not match (a wrong ``W0`` entry) is still completed
    to a bijection; check ``candidates.consistent`` to find such blocks.
    """
    rows, cols = params.grid(*pairs.shape)
    if W0.shape != (rows, cols):
        raise DimensionError(f"W0 is {W0.shape}, block grid is {(rows, cols)}")
    P = _block_stacks(pairs.plain, params)
    C = _block_stacks(pairs.cipher, params)
    shape = (params.sm, params.sn)
    return [
        _estimate(P[:, b], C[:, int(W0.dest[b])], pairs.levels, shape, strict=False)
        for b in range(rows * cols)
    ]


def to_hierarchical(W0: PermutationMatrix, low_by_plain) -> HierarchicalPermutation:
    """Re-index per-plain-block estimates by destination block."""
    low = [None] * len(low_by_plain)
    for b, m in enumerate(low_by_plain):
        low[int(W0.dest[b])] = m
    return HierarchicalPermutation(W0, tuple(low))


def hierarchical_candidates(pairs: KnownPairSet, params: PublicParams,
                            high: CandidateMatrix) -> CandidateMatrix:
    """Pixel-level candidate sets under the block structure.

    A cipher pixel is a candidate for a plain pixel when its block is a
    candidate for the plain pixel's block and their value tuples agree.  Both
    conditions only tighten as pairs are added.
    """
    M, N = pairs.shape
    rows, cols = params.grid(M, N)
    i, j = np.divmod(np.arange(M * N), N)
    block = (i // params.sm) * cols + j // params.sn
    # +1 keeps "no matching block" (-1) distinct from every real bucket id
    start = np.concatenate([high.plain_bucket[block], high.cipher_bucket[block]]) + 1
    p, c = pairs.stacks()
    pid, cid, nb = tuple_ids(p, c, pairs.levels, start)
    return CandidateMatrix((M, N), pid, cid, nb)


@dataclass
class KPAResult:
    params: PublicParams
    high: CandidateMatrix
    W0: PermutationMatrix
    low: list = field(repr=False)
    candidates: CandidateMatrix = field(repr=False)

    @property
    def permutation(self) -> HierarchicalPermutation:
        return to_hierarchical(self.W0, [m for _, m in self.low])

    @property
    def inconsistent_blocks(self) -> list[int]:
        return [b for b, (cm, _) in enumerate(self.low) if not cm.consistent]

    @property
    def avg_cardinality(self) -> Fraction:
        return avg_cardinality(self.candidates)

    def decrypt(self, cipher: Image) -> Image:
        W0_inv = invert(self.W0)
        return dermutation(W0_inv, [invert(m) for _, m in self.low], cipher, self.params)


def known_plaintext_attack(pairs: KnownPairSet, params: PublicParams, kind: str = "auto") -> KPAResult:
    high, W0 = kpa_high_level(pairs, params, kind)
    low = kpa_low_level(pairs, W0, params)
    return KPAResult(params, high, W0, low, hierarchical_candidates(pairs, params, high))


def dermutation(W0_inv: PermutationMatrix, low_inv, cipher: Image, params: PublicParams) -> Image:
    """Undo a hierarchical permutation given its inverse matrices.

    ``low_inv[b]`` maps offsets inside the cipher block back to offsets in
    plain block ``b``.  Cipher block ``(i, j)`` goes to plain block
    ``W0_inv(i, j)`` and each of its pixels through that block's inverse.
    """
    blocks = partition(cipher, params).blocks
    rows, cols, sm, sn = blocks.shape
    if W0_inv.shape != (rows, cols) or len(low_inv) != rows * cols:
        raise DimensionError("inverse matrices do not match the cipher-image block grid")
    out = np.empty((rows * cols, sm * sn), dtype=np.int64)
    for i in range(rows):
        for j in range(cols):
            b = int(W0_inv.dest[i * cols + j])
            m = low_inv[b]
            if m.shape != (sm, sn):
                raise DimensionError(f"low-level inverse {m.shape} vs block {(sm, sn)}")
            out[b, m.dest] = blocks[i, j].ravel()
    out = out.reshape(rows, cols, sm, sn).swapaxes(1, 2).reshape(rows * sm, cols * sn)
    return Image(out, cipher.levels)


# -- chosen-plaintext attack --------------------------------------------------

CPA_MODES = ("flat", "two_phase", "combined")


def ceil_log(base: int, x: int) -> int:
    """Smallest ``n >= 0`` with ``base**n >= x`` (exact integer arithmetic)."""
    n, reach = 0, 1
    while reach < x:
        reach *= base
        n += 1
    return n


def _digits(values: np.ndarray, base: int, count: int) -> list[np.ndarray]:
    return [(values // base**m) % base for m in range(count)]


def _block_layout(M: int, N: int, params: PublicParams):
    """Block index and in-block slot of each pixel, as ``M x N`` arrays."""
    rows, cols = params.grid(M, N)
    i, j = np.indices((M, N))
    return (i // params.sm) * cols + j // params.sn, (i % params.sm) * params.sn + j % params.sn


def cpa_count(mode: str, M: int, N: int, T: int, params: PublicParams) -> int:
    K, S = params.block_count(M, N), params.block_size
    if mode == "flat":
        return max(1, ceil_log(T, M * N))
    if mode == "two_phase":
        return max(1, ceil_log(T, K) + ceil_log(T, S))
    if mode == "combined":
        return max(1, ceil_log(T, S), ceil_log(T, K))
    raise ParamError(f"mode must be one of {CPA_MODES}, got {mode!r}")


def cpa_construct(mode: str, M: int, N: int, T: int, params: PublicParams) -> list[Image]:
    """Chosen plain-images whose position tuples expose the permutation.

    ``flat``: image ``m`` holds base-``T`` digit ``m`` (least significant
    first) of each pixel's raster index.  ``two_phase``: block-constant images
    carrying block-index digits, then images carrying in-block slot digits.
    ``combined``: slot digits everywhere except slot 0 of block ``b``, which
    carries the digits of ``b``; slot 0 and slot ``b`` then share a tuple.
    """
    if T < 2:
        raise ParamError("need at least two levels")
    n = cpa_count(mode, M, N, T, params)
    if mode == "flat":
        return [Image(d.reshape(M, N), T) for d in _digits(np.arange(M * N), T, n)]
    block, slot = _block_layout(M, N, params)
    if mode == "two_phase":
        nb = ceil_log(T, params.block_count(M, N))
        images = [Image(d, T) for d in _digits(block, T, nb)]
        images += [Image(d, T) for d in _digits(slot, T, n - nb)]
        return images
    code = np.where(slot == 0, block, slot)
    return [Image(d, T) for d in _digits(code, T, n)]


@dataclass
class CPAResult:
    mode: str
    permutation: PermutationMatrix | HierarchicalPermutation
    # plain block -> flat in-block slots left ambiguous by the construction
    ambiguous: dict[int, list[int]]

    @property
    def exact(self) -> bool:
        return not self.ambiguous

    @property
    def ambiguous_count(self) -> int:
        return sum(len(v) for v in self.ambiguous.values())


def cpa_recover(pairs: KnownPairSet, mode: str, params: PublicParams) -> CPAResult:
    if mode == "flat":
        cm, W = get_permutation_matrix(pairs)
        if cm.ambiguous.size:
            raise InconsistentPairsError(
                f"{cm.ambiguous.size} positions share a tuple; not a flat chosen-image set"
            )
        return CPAResult(mode, W, {})
    if mode not in CPA_MODES:
        raise ParamError(f"mode must be one of {CPA_MODES}, got {mode!r}")
    # block means separate the block-constant images; the combined set differs
    # between blocks by a single pixel, which only the histogram sees
    kind = "mean" if mode == "two_phase" else "histogram"
    result = known_plaintext_attack(pairs, params, kind)
    if result.high.ambiguous.size or result.inconsistent_blocks:
        raise InconsistentPairsError("block-level tuples are not unique; wrong chosen-image set")
    ambiguous = {b: cm.ambiguous.tolist() for b, (cm, _) in enumerate(result.low)
                 if cm.ambiguous.size}
    if mode == "two_phase" and ambiguous:
        raise InconsistentPairsError("in-block tuples are not unique; wrong chosen-image set")
    return CPAResult(mode, result.permutation, ambiguous)
