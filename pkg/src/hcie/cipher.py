"""The HCIE cipher: rotation mappings, Sub_HCIE, and two-level encryption."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from ._tables import anti_diagonal, diagonal
from .errors import DimensionError, ParamError
from .keystream import BitStream, Key, generate_bitstream
from .model import (
    BlockImage,
    HierarchicalPermutation,
    Image,
    PermutationMatrix,
    PublicParams,
    apply_permutation,
    assemble,
    flatten,
    invert,
    partition,
)

ROTATIONS = ("ROLR", "ROUD", "ROUR", "ROUL")


@dataclass(frozen=True)
class RotationSpec:
    """One rotation mapping.

    ``index`` is the row ``i`` (ROLR), column ``j`` (ROUD), anti-diagonal
    ``k = i + j`` (ROUR) or diagonal ``l = i - j`` (ROUL).  Direction bit 0
    means left / up / lower-left / upper-left respectively.
    """

    kind: str
    index: int
    b: int
    p: int

    def __post_init__(self):
        if self.kind not in ROTATIONS:
            raise ParamError(f"unknown rotation {self.kind!r}")
        if self.b not in (0, 1):
            raise ParamError("direction bit must be 0 or 1")
        if self.p < 0:
            raise ParamError("rotation amount must be non-negative")

    def line(self, M: int, N: int) -> list[tuple[int, int]]:
        """Coordinates on the rotated line, in increasing row (or column) order."""
        i = self.index
        if self.kind == "ROLR":
            if not 0 <= i <= M - 1:
                raise ParamError(f"row {i} outside 0..{M - 1}")
            return [(i, j) for j in range(N)]
        if self.kind == "ROUD":
            if not 0 <= i <= N - 1:
                raise ParamError(f"column {i} outside 0..{N - 1}")
            return [(r, i) for r in range(M)]
        if self.kind == "ROUR":
            if not 0 <= i <= M + N - 2:
                raise ParamError(f"anti-diagonal {i} outside 0..{M + N - 2}")
            return anti_diagonal(M, N, i)
        if not 1 - N <= i <= M - 1:
            raise ParamError(f"diagonal {i} outside {1 - N}..{M - 1}")
        return diagonal(M, N, i)

    @property
    def shift(self) -> int:
        """Signed shift ``s`` with ``out[t] = in[t + s]`` along the ordered line."""
        toward_start = self.kind in ("ROLR", "ROUD", "ROUL")
        forward = toward_start == (self.b == 0)
        return self.p if forward else -self.p


def rotate(img: Image, spec: RotationSpec) -> Image:
    line = spec.line(*img.shape)
    rows, cols = zip(*line)
    out = img.pixels.copy()
    out[rows, cols] = np.roll(img.pixels[rows, cols], -spec.shift)
    return Image(out, img.levels)


def sub_hcie(img: Image, stream: BitStream, params: PublicParams) -> Image:
    """Permute an ``S_M x S_N`` image with the next ``segment_bits`` keystream bits."""
    if img.shape != (params.sm, params.sn):
        raise DimensionError(f"Sub_HCIE needs a {params.sm}x{params.sn} image, got {img.shape}")
    bits = stream.take(params.segment_bits)
    src = _backend.sub_hcie_gather(
        params.sm, params.sn, bits, params.alpha, params.beta, params.gamma, params.no
    )
    return Image(img.pixels.ravel()[src].reshape(img.shape), img.levels)


def _block_order(stream: BitStream, params: PublicParams, K: int) -> np.ndarray:
    """Shuffle the pseudo-image; entry ``t`` is the source of destination block ``t``."""
    pseudo = np.zeros(params.block_size, dtype=np.int64)
    pseudo[:K] = np.arange(1, K + 1)
    # the pseudo-image carries block indices, not pixel values: its own K+1 levels
    shuffled = sub_hcie(Image(pseudo.reshape(params.sm, params.sn), K + 1), stream, params)
    values = shuffled.pixels.ravel()
    return values[values > 0] - 1


def encrypt_with_stream(img: Image, stream: BitStream, params: PublicParams) -> Image:
    """Encrypt reading bits from ``stream``, which is left positioned after them."""
    blocks = partition(img, params)
    rows, cols = blocks.grid
    K = rows * cols
    order = _block_order(stream, params, K)
    moved = blocks.blocks.reshape(K, params.sm, params.sn)[order]
    out = np.stack([sub_hcie(Image(b, img.levels), stream, params).pixels for b in moved])
    return assemble(BlockImage(out.reshape(rows, cols, params.sm, params.sn), img.levels))


def _fresh_stream(key: Key, params: PublicParams, M: int, N: int) -> BitStream:
    return generate_bitstream(key, params.bit_budget(M, N))


def _check_consumed(stream: BitStream) -> None:
    if stream.remaining:
        raise RuntimeError(f"{stream.remaining} keystream bits left unused")


def encrypt(img: Image, key: Key, params: PublicParams) -> Image:
    stream = _fresh_stream(key, params, *img.shape)
    out = encrypt_with_stream(img, stream, params)
    _check_consumed(stream)
    return out


def extract_permutation(key: Key, params: PublicParams, M: int, N: int) -> HierarchicalPermutation:
    """The ``1 + K`` permutation matrices equivalent to ``key`` for ``M x N`` images.

    Follows :func:`encrypt` step by step, pushing an index block through each
    Sub_HCIE call instead of pixel data.
    """
    rows, cols = params.grid(M, N)
    K = rows * cols
    stream = _fresh_stream(key, params, M, N)
    high = PermutationMatrix.from_gather(_block_order(stream, params, K), (rows, cols))
    shape = (params.sm, params.sn)
    index_block = Image(np.arange(params.block_size).reshape(shape), max(params.block_size, 2))
    low = tuple(
        PermutationMatrix.from_gather(sub_hcie(index_block, stream, params).pixels, shape)
        for _ in range(K)
    )
    _check_consumed(stream)
    return HierarchicalPermutation(high, low)


def decrypt(img: Image, key: Key, params: PublicParams) -> Image:
    hp = extract_permutation(key, params, *img.shape)
    return apply_permutation(img, invert(flatten(hp, params)))
