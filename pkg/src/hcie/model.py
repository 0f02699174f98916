"""Images, block partitions and permutation relationship matrices.

Conventions shared by the whole package:

* raster (row-major) order is the canonical linearisation of any grid;
* a :class:`PermutationMatrix` entry ``w(i, j)`` is the *destination* of the
  source element at ``(i, j)``, so applying ``W`` to ``f`` gives ``g`` with
  ``g[w(i, j)] = f[i, j]``;
* low-level matrices of a :class:`HierarchicalPermutation` are indexed by the
  *destination* block, i.e. the block position after the high-level move.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NotBijectiveError, ParamError

DEFAULT_LEVELS = 256


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.int64, copy=True)
    a.flags.writeable = False
    return a


class Image:
    """An ``M x N`` grid of integers in ``[0, levels)``."""

    __slots__ = ("pixels", "levels")

    def __init__(self, pixels, levels: int = DEFAULT_LEVELS):
        a = np.asarray(pixels)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise DimensionError(f"image must be a non-empty 2-D grid, got shape {a.shape}")
        if levels < 2:
            raise ParamError(f"levels must be >= 2, got {levels}")
        if a.dtype.kind not in "iub":
            raise ParamError(f"pixel values must be integers, got dtype {a.dtype}")
        if a.size and (a.min() < 0 or a.max() >= levels):
            raise ParamError(f"pixel values must lie in [0, {levels})")
        self.pixels = _readonly(a)
        self.levels = int(levels)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def histogram(self) -> np.ndarray:
        return np.bincount(self.pixels.ravel(), minlength=self.levels)

    def __eq__(self, other):
        if not isinstance(other, Image):
            return NotImplemented
        return self.levels == other.levels and np.array_equal(self.pixels, other.pixels)

    def __repr__(self):
        return f"Image({self.height}x{self.width}, levels={self.levels})"


@dataclass(frozen=True)
class PublicParams:
    """Public HCIE configuration ``(S_M, S_N, alpha, beta, gamma, no)``."""

    sm: int
    sn: int
    alpha: int
    beta: int
    gamma: int
    no: int

    def __post_init__(self):
        if self.sm < 1 or self.sn < 1:
            raise ParamError("block size must be positive")
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ParamError("alpha, beta and gamma must be non-negative")
        if self.no < 1:
            raise ParamError("iteration count `no` must be >= 1")
        # the largest rotation amount must stay below the shorter block side
        if self.alpha + self.beta + self.gamma >= min(self.sm, self.sn):
            raise ParamError(
                f"alpha+beta+gamma={self.alpha + self.beta + self.gamma} "
                f"must be < min(S_M, S_N)={min(self.sm, self.sn)}"
            )

    @property
    def block_size(self) -> int:
        return self.sm * self.sn

    @property
    def segment_bits(self) -> int:
        """Keystream bits consumed by one Sub_HCIE call."""
        return (3 * self.sm + 3 * self.sn - 2) * self.no

    def grid(self, M: int, N: int) -> tuple[int, int]:
        self.check(M, N)
        return M // self.sm, N // self.sn

    def block_count(self, M: int, N: int) -> int:
        rows, cols = self.grid(M, N)
        return rows * cols

    def bit_budget(self, M: int, N: int) -> int:
        """``L_b = (1 + K) * (3 S_M + 3 S_N - 2) * no``."""
        return (1 + self.block_count(M, N)) * self.segment_bits

    def check(self, M: int, N: int) -> None:
        if M % self.sm or N % self.sn:
            raise DimensionError(
                f"{M}x{N} image is not divisible into {self.sm}x{self.sn} blocks"
            )
        for side, s in ((M, self.sm), (N, self.sn)):
            if not (math.isqrt(side - 1) + 1 <= s <= side):
                raise DimensionError(
                    f"block side {s} outside [ceil(sqrt({side})), {side}]"
                )


class PermutationMatrix:
    """Bijective map from an ``H x W`` grid onto itself.

    Stored as flat destination indices: ``dest[i * W + j] = i' * W + j'``.
    """

    __slots__ = ("shape", "dest")

    def __init__(self, dest, shape: tuple[int, int]):
        H, W = int(shape[0]), int(shape[1])
        d = np.asarray(dest, dtype=np.int64).ravel()
        if d.size != H * W:
            raise DimensionError(f"{d.size} entries for a {H}x{W} matrix")
        if d.size and (d.min() < 0 or d.max() >= H * W):
            raise NotBijectiveError("destination outside the grid")
        if np.any(np.bincount(d, minlength=H * W) != 1):
            raise NotBijectiveError("destinations are not a permutation of the grid")
        self.shape = (H, W)
        self.dest = _readonly(d)

    @classmethod
    def identity(cls, shape) -> PermutationMatrix:
        return cls(np.arange(shape[0] * shape[1]), shape)

    @classmethod
    def from_pairs(cls, pairs) -> PermutationMatrix:
        """Build from an ``(H, W, 2)`` array of ``(i', j')`` entries."""
        p = np.asarray(pairs, dtype=np.int64)
        if p.ndim != 3 or p.shape[2] != 2:
            raise DimensionError("pairs must have shape (H, W, 2)")
        H, W = p.shape[:2]
        if p.size and (p[..., 1].min() < 0 or p[..., 1].max() >= W):
            raise NotBijectiveError("column destination outside the grid")
        return cls(p[..., 0] * W + p[..., 1], (H, W))

    @classmethod
    def from_gather(cls, src, shape) -> PermutationMatrix:
        """Build from a gather map, where output position ``t`` reads input ``src[t]``."""
        src = np.asarray(src, dtype=np.int64).ravel()
        dest = np.empty_like(src)
        dest[src] = np.arange(src.size)
        return cls(dest, shape)

    def pairs(self) -> np.ndarray:
        H, W = self.shape
        return np.stack(np.divmod(self.dest, W), axis=-1).reshape(H, W, 2)

    def __getitem__(self, ij) -> tuple[int, int]:
        i, j = ij
        d = int(self.dest[i * self.shape[1] + j])
        return divmod(d, self.shape[1])

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.dest, np.arange(self.dest.size)))

    def __eq__(self, other):
        if not isinstance(other, PermutationMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.dest, other.dest)

    def __repr__(self):
        return f"PermutationMatrix({self.shape[0]}x{self.shape[1]})"


@dataclass(frozen=True)
class HierarchicalPermutation:
    """One high-level block matrix plus one low-level matrix per destination block."""

    high: PermutationMatrix
    low: tuple[PermutationMatrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "low", tuple(self.low))
        K = self.high.dest.size
        if len(self.low) != K:
            raise DimensionError(f"{len(self.low)} low-level matrices for {K} blocks")
        if K and len({m.shape for m in self.low}) != 1:
            raise DimensionError("low-level matrices differ in size")

    @property
    def block_shape(self) -> tuple[int, int]:
        return self.low[0].shape

    def __len__(self):
        return 1 + len(self.low)

    def __eq__(self, other):
        if not isinstance(other, HierarchicalPermutation):
            return NotImplemented
        return self.high == other.high and self.low == other.low


@dataclass(frozen=True)
class BlockImage:
    """``(M/S_M) x (N/S_N)`` grid of ``S_M x S_N`` blocks, as a 4-D array."""

    blocks: np.ndarray
    levels: int

    def __getitem__(self, ij) -> np.ndarray:
        return self.blocks[ij[0], ij[1]]

    @property
    def grid(self) -> tuple[int, int]:
        return self.blocks.shape[:2]

    def assemble(self) -> Image:
        return assemble(self)


def partition(img: Image, params: PublicParams) -> BlockImage:
    M, N = img.shape
    params.check(M, N)
    rows, cols = M // params.sm, N // params.sn
    blocks = img.pixels.reshape(rows, params.sm, cols, params.sn).swapaxes(1, 2)
    return BlockImage(np.ascontiguousarray(blocks), img.levels)


def assemble(blocks: BlockImage) -> Image:
    rows, cols, sm, sn = blocks.blocks.shape
    return Image(blocks.blocks.swapaxes(1, 2).reshape(rows * sm, cols * sn), blocks.levels)


def apply_permutation(img: Image, W: PermutationMatrix) -> Image:
    if img.shape != W.shape:
        raise DimensionError(f"image {img.shape} vs matrix {W.shape}")
    out = np.empty(img.pixels.size, dtype=np.int64)
    out[W.dest] = img.pixels.ravel()
    return Image(out.reshape(img.shape), img.levels)


def invert(W: PermutationMatrix) -> PermutationMatrix:
    inv = np.empty_like(W.dest)
    inv[W.dest] = np.arange(W.dest.size)
    return PermutationMatrix(inv, W.shape)


def compose(first: PermutationMatrix, second: PermutationMatrix) -> PermutationMatrix:
    """The matrix of applying ``first`` and then ``second``."""
    if first.shape != second.shape:
        raise DimensionError(f"{first.shape} vs {second.shape}")
    return PermutationMatrix(second.dest[first.dest], first.shape)


def low_level_table(hp: HierarchicalPermutation) -> np.ndarray:
    """``(K, S_M*S_N)`` array of low-level flat destinations, by destination block."""
    return np.stack([m.dest for m in hp.low])


def flatten(hp: HierarchicalPermutation, params: PublicParams) -> PermutationMatrix:
    """Equivalent ``M x N`` matrix of a hierarchical permutation."""
    rows, cols = hp.high.shape
    sm, sn = params.sm, params.sn
    if hp.block_shape != (sm, sn):
        raise DimensionError(f"low-level matrices {hp.block_shape} vs blocks {(sm, sn)}")
    M, N = rows * sm, cols * sn
    params.check(M, N)

    i, j = np.divmod(np.arange(M * N), N)
    block = (i // sm) * cols + j // sn
    offset = (i % sm) * sn + j % sn
    dblock = hp.high.dest[block]
    doff = low_level_table(hp)[dblock, offset]
    di = (dblock // cols) * sm + doff // sn
    dj = (dblock % cols) * sn + doff % sn
    return PermutationMatrix(di * N + dj, (M, N))


def invert_hierarchical(hp: HierarchicalPermutation) -> HierarchicalPermutation:
    """Hierarchical form of the inverse permutation.

    The inverse moves cipher block ``d`` back to ``high^-1(d)`` and unscrambles
    its pixels with ``low[d]^-1``; re-indexed by its own destination block.
    """
    high_inv = invert(hp.high)
    low = [None] * len(hp.low)
    for d, m in enumerate(hp.low):
        low[int(high_inv.dest[d])] = invert(m)
    return HierarchicalPermutation(high_inv, tuple(low))
