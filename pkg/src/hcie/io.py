"""Binary PGM images and on-disk forms of permutations and candidate sets.

Formats
-------
PGM
    ``P5`` with maxval ``T - 1 <= 255``; one byte per pixel, row-major.
Permutation CSV
    Header ``i,j,dest_i,dest_j``, one row per source position in raster order.
Hierarchical permutation NPZ
    ``high``: ``(R*C,)`` flat block destinations, ``grid``: ``(R, C)``,
    ``low``: ``(K, S_M*S_N)`` flat in-block destinations by destination block,
    ``block``: ``(S_M, S_N)``.
Candidate matrix NPZ
    ``shape``, ``plain_bucket``, ``cipher_bucket``, ``nbuckets``.
"""
from __future__ import annotations

import csv
import os
import re

import numpy as np

from .errors import PGMFormatError
from .model import HierarchicalPermutation, Image, PermutationMatrix
from .plaintext import CandidateMatrix

_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*(\S+)")


def pgm_read(path) -> Image:
    with open(path, "rb") as fh:
        data = fh.read()
    fields, pos = [], 0
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if not m:
            raise PGMFormatError(f"{path}: truncated header")
        fields.append(m.group(1))
        pos = m.end()
    if fields[0] != b"P5":
        raise PGMFormatError(f"{path}: not a binary PGM (magic {fields[0]!r})")
    try:
        width, height, maxval = (int(f) for f in fields[1:])
    except ValueError as exc:
        raise PGMFormatError(f"{path}: non-numeric header field") from exc
    if width < 1 or height < 1:
        raise PGMFormatError(f"{path}: bad size {width}x{height}")
    if not 1 <= maxval <= 255:
        raise PGMFormatError(f"{path}: maxval {maxval} unsupported (only 8-bit PGM)")
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise PGMFormatError(f"{path}: missing separator before raster")
    raster = data[pos + 1:pos + 1 + width * height]
    if len(raster) < width * height:
        raise PGMFormatError(f"{path}: truncated raster ({len(raster)} of {width * height} bytes)")
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    if pixels.max() > maxval:
        raise PGMFormatError(f"{path}: pixel value above maxval {maxval}")
    return Image(pixels, maxval + 1)


def pgm_write(path, img: Image) -> None:
    if img.levels > 256:
        raise PGMFormatError(f"cannot store {img.levels} levels in an 8-bit PGM")
    header = f"P5\n{img.width} {img.height}\n{img.levels - 1}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header + img.pixels.astype(np.uint8).tobytes())


def save_permutation_csv(path, W: PermutationMatrix) -> None:
    H, Wd = W.shape
    i, j = np.divmod(np.arange(H * Wd), Wd)
    di, dj = np.divmod(W.dest, Wd)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["i", "j", "dest_i", "dest_j"])
        out.writerows(zip(i.tolist(), j.tolist(), di.tolist(), dj.tolist()))


def load_permutation_csv(path) -> PermutationMatrix:
    rows = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    H, W = int(rows[:, 0].max()) + 1, int(rows[:, 1].max()) + 1
    order = np.argsort(rows[:, 0] * W + rows[:, 1])
    return PermutationMatrix(rows[order, 2] * W + rows[order, 3], (H, W))


def save_hierarchical(path, hp: HierarchicalPermutation) -> None:
    np.savez_compressed(
        path,
        high=hp.high.dest, grid=np.array(hp.high.shape),
        low=np.stack([m.dest for m in hp.low]), block=np.array(hp.block_shape),
    )


def load_hierarchical(path) -> HierarchicalPermutation:
    with np.load(path) as z:
        grid, block = tuple(z["grid"]), tuple(z["block"])
        return HierarchicalPermutation(
            PermutationMatrix(z["high"], grid),
            tuple(PermutationMatrix(row, block) for row in z["low"]),
        )


def save_candidates(path, cm: CandidateMatrix) -> None:
    np.savez_compressed(path, shape=np.array(cm.shape), plain_bucket=cm.plain_bucket,
                        cipher_bucket=cm.cipher_bucket, nbuckets=np.array(cm.nbuckets))


def load_candidates(path) -> CandidateMatrix:
    with np.load(path) as z:
        return CandidateMatrix(tuple(z["shape"]), z["plain_bucket"], z["cipher_bucket"],
                               int(z["nbuckets"]))


def corpus_dir() -> str:
    return os.path.join(os.path.dirname(__file__), "data", "corpus")


def load_corpus(directory=None) -> list[Image]:
    """The PGM images of a directory, sorted by file name."""
    directory = directory or corpus_dir()
    names = sorted(n for n in os.listdir(directory) if n.lower().endswith(".pgm"))
    return [pgm_read(os.path.join(directory, n)) for n in names]
