"""Ciphertext-only and brute-force analyses of HCIE.

Covers exhaustive key search at toy precision with an analytic per-key cost
model, histogram counting, and block-histogram similarity for reassembling
cipher blocks.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import dataclass, field
from itertools import product
from typing import NamedTuple

import numpy as np

from . import _backend
from .errors import DimensionError, ParamError, SearchSpaceTooLargeError
from .keystream import Key
from .model import Image, PermutationMatrix, PublicParams, partition

log = logging.getLogger(__name__)

MAX_EXHAUSTIVE_PRECISION = 12
CHAOTIC_MU_FLOOR = 3.57


# -- brute force -------------------------------------------------------------

class TrialCost(NamedTuple):
    """Operation counts for checking one guessed key."""

    keystream_iterations: int   # chaotic iterations producing L_b bits
    pseudo_image: int           # creating f_p
    pseudo_shuffle: int         # one Sub_HCIE call on f_p
    block_generation: int       # building the permuted block-image
    block_shuffles: int         # K Sub_HCIE calls, one per block

    @property
    def total(self) -> int:
        return sum(self)


def sub_hcie_cost(params: PublicParams) -> int:
    return (4 * params.sm + 4 * params.sn) * params.no


def trial_cost(params: PublicParams, M: int, N: int) -> TrialCost:
    K = params.block_count(M, N)
    return TrialCost(
        keystream_iterations=-(-params.bit_budget(M, N) // 8),
        pseudo_image=params.block_size,
        pseudo_shuffle=sub_hcie_cost(params),
        block_generation=M * N,
        block_shuffles=K * sub_hcie_cost(params),
    )


def key_space_bits(precision: int) -> int:
    """``x0`` and ``mu`` carry ``precision`` bits each."""
    return 2 * precision


def mu_candidates(precision: int, near_four: bool = False) -> np.ndarray:
    """Raw ``mu`` values (``precision - 2`` fractional bits) to try."""
    top = 1 << precision
    lo = math.ceil(CHAOTIC_MU_FLOOR * (1 << (precision - 2))) if near_four else 1
    return np.arange(lo, top + 1, dtype=np.uint64)


@dataclass
class BruteForceReport:
    precision: int
    tried: int
    matches: list[Key]
    seconds: float
    cost: TrialCost
    bit_budget: int
    mu_near_four: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def estimated_operations(self) -> int:
        return self.tried * self.cost.total

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf)
        out.writerow(["field", "value"])
        out.writerow(["precision", self.precision])
        out.writerow(["key_space_log2", key_space_bits(self.precision)])
        out.writerow(["nominal_space_log2", self.bit_budget])
        out.writerow(["mu_near_four", int(self.mu_near_four)])
        out.writerow(["tried", self.tried])
        out.writerow(["matches", len(self.matches)])
        out.writerow(["seconds", f"{self.seconds:.6f}"])
        for name, value in self.cost._asdict().items():
            out.writerow([f"cost_{name}", value])
        out.writerow(["cost_total_per_trial", self.cost.total])
        out.writerow(["estimated_operations", self.estimated_operations])
        for k in self.matches:
            out.writerow(["match", f"x0={k.x0}/2^{k.precision};mu={k.mu}/2^{k.precision - 2}"])
        return buf.getvalue()


def brute_force(plain: Image, cipher: Image, params: PublicParams, precision: int,
                mu_near_four: bool = False, max_precision: int = MAX_EXHAUSTIVE_PRECISION,
                ) -> BruteForceReport:
    """Try every key at ``precision`` bits against one known plain/cipher pair.

    Returns every key reproducing ``cipher`` exactly; an empty list just means
    the true key is outside the searched space.
    """
    if plain.shape != cipher.shape:
        raise DimensionError(f"{plain.shape} vs {cipher.shape}")
    if precision > max_precision:
        raise SearchSpaceTooLargeError(
            f"exhaustive search capped at {max_precision} bits (2^{2 * max_precision} keys), "
            f"asked for {precision}"
        )
    if precision < 2:
        raise ParamError("precision must be >= 2")
    M, N = plain.shape
    params.check(M, N)
    x0s = np.arange(1, 1 << precision, dtype=np.uint64)
    mus = mu_candidates(precision, mu_near_four)

    t0 = time.perf_counter()
    found = _backend.brute_force_scan(
        plain.pixels, cipher.pixels, M, N, params.sm, params.sn,
        params.alpha, params.beta, params.gamma, params.no, precision, x0s, mus,
    )
    seconds = time.perf_counter() - t0
    # deterministic order regardless of scan order
    matches = [Key(x0, mu, precision) for x0, mu in sorted(found, key=lambda km: (km[1], km[0]))]
    report = BruteForceReport(precision, x0s.size * mus.size, matches, seconds,
                              trial_cost(params, M, N), params.bit_budget(M, N), mu_near_four)
    if not matches:
        report.notes.append("no key in the searched space reproduces the cipher-image")
    return report


# -- histogram counting ------------------------------------------------------

def histogram_count(T: int, H: int, W: int) -> int:
    """Histogram count by the closed form ``sum_{i=1}^{min(T, HW)} C(T, i) * C(HW, i - 1)``.

    Evaluated term by term in exact integers.  It disagrees with exhaustive
    enumeration for most small cases (see :func:`compare_histogram_counts`);
    :func:`histogram_count_multiset` gives the enumerated value.
    """
    if T < 1 or H * W < 1:
        raise ParamError("need T >= 1 and H*W >= 1")
    n = H * W
    return sum(math.comb(T, i) * math.comb(n, i - 1) for i in range(1, min(T, n) + 1))


def histogram_count_multiset(T: int, H: int, W: int) -> int:
    """Count of multisets of ``H*W`` values over ``T`` levels: ``C(HW + T - 1, T - 1)``."""
    return math.comb(H * W + T - 1, T - 1)


def histogram_count_enumerated(T: int, H: int, W: int) -> int:
    """Distinct histograms over all ``T**(H*W)`` images, by enumeration."""
    n = H * W
    if T ** n > 10 ** 7:
        raise SearchSpaceTooLargeError(f"{T}^{n} images is too many to enumerate")
    return len({tuple(np.bincount(img, minlength=T)) for img in product(range(T), repeat=n)})


def compare_histogram_counts(max_T: int = 4, max_size: int = 4) -> list[tuple[int, int, int, int]]:
    """``(T, HW, formula, enumerated)`` for every tiny case where the two differ.

    Each divergence is also logged at WARNING level.
    """
    diverging = []
    for T in range(1, max_T + 1):
        for n in range(1, max_size + 1):
            formula, enumerated = histogram_count(T, 1, n), histogram_count_enumerated(T, 1, n)
            if formula != enumerated:
                log.warning("histogram count T=%d HW=%d: closed form %d, enumeration %d",
                            T, n, formula, enumerated)
                diverging.append((T, n, formula, enumerated))
    return diverging


# -- block histogram similarity ----------------------------------------------

SIMILARITY_KINDS = ("intersection", "chi-square")


@dataclass
class BlockSimilarityMatrix:
    """``K x K`` block similarity in ``[0, 1]``; higher means more alike."""

    scores: np.ndarray
    kind: str
    grid: tuple[int, int]

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf)
        out.writerow(["a", "b", self.kind])
        K = self.scores.shape[0]
        for a in range(K):
            for b in range(K):
                out.writerow([a, b, f"{self.scores[a, b]:.6f}"])
        return buf.getvalue()


def block_histograms(img: Image, params: PublicParams) -> np.ndarray:
    blocks = partition(img, params).blocks
    R, C = blocks.shape[:2]
    flat = blocks.reshape(R * C, -1)
    offsets = (np.arange(R * C) * img.levels)[:, None]
    return np.bincount((flat + offsets).ravel(), minlength=R * C * img.levels).reshape(R * C, -1)


def block_similarity(cipher: Image, params: PublicParams, kind: str = "intersection",
                     ) -> BlockSimilarityMatrix:
    """Pairwise similarity of cipher-block histograms.

    ``intersection`` is ``sum_t min(h1, h2) / block_size``; ``chi-square`` is
    ``1 - chi2 / (2 * block_size)`` with the symmetric
    ``chi2 = sum_t (h1 - h2)^2 / (h1 + h2)``.
    """
    if kind not in SIMILARITY_KINDS:
        raise ParamError(f"kind must be one of {SIMILARITY_KINDS}, got {kind!r}")
    h = block_histograms(cipher, params).astype(np.float64)
    K, S = h.shape[0], params.block_size
    scores = np.empty((K, K))
    for a in range(K):
        if kind == "intersection":
            scores[a] = np.minimum(h[a], h).sum(axis=1) / S
        else:
            num = (h[a] - h) ** 2
            den = h[a] + h
            chi = np.divide(num, den, out=np.zeros_like(num), where=den > 0).sum(axis=1)
            scores[a] = 1.0 - chi / (2 * S)
    return BlockSimilarityMatrix(scores, kind, params.grid(*cipher.shape))


@dataclass
class Placement:
    """Greedy block layout: ``permutation`` maps cipher block -> proposed plain cell."""

    permutation: PermutationMatrix
    objective: float
    ties: int


def _adjacent_pairs(rows: int, cols: int):
    cells = np.arange(rows * cols).reshape(rows, cols)
    return np.concatenate([
        np.stack([cells[:, :-1].ravel(), cells[:, 1:].ravel()], axis=1),
        np.stack([cells[:-1, :].ravel(), cells[1:, :].ravel()], axis=1),
    ])


def greedy_reassembly(sim: BlockSimilarityMatrix, seeds=None) -> Placement:
    """Seed-and-grow layout maximising total neighbour similarity.

    Cells are filled in raster order, each with the unused block most similar
    to its already-placed left and upper neighbours; every seed in ``seeds``
    (default: all blocks) is tried at the top-left cell and the best layout
    kept.  No correctness guarantee.
    """
    rows, cols = sim.grid
    K = rows * cols
    S = sim.scores
    pairs = _adjacent_pairs(rows, cols)
    best = None
    for seed in (range(K) if seeds is None else seeds):
        cell_block = np.empty(K, dtype=np.int64)
        used = np.zeros(K, dtype=bool)
        cell_block[0], used[seed] = seed, True
        ties = 0
        for cell in range(1, K):
            r, c = divmod(cell, cols)
            score = np.zeros(K)
            if c:
                score += S[cell_block[cell - 1]]
            if r:
                score += S[cell_block[cell - cols]]
            score[used] = -np.inf
            top = score.max()
            choice = int(np.argmax(score))
            ties += int(np.count_nonzero(score == top) > 1)
            cell_block[cell], used[choice] = choice, True
        objective = float(S[cell_block[pairs[:, 0]], cell_block[pairs[:, 1]]].sum())
        if best is None or objective > best[0]:
            best = (objective, cell_block, ties)
    objective, cell_block, ties = best
    dest = np.empty(K, dtype=np.int64)
    dest[cell_block] = np.arange(K)
    return Placement(PermutationMatrix(dest, (rows, cols)), objective, ties)


def adjacency_contrast(sim: BlockSimilarityMatrix, W0: PermutationMatrix) -> tuple[float, float]:
    """Mean score of plaintext-adjacent block pairs vs. mean score of all distinct pairs."""
    rows, cols = sim.grid
    pairs = _adjacent_pairs(rows, cols)
    a, b = W0.dest[pairs[:, 0]], W0.dest[pairs[:, 1]]
    adjacent = float(sim.scores[a, b].mean()) if len(pairs) else float("nan")
    K = rows * cols
    off = ~np.eye(K, dtype=bool)
    return adjacent, float(sim.scores[off].mean()) if K > 1 else float("nan")


def placement_accuracy(placement: Placement, W0: PermutationMatrix) -> float:
    """Fraction of cipher blocks put back at their true plain position."""
    truth = np.empty_like(W0.dest)
    truth[W0.dest] = np.arange(W0.dest.size)
    return float(np.mean(placement.permutation.dest == truth))


def neighbour_accuracy(placement: Placement, W0: PermutationMatrix) -> float:
    """Fraction of plaintext-adjacent block pairs that end up adjacent in the layout."""
    rows, cols = W0.shape
    pairs = _adjacent_pairs(rows, cols)
    if not len(pairs):
        return float("nan")
    cell = placement.permutation.dest[W0.dest]
    ra, ca = np.divmod(cell[pairs[:, 0]], cols)
    rb, cb = np.divmod(cell[pairs[:, 1]], cols)
    return float(np.mean(np.abs(ra - rb) + np.abs(ca - cb) == 1))
