"""Known-plaintext experiment over a corpus, and the chosen-plaintext demo."""
from __future__ import annotations

import csv
import logging
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .cipher import encrypt, extract_permutation
from .errors import ParamError
from .io import corpus_dir, load_corpus, pgm_read, pgm_write
from .keystream import DEFAULT_KEY, Key
from .model import (
    HierarchicalPermutation,
    Image,
    PublicParams,
    apply_permutation,
    flatten,
    invert,
)
from .plaintext import (
    KnownPairSet,
    cpa_construct,
    cpa_recover,
    error_ratio,
    known_plaintext_attack,
)

log = logging.getLogger(__name__)

CONFIGS = {
    "s256": PublicParams(256, 256, 6, 3, 3, 9),
    "s32": PublicParams(32, 32, 4, 2, 1, 2),
    "s16": PublicParams(16, 16, 4, 2, 1, 2),
}
CSV_HEADER = ["config", "n", "error_ratio", "avg_cardinality", "wall_time_ms"]
OUTPUT_ROOT_ENV = "HCIE_OUTPUT_ROOT"


def output_root(default="runs") -> str:
    return os.environ.get(OUTPUT_ROOT_ENV, default)


@dataclass
class ExperimentConfig:
    name: str
    params: PublicParams
    key: Key = DEFAULT_KEY
    corpus: list[str] = field(default_factory=list)
    known_counts: tuple[int, ...] = (1, 2, 3, 4, 5)
    out_dir: str | None = None
    kind: str = "auto"

    def images(self) -> list[Image]:
        if not self.corpus:
            return load_corpus(corpus_dir())
        if len(self.corpus) == 1 and os.path.isdir(self.corpus[0]):
            return load_corpus(self.corpus[0])
        return [pgm_read(p) for p in self.corpus]


@dataclass
class ExperimentRow:
    config: str
    n: int
    error_ratio: float
    avg_cardinality: float
    wall_time_ms: float

    def as_csv(self) -> list[str]:
        return [self.config, str(self.n), f"{self.error_ratio:.6f}",
                f"{self.avg_cardinality:.6f}", f"{self.wall_time_ms:.3f}"]


def run_kpa_experiment(cfg: ExperimentConfig) -> list[ExperimentRow]:
    """Encrypt the corpus, attack the last cipher-image with the first ``n`` pairs.

    With ``cfg.out_dir`` set, writes ``<name>.csv`` and, under ``<name>/``, every
    cipher-image and the decrypted target for each ``n``.
    """
    images = cfg.images()
    if len(images) < max(cfg.known_counts) + 1:
        raise ParamError(
            f"corpus has {len(images)} images; need {max(cfg.known_counts) + 1} "
            f"for n up to {max(cfg.known_counts)} plus a target"
        )
    if min(cfg.known_counts) < 1:
        raise ParamError("known image counts must be >= 1")
    log.info("experiment %s: params=%s key=(%s) images=%d", cfg.name, cfg.params, cfg.key, len(images))

    ciphers = [encrypt(f, cfg.key, cfg.params) for f in images]
    for f, c in zip(images, ciphers):
        if not np.array_equal(f.histogram(), c.histogram()):
            raise RuntimeError("cipher-image histogram differs from its plain-image")
    target_plain, target_cipher = images[-1], ciphers[-1]

    cell_dir = None
    if cfg.out_dir:
        cell_dir = os.path.join(cfg.out_dir, cfg.name)
        os.makedirs(cell_dir, exist_ok=True)
        for k, c in enumerate(ciphers, start=1):
            pgm_write(os.path.join(cell_dir, f"cipher_{k}.pgm"), c)

    rows = []
    for n in cfg.known_counts:
        t0 = time.perf_counter()
        result = known_plaintext_attack(KnownPairSet(images[:n], ciphers[:n]), cfg.params, cfg.kind)
        decrypted = result.decrypt(target_cipher)
        elapsed = (time.perf_counter() - t0) * 1000.0
        row = ExperimentRow(cfg.name, n, error_ratio(target_plain, decrypted),
                            float(result.avg_cardinality), elapsed)
        log.info("%s n=%d error_ratio=%.4f avg_cardinality=%.3f", cfg.name, n,
                 row.error_ratio, row.avg_cardinality)
        rows.append(row)
        if cell_dir:
            pgm_write(os.path.join(cell_dir, f"decrypted_n{n}.pgm"), decrypted)

    if cfg.out_dir:
        write_rows(os.path.join(cfg.out_dir, f"{cfg.name}.csv"), rows)
    return rows


def write_rows(path: str, rows: list[ExperimentRow]) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(CSV_HEADER)
        out.writerows(r.as_csv() for r in rows)


def run_all(out_dir: str | None = None, names=tuple(CONFIGS), key: Key = DEFAULT_KEY,
            corpus: list[str] | None = None) -> dict[str, list[ExperimentRow]]:
    return {
        name: run_kpa_experiment(ExperimentConfig(name, CONFIGS[name], key, list(corpus or []),
                                                  out_dir=out_dir))
        for name in names
    }


@dataclass
class CPAReport:
    mode: str
    chosen_images: int
    exact: bool
    mismatched_positions: int
    ambiguous_positions: int
    max_ambiguous_per_block: int
    error_ratio: float

    def lines(self) -> list[str]:
        return [f"{k}={v}" for k, v in self.__dict__.items()]


def run_cpa_demo(params: PublicParams, key: Key, mode: str, M: int = 256, N: int = 256,
                 T: int = 256, seed: int = 0, out_dir: str | None = None) -> CPAReport:
    """Chosen-plaintext attack against an encryption oracle, checked against the key."""
    chosen = cpa_construct(mode, M, N, T, params)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        for k, f in enumerate(chosen, start=1):
            pgm_write(os.path.join(out_dir, f"chosen_{mode}_{k}.pgm"), f)
    pairs = KnownPairSet(chosen, [encrypt(f, key, params) for f in chosen])
    result = cpa_recover(pairs, mode, params)

    truth = flatten(extract_permutation(key, params, M, N), params)
    recovered = result.permutation
    if isinstance(recovered, HierarchicalPermutation):
        recovered = flatten(recovered, params)
    mismatched = int(np.count_nonzero(recovered.dest != truth.dest))

    rng = np.random.default_rng(seed)
    probe = Image(rng.integers(0, T, (M, N)), T)
    decrypted = apply_permutation(apply_permutation(probe, truth), invert(recovered))
    per_block = max((len(v) for v in result.ambiguous.values()), default=0)
    report = CPAReport(mode, len(chosen), mismatched == 0, mismatched, result.ambiguous_count,
                       per_block, error_ratio(probe, decrypted))
    log.info("cpa %s: %s", mode, report)
    return report
