"""Line tables describing every rotation Sub_HCIE performs on a block.

One Sub_HCIE iteration rotates ``3*S_M + 3*S_N - 2`` lines, and line ``g``
(in the order rows, columns, anti-diagonals ``i+j=k``, diagonals ``i-j=l``)
takes its direction from keystream bit ``q + g``.  Each line lists flat pixel
positions by increasing row index (by column for rows).  ``sign`` is the shift
applied when the direction bit is 0, where shift ``s`` means
``out[t] = in[(t + s) mod len]``.
"""
from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple

import numpy as np

ROWS, COLS, ANTI, DIAG = range(4)


class LineTable(NamedTuple):
    pos: np.ndarray     # int64, flat positions grouped by line, 4 * S_M * S_N
    start: np.ndarray   # int64, line g spans pos[start[g]:start[g+1]]
    sign: np.ndarray    # int8, +1 or -1 per line
    kind: np.ndarray    # int8, ROWS/COLS/ANTI/DIAG per line


def anti_diagonal(sm: int, sn: int, k: int) -> list[tuple[int, int]]:
    return [(i, k - i) for i in range(max(0, k - sn + 1), min(k, sm - 1) + 1)]


def diagonal(sm: int, sn: int, l: int) -> list[tuple[int, int]]:
    return [(i, i - l) for i in range(max(0, l), min(sm - 1, sn - 1 + l) + 1)]


@lru_cache(maxsize=64)
def line_table(sm: int, sn: int) -> LineTable:
    lines: list[list[tuple[int, int]]] = []
    signs: list[int] = []
    kinds: list[int] = []
    for i in range(sm):  # ROLR: b=0 rotates left
        lines.append([(i, j) for j in range(sn)])
        signs.append(1)
        kinds.append(ROWS)
    for j in range(sn):  # ROUD: b=0 rotates up
        lines.append([(i, j) for i in range(sm)])
        signs.append(1)
        kinds.append(COLS)
    for k in range(sm + sn - 1):  # ROUR: b=0 rotates toward lower-left
        lines.append(anti_diagonal(sm, sn, k))
        signs.append(-1)
        kinds.append(ANTI)
    for l in range(1 - sn, sm):  # ROUL: b=0 rotates toward upper-left
        lines.append(diagonal(sm, sn, l))
        signs.append(1)
        kinds.append(DIAG)

    pos = np.array([i * sn + j for line in lines for i, j in line], dtype=np.int64)
    start = np.zeros(len(lines) + 1, dtype=np.int64)
    start[1:] = np.cumsum([len(line) for line in lines])
    table = LineTable(pos, start, np.array(signs, dtype=np.int8), np.array(kinds, dtype=np.int8))
    for a in table:
        a.flags.writeable = False
    return table
