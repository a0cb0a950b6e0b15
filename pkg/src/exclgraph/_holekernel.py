"""Compiled induced-cycle search over uint64 word bitsets.

Same canonical enumeration as the reference search in ``structure``: the
cycle starts at its minimum vertex and its second vertex is smaller than its
last.  Cycles are written into ``out`` until it is full; the caller re-runs
with a larger buffer when ``count`` exceeds the capacity.
"""

import numba as nb
import numpy as np

_DEBRUIJN = np.uint64(0x03F79D71B4CB0A89)
_INDEX = np.array(
    [
        0, 1, 48, 2, 57, 49, 28, 3, 61, 58, 50, 42, 38, 29, 17, 4,
        62, 55, 59, 36, 53, 51, 43, 22, 45, 39, 33, 30, 24, 18, 12, 5,
        63, 47, 56, 27, 60, 41, 37, 16, 54, 35, 52, 21, 44, 32, 23, 11,
        46, 26, 40, 15, 34, 20, 31, 10, 25, 14, 19, 9, 13, 8, 7, 6,
    ],
    dtype=np.int64,
)


def to_words(masks: list[int], n: int) -> np.ndarray:
    words = (n + 63) // 64
    out = np.zeros((len(masks), max(words, 1)), dtype=np.uint64)
    for i, m in enumerate(masks):
        for w in range(words):
            out[i, w] = np.uint64((m >> (64 * w)) & 0xFFFFFFFFFFFFFFFF)
    return out


@nb.njit(cache=True)
def _lowest(word, table):
    low = word & (~word + np.uint64(1))
    return table[np.int64((low * _DEBRUIJN) >> np.uint64(58))]


@nb.njit(cache=True)
def search_start(nbr, start, want, longest, stop_at_first, budget, out):
    """Returns (cycles found, nodes expanded, finished within budget)."""
    n, W = nbr.shape
    table = _INDEX
    one = np.uint64(1)
    allowed = np.zeros(W, dtype=np.uint64)
    for v in range(start + 1, n):
        allowed[v >> 6] |= one << np.uint64(v & 63)
    n0 = nbr[start]
    path = np.zeros(longest + 1, dtype=np.int64)
    block = np.zeros((longest + 2, W), dtype=np.uint64)
    ext = np.zeros((longest + 2, W), dtype=np.uint64)
    gt = np.zeros(W, dtype=np.uint64)
    cand = np.zeros(W, dtype=np.uint64)
    count = 0
    nodes = 0
    path[0] = start
    first = np.zeros(W, dtype=np.uint64)
    for w in range(W):
        first[w] = n0[w] & allowed[w]
    for w0 in range(W):
        while first[w0] != 0:
            b = _lowest(first[w0], table)
            first[w0] &= ~(one << np.uint64(b))
            v1 = w0 * 64 + b
            path[1] = v1
            for w in range(W):
                block[1, w] = 0
                gt[w] = 0
            for v in range(v1 + 1, n):
                gt[v >> 6] |= one << np.uint64(v & 63)
            d = 1
            entering = True
            while d >= 1:
                if entering:
                    nodes += 1
                    if budget >= 0 and nodes > budget:
                        return count, nodes, False
                    last = path[d]
                    for w in range(W):
                        cand[w] = nbr[last, w] & allowed[w] & ~block[d, w]
                    length = d + 2
                    if length >= 5 and length <= longest and want[length]:
                        for w in range(W):
                            c = cand[w] & n0[w] & gt[w]
                            while c != 0:
                                bb = _lowest(c, table)
                                c &= ~(one << np.uint64(bb))
                                if count < out.shape[0]:
                                    for t in range(d + 1):
                                        out[count, t] = path[t]
                                    out[count, d + 1] = w * 64 + bb
                                    for t in range(d + 2, out.shape[1]):
                                        out[count, t] = -1
                                count += 1
                                if stop_at_first:
                                    return count, nodes, True
                    if d + 3 <= longest:
                        for w in range(W):
                            ext[d, w] = cand[w] & ~n0[w]
                            block[d + 1, w] = block[d, w] | nbr[last, w]
                        block[d + 1, last >> 6] |= one << np.uint64(last & 63)
                    else:
                        for w in range(W):
                            ext[d, w] = 0
                    entering = False
                # advance to the next extension at depth d
                moved = False
                for w in range(W):
                    if ext[d, w] != 0:
                        bb = _lowest(ext[d, w], table)
                        ext[d, w] &= ~(one << np.uint64(bb))
                        path[d + 1] = w * 64 + bb
                        d += 1
                        entering = True
                        moved = True
                        break
                if not moved:
                    d -= 1
    return count, nodes, True
