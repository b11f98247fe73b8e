"""Zhang-Shasha tree edit distance over postorder arrays.

The forest DP is the hot loop: O(n*m) cells per keyroot pair, integer
arithmetic only.  The same function body runs either jit-compiled or
as plain loops over numpy arrays; MDLAB_NUMBA=0 forces the plain path,
otherwise the jitted kernel is used when numba imports.  Both paths
fill identical tables, so scripts and costs never depend on the flag.

The trace prefers, among equal-cost steps, delete over insert over the
diagonal.  Cost is unaffected (every choice stays on an optimal path)
but the preference matters downstream: a node deleted here and
re-inserted there is what the move pass can fuse, while an equal-cost
pair of relabels cannot.
"""

from __future__ import annotations

import os

import numpy as np

from .tree import Flat, Tree


def _treedist_impl(l1, lld1, kr1, l2, lld2, kr2):
    n = l1.shape[0] - 1
    m = l2.shape[0] - 1
    td = np.zeros((n + 1, m + 1), np.int64)
    fd = np.zeros((n + 1, m + 1), np.int64)
    for a in range(kr1.shape[0]):
        x = kr1[a]
        lx = lld1[x]
        for b in range(kr2.shape[0]):
            y = kr2[b]
            ly = lld2[y]
            fd[lx - 1, ly - 1] = 0
            for i in range(lx, x + 1):
                fd[i, ly - 1] = fd[i - 1, ly - 1] + 1
            for j in range(ly, y + 1):
                fd[lx - 1, j] = fd[lx - 1, j - 1] + 1
            for i in range(lx, x + 1):
                li = lld1[i]
                for j in range(ly, y + 1):
                    lj = lld2[j]
                    if li == lx and lj == ly:
                        best = fd[i - 1, j - 1]
                        if l1[i] != l2[j]:
                            best += 1
                        alt = fd[i - 1, j] + 1
                        if alt < best:
                            best = alt
                        alt = fd[i, j - 1] + 1
                        if alt < best:
                            best = alt
                        fd[i, j] = best
                        td[i, j] = best
                    else:
                        best = fd[li - 1, lj - 1] + td[i, j]
                        alt = fd[i - 1, j] + 1
                        if alt < best:
                            best = alt
                        alt = fd[i, j - 1] + 1
                        if alt < best:
                            best = alt
                        fd[i, j] = best
    return td


treedist_numpy = _treedist_impl

NUMBA_ENABLED = os.environ.get("MDLAB_NUMBA", "1") != "0"
treedist_numba = None
if NUMBA_ENABLED:
    try:
        import numba

        treedist_numba = numba.njit(cache=True)(_treedist_impl)
    except ImportError:
        treedist_numba = None


def treedist_tables(f1: Flat, f2: Flat) -> np.ndarray:
    """Subtree distance matrix td[i, j] for all postorder pairs."""
    vocab: dict[str, int] = {}

    def intern(labels: list[str]) -> np.ndarray:
        out = np.zeros(len(labels), dtype=np.int64)
        for k, s in enumerate(labels[1:], start=1):
            out[k] = vocab.setdefault(s, len(vocab))
        return out

    l1 = intern(f1.labels())
    l2 = intern(f2.labels())
    fn = treedist_numba if treedist_numba is not None else treedist_numpy
    return fn(l1, f1.lld, f1.keyroots, l2, f2.lld, f2.keyroots)


class RawScript:
    """ZSS output: an order-consistent mapping plus unmatched nodes."""

    def __init__(self) -> None:
        self.mapping: list[tuple[int, int]] = []  # (src id, tgt id)
        self.deletes: list[int] = []  # src postorder ids
        self.inserts: list[int] = []  # tgt postorder ids


def zss_trace(f1: Flat, f2: Flat, td: np.ndarray) -> RawScript:
    l1 = f1.labels()
    l2 = f2.labels()
    lld1 = f1.lld
    lld2 = f2.lld
    out = RawScript()

    def extract(x: int, y: int) -> None:
        lx = int(lld1[x])
        ly = int(lld2[y])
        fd = np.zeros((x + 1, y + 1), np.int64)
        for i in range(lx, x + 1):
            fd[i, ly - 1] = fd[i - 1, ly - 1] + 1
        for j in range(ly, y + 1):
            fd[lx - 1, j] = fd[lx - 1, j - 1] + 1
        for i in range(lx, x + 1):
            li = int(lld1[i])
            for j in range(ly, y + 1):
                lj = int(lld2[j])
                if li == lx and lj == ly:
                    best = fd[i - 1, j - 1] + (0 if l1[i] == l2[j] else 1)
                    best = min(best, fd[i - 1, j] + 1, fd[i, j - 1] + 1)
                    fd[i, j] = best
                else:
                    fd[i, j] = min(
                        fd[li - 1, lj - 1] + td[i, j],
                        fd[i - 1, j] + 1,
                        fd[i, j - 1] + 1,
                    )
        i, j = x, y
        while i >= lx or j >= ly:
            if i >= lx and fd[i, j] == fd[i - 1, j] + 1:
                out.deletes.append(i)
                i -= 1
            elif j >= ly and fd[i, j] == fd[i, j - 1] + 1:
                out.inserts.append(j)
                j -= 1
            elif int(lld1[i]) == lx and int(lld2[j]) == ly:
                out.mapping.append((i, j))
                i -= 1
                j -= 1
            else:
                extract(i, j)
                i = int(lld1[i]) - 1
                j = int(lld2[j]) - 1

    extract(f1.n, f2.n)
    out.mapping.sort()
    out.deletes.sort()
    out.inserts.sort()
    return out
