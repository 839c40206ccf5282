"""Sorted integer-key indexing for sparse lattice data (internal).

Rows of integer coordinates are packed into single int64 keys so that
membership queries and shifted joins reduce to a binary search.  Packing is
only injective inside the bounding box of the indexed rows, so every query
point is bounds-checked per axis before packing.
"""

from __future__ import annotations

import numpy as np


def lex_order(rows: np.ndarray) -> np.ndarray:
    """Permutation sorting integer rows lexicographically (first column major)."""
    if rows.shape[0] == 0:
        return np.empty(0, dtype=np.intp)
    return np.lexsort(rows.T[::-1])


class PackedIndex:
    """Binary-searchable index over lexicographically sorted integer rows."""

    def __init__(self, rows: np.ndarray):
        rows = np.ascontiguousarray(rows, dtype=np.int64)
        self.rows = rows
        self.n, self.d = rows.shape
        if self.n == 0:
            self.lows = np.zeros(self.d, dtype=np.int64)
            self.highs = np.zeros(self.d, dtype=np.int64)
            self.strides = np.ones(self.d, dtype=np.int64)
            self.keys = np.empty(0, dtype=np.int64)
            return
        self.lows = rows.min(axis=0)
        self.highs = rows.max(axis=0)
        sizes = [int(hi - lo + 1) for lo, hi in zip(self.lows, self.highs)]
        strides = [1] * self.d
        for i in range(self.d - 2, -1, -1):
            strides[i] = strides[i + 1] * sizes[i + 1]
        if strides[0] * sizes[0] >= 2**62:
            raise OverflowError("lattice box too large to pack into int64 keys")
        self.strides = np.asarray(strides, dtype=np.int64)
        self.keys = self._pack(rows)
        # rows are expected lex-sorted, which makes packed keys ascending
        if np.any(np.diff(self.keys) <= 0):
            raise ValueError("rows must be lex-sorted and duplicate-free")

    def _pack(self, pts: np.ndarray) -> np.ndarray:
        return (pts - self.lows) @ self.strides

    def lookup(self, pts: np.ndarray) -> np.ndarray:
        """Indices of query rows, -1 where absent."""
        pts = np.asarray(pts, dtype=np.int64)
        out = np.full(pts.shape[0], -1, dtype=np.intp)
        if self.n == 0 or pts.shape[0] == 0:
            return out
        inside = np.all((pts >= self.lows) & (pts <= self.highs), axis=1)
        if not inside.any():
            return out
        sub = pts[inside]
        keys = self._pack(sub)
        pos = np.searchsorted(self.keys, keys)
        pos_clip = np.minimum(pos, self.n - 1)
        hit = self.keys[pos_clip] == keys
        found = np.where(hit, pos_clip, -1)
        out[np.flatnonzero(inside)] = found
        return out


def group_rows(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Group equal integer rows.

    Returns (unique_rows, inverse, order) where unique_rows are lex-sorted,
    ``inverse[i]`` is the group id of ``rows[i]`` and ``order`` sorts rows by
    group.  Grouping is exact (integer keys only).
    """
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    if rows.shape[0] == 0:
        return rows.copy(), np.empty(0, dtype=np.intp), np.empty(0, dtype=np.intp)
    uniq, inverse = np.unique(rows, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    order = np.argsort(inverse, kind="stable")
    return uniq, inverse, order
