"""Exact integer arithmetic for resonant directions of the d-torus lattice.

A rational direction is represented by its unique primitive integer vector
(coprime components, first nonzero component positive).  Every lattice point
splits exactly as ``|p|^2 * k = n * p + r_scaled`` with ``n = k . p`` and
``r_scaled . p = 0``; storing the orthogonal offset as the integer vector
``r_scaled = |p|^2 * r`` keeps line grouping exact, with no float keys.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Set, Tuple

import numpy as np

LatticePoint = Tuple[int, ...]


@dataclass(frozen=True)
class PrimitiveDirection:
    """Canonical integer representative of a rational line through 0."""

    p: LatticePoint
    norm_sq: int

    def __post_init__(self):
        if len(self.p) == 0 or all(c == 0 for c in self.p):
            raise ValueError("no direction")
        g = 0
        for c in self.p:
            g = math.gcd(g, abs(int(c)))
        if g != 1:
            raise ValueError("components of a primitive direction must be coprime")
        first = next(c for c in self.p if c != 0)
        if first < 0:
            raise ValueError("first nonzero component must be positive")
        if self.norm_sq != sum(c * c for c in self.p):
            raise ValueError("norm_sq inconsistent with p")

    @property
    def d(self) -> int:
        return len(self.p)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.p, dtype=np.int64)


@dataclass(frozen=True)
class LineDecomposition:
    """Split of k along a direction: ``|p|^2 * k == n * p + r_scaled`` exactly."""

    n: int
    r_scaled: LatticePoint
    class_c: int


def primitive_direction(k: Sequence[int]) -> PrimitiveDirection:
    """Canonical primitive vector spanning the same line as ``k``.

    Raises ValueError("no direction") for the zero vector.
    """
    k = tuple(int(c) for c in k)
    if all(c == 0 for c in k):
        raise ValueError("no direction")
    g = 0
    for c in k:
        g = math.gcd(g, abs(c))
    p = tuple(c // g for c in k)
    first = next(c for c in p if c != 0)
    if first < 0:
        p = tuple(-c for c in p)
    return PrimitiveDirection(p=p, norm_sq=sum(c * c for c in p))


def decompose(k: Sequence[int], p: PrimitiveDirection) -> LineDecomposition:
    """Exact line/offset split of a lattice point relative to a direction."""
    k = tuple(int(c) for c in k)
    if len(k) != p.d:
        raise ValueError(f"dimension mismatch: point has d={len(k)}, direction d={p.d}")
    n = sum(c * q for c, q in zip(k, p.p))
    r_scaled = tuple(p.norm_sq * c - n * q for c, q in zip(k, p.p))
    return LineDecomposition(n=n, r_scaled=r_scaled, class_c=n % p.norm_sq)


def decompose_block(points: np.ndarray, p: PrimitiveDirection) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized decompose: returns (n, r_scaled) for an (N, d) int array."""
    pts = np.asarray(points, dtype=np.int64)
    if pts.shape[1] != p.d:
        raise ValueError("dimension mismatch")
    pv = p.as_array()
    n = pts @ pv
    r_scaled = p.norm_sq * pts - n[:, None] * pv
    return n, r_scaled


def bezout_witness(p: PrimitiveDirection) -> LatticePoint:
    """Integer vector c with ``p . c == 1`` (exists since components are coprime)."""
    coeffs = [0] * p.d
    g = 0
    for i, comp in enumerate(p.p):
        if comp == 0:
            continue
        if g == 0:
            g = abs(comp)
            coeffs[i] = 1 if comp > 0 else -1
            continue
        gg, x, y = _xgcd(g, abs(comp))
        for j in range(i):
            coeffs[j] *= x
        coeffs[i] = y if comp > 0 else -y
        g = gg
        if g == 1:
            break
    assert sum(c * q for c, q in zip(coeffs, p.p)) == 1
    return tuple(coeffs)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    # returns (g, x, y) with x*a + y*b == g == gcd(a, b), for a, b >= 0
    x, next_x = 1, 0
    y, next_y = 0, 1
    g, next_g = a, b
    while next_g:
        q = g // next_g
        x, next_x = next_x, x - q * next_x
        y, next_y = next_y, y - q * next_y
        g, next_g = next_g, g - q * next_g
    return g, x, y


def same_coset(n: int, m: int, p: PrimitiveDirection) -> bool:
    """True iff the offset sets for line indices n and m coincide."""
    return (n - m) % p.norm_sq == 0


def group_by_lines(
    support: Iterable[Sequence[int]], p: PrimitiveDirection
) -> Dict[LatticePoint, List[Tuple[int, LatticePoint]]]:
    """Partition lattice points into lines parallel to ``p``.

    Keys are the exact scaled offsets ``r_scaled``; each value lists
    ``(n, k)`` sorted by n.  Two points share a group iff their difference is
    an integer multiple of p.
    """
    groups: Dict[LatticePoint, List[Tuple[int, LatticePoint]]] = {}
    for k in support:
        dec = decompose(k, p)
        groups.setdefault(dec.r_scaled, []).append((dec.n, tuple(int(c) for c in k)))
    for entries in groups.values():
        entries.sort()
    return groups


def enumerate_directions(d: int, max_norm_sq: int) -> List[PrimitiveDirection]:
    """All primitive directions with ``|p|^2 <= max_norm_sq``, lexicographic order.

    d = 1 is rejected: there are no resonant directions on the circle.
    """
    if d < 2:
        raise ValueError("direction enumeration requires d >= 2")
    if max_norm_sq < 1:
        return []
    radius = math.isqrt(max_norm_sq)
    out: List[PrimitiveDirection] = []
    for cand in itertools.product(range(-radius, radius + 1), repeat=d):
        if all(c == 0 for c in cand):
            continue
        if sum(c * c for c in cand) > max_norm_sq:
            continue
        first = next(c for c in cand if c != 0)
        if first < 0:
            continue
        g = 0
        for c in cand:
            g = math.gcd(g, abs(c))
        if g != 1:
            continue
        out.append(PrimitiveDirection(p=cand, norm_sq=sum(c * c for c in cand)))
    out.sort(key=lambda pd: pd.p)
    return out


def directions_of_modes(modes: Iterable[Sequence[int]]) -> Set[PrimitiveDirection]:
    """Distinct directions carried by a set of nonzero lattice modes."""
    out: Set[PrimitiveDirection] = set()
    for k in modes:
        if all(int(c) == 0 for c in k):
            continue
        out.add(primitive_direction(k))
    return out
