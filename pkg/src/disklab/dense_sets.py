"""Reproducible enumeration of a countable dense subset of l2.

Every finitely supported vector whose coordinates are Gaussian rationals
(p1/q1 + i p2/q2) gets a unique index.  The height of a rational p/q in
lowest terms is max(|p|, q); the height of a complex coordinate is the larger
height of its two parts; the height of a vector is the maximum of its
coordinate heights and the 1-based index of its last nonzero coordinate.
Vectors are listed by increasing height, and within one height in
lexicographic order over a fixed ordering of coordinate values.  Index 0 is
the zero vector, the only vector of height 0.

There are finitely many vectors of each height, so every such vector is
reached at a finite index, and the number of vectors of height <= h is the
closed-form :meth:`DenseSetEnumerator.count_up_to_height`.
"""

from __future__ import annotations

import itertools
import threading
from fractions import Fraction
from functools import lru_cache
from math import gcd

import numpy as np

__all__ = ["DenseSetEnumerator", "dense_sequence_enumerator", "random_unit_vectors"]


def _height(f: Fraction) -> int:
    return 0 if f == 0 else max(abs(f.numerator), f.denominator)


@lru_cache(maxsize=None)
def _real_values(h: int) -> tuple:
    vals = {Fraction(0)}
    for q in range(1, h + 1):
        for p in range(1, h + 1):
            if gcd(p, q) == 1:
                vals.add(Fraction(p, q))
                vals.add(Fraction(-p, q))
    return tuple(sorted(vals, key=lambda f: (_height(f), abs(f), f < 0)))


@lru_cache(maxsize=None)
def _complex_values(h: int) -> tuple:
    """(height, complex value) pairs of height <= h in canonical order."""
    reals = _real_values(h)
    pairs = [(max(_height(a), _height(b)), ia, ib, complex(float(a), float(b)))
             for ia, a in enumerate(reals) for ib, b in enumerate(reals)]
    pairs.sort(key=lambda t: t[:3])
    return tuple((t[0], t[3]) for t in pairs)


class DenseSetEnumerator:
    """Lazily materialized, injective enumeration of rational vectors.

    ``enum[i]`` is a length-``dim_limit`` complex vector.  The same index
    always gives the same vector, in any process.
    """

    def __init__(self, dim_limit: int):
        if dim_limit < 1:
            raise ValueError("dim_limit must be >= 1")
        self.dim_limit = int(dim_limit)
        self._cache = [np.zeros(self.dim_limit, dtype=complex)]
        self._gen = self._levels()
        self._lock = threading.Lock()

    def _levels(self):
        h = 1
        while True:
            length = min(h, self.dim_limit)
            vals = _complex_values(h)
            for combo in itertools.product(vals, repeat=length):
                last = 0
                top = 0
                for i, (hv, z) in enumerate(combo):
                    if z != 0:
                        last = i + 1
                    if hv > top:
                        top = hv
                if max(last, top) != h:
                    continue
                v = np.zeros(self.dim_limit, dtype=complex)
                v[:length] = [z for _, z in combo]
                yield v
            h += 1

    def __getitem__(self, index: int) -> np.ndarray:
        if index < 0:
            raise IndexError("enumeration index must be >= 0")
        with self._lock:
            while len(self._cache) <= index:
                self._cache.append(next(self._gen))
        return self._cache[index].copy()

    def take(self, start: int, count: int) -> list:
        return [self[i] for i in range(start, start + count)]

    def count_up_to_height(self, h: int) -> int:
        """Number of enumerated vectors of height <= h (they occupy indices 0..count-1)."""
        if h <= 0:
            return 1
        return len(_complex_values(h)) ** min(h, self.dim_limit)


_enumerators: dict = {}
_enum_lock = threading.Lock()


def dense_sequence_enumerator(dim_limit: int, index: int) -> np.ndarray:
    """Vector number ``index`` of the shared enumeration with the given support limit."""
    with _enum_lock:
        enum = _enumerators.get(dim_limit)
        if enum is None:
            enum = _enumerators[dim_limit] = DenseSetEnumerator(dim_limit)
    return enum[index]


def random_unit_vectors(dim: int, count: int, seed: int, support: int | None = None) -> list:
    """Seeded complex Gaussian directions, normalized, supported on the first ``support`` coordinates."""
    support = dim if support is None else support
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        v = np.zeros(dim, dtype=complex)
        z = rng.standard_normal(support) + 1j * rng.standard_normal(support)
        v[:support] = z / np.linalg.norm(z)
        out.append(v)
    return out
