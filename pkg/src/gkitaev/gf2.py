"""Linear algebra over GF(2) on Python integers used as bit vectors.

Vectors are plain ``int`` values; bit ``i`` is coordinate ``i``. Python's
arbitrary precision integers make xor and popcount fast enough for the
few-thousand-column systems that appear on the lattices built here.
"""

from __future__ import annotations

from typing import Iterable, Sequence


def bits_to_int(indices: Iterable[int]) -> int:
    """Pack a collection of coordinates into a bit vector (mod 2)."""
    v = 0
    for i in indices:
        v ^= 1 << int(i)
    return v


def int_to_bits(v: int) -> list[int]:
    """Sorted coordinates set in ``v``."""
    out = []
    while v:
        low = v & -v
        out.append(low.bit_length() - 1)
        v ^= low
    return out


def popcount(v: int) -> int:
    return bin(v).count("1")


class XorBasis:
    """Incremental row-echelon basis that remembers how each row was made.

    Every stored pivot row carries a ``combo`` bit vector naming the input
    vectors whose xor produced it, so :meth:`solve` can return a
    combination of the original generators rather than of the basis rows.
    """

    def __init__(self) -> None:
        self._rows: dict[int, tuple[int, int]] = {}  # pivot bit -> (row, combo)
        self.n_inputs = 0

    @property
    def rank(self) -> int:
        return len(self._rows)

    def reduce(self, v: int) -> tuple[int, int]:
        """Return ``(residual, combo)`` with ``v = residual ^ xor(rows in combo)``."""
        combo = 0
        out = 0
        while v:
            p = v.bit_length() - 1
            hit = self._rows.get(p)
            if hit is None:
                out |= 1 << p
                v ^= 1 << p
            else:
                v ^= hit[0]
                combo ^= hit[1]
        return out, combo

    def add(self, v: int) -> bool:
        """Insert generator number ``n_inputs``; return False if it was dependent."""
        idx = self.n_inputs
        self.n_inputs += 1
        combo = 1 << idx
        while v:
            p = v.bit_length() - 1
            hit = self._rows.get(p)
            if hit is None:
                self._rows[p] = (v, combo)
                return True
            v ^= hit[0]
            combo ^= hit[1]
        return False

    def contains(self, v: int) -> bool:
        return self.reduce(v)[0] == 0

    def solve(self, target: int) -> int | None:
        """Combination (over inputs) whose xor equals ``target``, or None."""
        residual, combo = self.reduce(target)
        if residual:
            return None
        return combo


def rank(vectors: Sequence[int]) -> int:
    basis = XorBasis()
    for v in vectors:
        basis.add(v)
    return basis.rank
