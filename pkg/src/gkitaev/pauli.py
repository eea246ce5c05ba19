"""Exact algebra of products of effective-spin Paulis and boson parity factors.

Every operator handled here is a global phase times, on each site ``q``,
``P_q**p X_q**x Z_q**z`` with ``P_q = 1 - 2 N_q`` the hardcore-boson parity,
``X, Z`` the effective-spin Paulis and ``p, x, z`` in GF(2). ``P`` commutes
with the Paulis, ``Z X = -X Z`` on the same site and ``Y = i X Z``.

Exponents are stored as three Python integers used as bit masks over site
indices and the phase as an integer ``k`` meaning ``i**k``. Equality and
hashing are structural, so two operators are equal iff they are the same
operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, NamedTuple

from .gf2 import int_to_bits, popcount

_PHASE_STR = ("+1", "+i", "-1", "-i")
_PHASE_VAL = (1, 1j, -1, -1j)


class SiteFactor(NamedTuple):
    """Exponents of ``(1-2N)``, ``X`` and ``Z`` on one site."""

    p_exp: int
    x_exp: int
    z_exp: int


def _phase_index(phase) -> int:
    for k, v in enumerate(_PHASE_VAL):
        if phase == v:
            return k
    raise ValueError(f"phase must be one of +-1, +-i, got {phase!r}")


@dataclass(frozen=True)
class Op:
    """Canonical operator ``i**k * prod_q P^p X^x Z^z``."""

    k: int = 0
    x: int = 0
    z: int = 0
    p: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "k", self.k % 4)

    # construction -----------------------------------------------------
    @classmethod
    def identity(cls) -> "Op":
        return cls()

    @classmethod
    def scalar(cls, phase) -> "Op":
        return cls(k=_phase_index(phase))

    @classmethod
    def site(cls, q: int, *, p: int = 0, x: int = 0, z: int = 0, phase=1) -> "Op":
        bit = 1 << q
        return cls(k=_phase_index(phase), x=bit * (x & 1), z=bit * (z & 1), p=bit * (p & 1))

    @classmethod
    def X(cls, q: int) -> "Op":
        return cls.site(q, x=1)

    @classmethod
    def Z(cls, q: int) -> "Op":
        return cls.site(q, z=1)

    @classmethod
    def Y(cls, q: int) -> "Op":
        return cls.site(q, x=1, z=1, phase=1j)

    @classmethod
    def P(cls, q: int) -> "Op":
        return cls.site(q, p=1)

    # algebra --------------------------------------------------------------
    def __matmul__(self, other: "Op") -> "Op":
        # Z^z_a X^x_b -> X^x_b Z^z_a costs (-1) per site where both are set
        sign = 2 * popcount(self.z & other.x)
        return Op(self.k + other.k + sign, self.x ^ other.x, self.z ^ other.z, self.p ^ other.p)

    def __neg__(self) -> "Op":
        return Op(self.k + 2, self.x, self.z, self.p)

    def times(self, phase) -> "Op":
        return Op(self.k + _phase_index(phase), self.x, self.z, self.p)

    def dagger(self) -> "Op":
        # (X^x Z^z)^dagger = Z^z X^x = (-1)^(x.z) X^x Z^z
        return Op(-self.k + 2 * popcount(self.x & self.z), self.x, self.z, self.p)

    def commutes_with(self, other: "Op") -> bool:
        return (popcount(self.z & other.x) + popcount(self.x & other.z)) % 2 == 0

    # inspection ---------------------------------------------------------------
    @property
    def phase(self) -> complex:
        return _PHASE_VAL[self.k]

    @property
    def support(self) -> list[int]:
        return int_to_bits(self.x | self.z | self.p)

    def factors(self) -> dict[int, SiteFactor]:
        """Sparse map site -> exponents, trivial sites omitted."""
        return {
            q: SiteFactor((self.p >> q) & 1, (self.x >> q) & 1, (self.z >> q) & 1)
            for q in self.support
        }

    def is_scalar(self):
        """The phase if this is a multiple of the identity, else ``None``."""
        if self.x or self.z or self.p:
            return None
        return self.phase

    def is_hermitian(self) -> bool:
        return self.dagger() == self

    def same_up_to_phase(self, other: "Op") -> bool:
        return (self.x, self.z, self.p) == (other.x, other.z, other.p)

    def __str__(self) -> str:
        parts = []
        for q, f in self.factors().items():
            if f.p_exp:
                parts.append(f"P({q})")
            if f.x_exp:
                parts.append(f"X({q})")
            if f.z_exp:
                parts.append(f"Z({q})")
        if not parts:
            return _PHASE_STR[self.k]
        return _PHASE_STR[self.k] + " · " + " ".join(parts)


IDENTITY = Op()


def compose(*ops: Op) -> Op:
    """Product ``ops[0] @ ops[1] @ ...`` in canonical form."""
    return reduce(Op.__matmul__, ops, IDENTITY)


def product(ops: Iterable[Op]) -> Op:
    return reduce(Op.__matmul__, ops, IDENTITY)


def equals(a: Op, b: Op) -> bool:
    return a == b


def is_scalar(a: Op):
    return a.is_scalar()
