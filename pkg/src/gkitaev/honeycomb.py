"""Honeycomb spins behind each square-lattice site and their bonds.

Square-lattice site ``q`` carries two honeycomb spins, ``2q`` (spin 1) and
``2q + 1`` (spin 2), joined by a z-bond. Spin 2 of ``q`` is bonded to spin 1
of ``right[q]`` by an x-bond and to spin 1 of ``up[q]`` by a y-bond.

In the effective representation a site is an effective spin ``tau`` plus a
hardcore boson ``b`` with ``sigma^z_1 sigma^z_2 = 1 - 2N``. Each honeycomb
Pauli becomes an :class:`Op` times at most one of ``a = b + b^dag`` or
``c = i(b^dag - b)``, see :func:`pauli_tokens`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .lattice import Lattice
from .pauli import Op

PAULI = ("x", "y", "z")
_THIRD = {frozenset("xy"): "z", frozenset("yz"): "x", frozenset("xz"): "y"}
_EPS = {("x", "y", "z"): 1, ("y", "z", "x"): 1, ("z", "x", "y"): 1,
        ("x", "z", "y"): -1, ("z", "y", "x"): -1, ("y", "x", "z"): -1}


def levi_civita(a: str, b: str, c: str) -> int:
    return _EPS.get((a, b, c), 0)


def third(a: str, c: str) -> str:
    return _THIRD[frozenset((a, c))]


@dataclass(frozen=True)
class Bond:
    i: int  # honeycomb spin (spin 2 of its site for x/y bonds)
    j: int
    kind: str  # 'x', 'y' or 'z'
    link: int  # square-lattice link index, -1 for z-bonds


@dataclass(frozen=True)
class Path3:
    """Three-spin term ``sigma^a_i sigma^b_j sigma^c_k`` along bonds ``ij`` and ``jk``."""

    i: int
    j: int
    k: int
    a: str
    b: str
    c: str
    bond_ij: int
    bond_jk: int


class Honeycomb:
    def __init__(self, lat: Lattice) -> None:
        self.lat = lat
        self.n_sites = lat.n_sites
        self.n_spins = 2 * lat.n_sites

    @cached_property
    def bonds(self) -> list[Bond]:
        """z-bonds for every site, then x-links, then y-links (link order)."""
        m = self.n_sites
        out = [Bond(2 * q, 2 * q + 1, "z", -1) for q in range(m)]
        for e in range(self.lat.n_links):
            q1, q2, kind = self.lat.link_endpoints(e)
            out.append(Bond(2 * q1 + 1, 2 * q2, kind, e))
        return out

    @cached_property
    def neighbours(self) -> list[list[tuple[int, int]]]:
        """Per spin, ``(bond index, other spin)`` for its three bonds."""
        nb: list[list[tuple[int, int]]] = [[] for _ in range(self.n_spins)]
        for n, b in enumerate(self.bonds):
            nb[b.i].append((n, b.j))
            nb[b.j].append((n, b.i))
        return nb

    @cached_property
    def paths(self) -> list[Path3]:
        """All length-two paths, one per unordered pair of bonds at each middle spin."""
        out = []
        for j in range(self.n_spins):
            nb = self.neighbours[j]
            for s in range(3):
                for t in range(s + 1, 3):
                    (b1, i), (b2, k) = nb[s], nb[t]
                    a, c = self.bonds[b1].kind, self.bonds[b2].kind
                    out.append(Path3(i, j, k, a, third(a, c), c, b1, b2))
        return out


def pauli_tokens(spin: int, pauli: str) -> tuple[Op, str | None]:
    """``sigma^pauli_spin = op * boson`` with boson in {None, 'a', 'c'} on the same site.

    ``a = b + b^dag`` and ``c = i(b^dag - b)`` both square to one,
    anticommute with ``P``, and satisfy ``a c = i P``.
    """
    q, s = divmod(spin, 2)
    if s == 0:
        return {"x": (Op.X(q), "a"), "y": (Op.Y(q), "a"), "z": (Op.Z(q), None)}[pauli]
    return {"x": (Op(), "a"), "y": (Op.Z(q), "c"), "z": (Op.Z(q) @ Op.P(q), None)}[pauli]
