"""Jordan-Wigner type fermionization of honeycomb spin terms.

With the string operators ``S_q`` of :mod:`gkitaev.symmetry` the fermions
are ``f_q = b_q S_q`` and their Majoranas ``alpha_q = (b + b^dag)_q S_q``,
``beta_q = i(b^dag - b)_q S_q``. Majorana ``alpha_q`` has index ``q`` and
``beta_q`` has index ``M + q``.

Any product of honeycomb Paulis can then be rewritten exactly as
``coef * gamma_a gamma_b ... * Z`` with ``Z`` in the group generated by
the loop and vortex operators; in a symmetry sector ``Z`` is a sign.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Sequence

import numpy as np

from .honeycomb import Honeycomb, levi_civita, pauli_tokens
from .pauli import Op
from .symmetry import ReductionError, Symmetries, ZReduction, _vec

_K = {1: 0, 1j: 1, -1: 2, -1j: 3}
_UNIT = (1, 1j, -1, -1j)


@dataclass(frozen=True)
class FermionTerm:
    """``i**k * gamma[m0] gamma[m1] ... * Z`` with ``Z`` reduced over the generators."""

    k: int
    majoranas: tuple[int, ...]
    reduction: ZReduction

    @property
    def coef(self) -> complex:
        return _UNIT[self.k % 4]


def _chi(op: Op, q: int, strings: Sequence[Op]) -> int:
    """0 if ``op`` commutes with the Majoranas on site ``q``, 1 if it anticommutes."""
    return ((op.p >> q) & 1) ^ (0 if op.commutes_with(strings[q]) else 1)


def _canonical(maj: list[int], k: int) -> tuple[tuple[int, ...], int]:
    """Sort a Majorana word with anticommutation signs and cancel squares."""
    maj = list(maj)
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(maj) - 1:
            if maj[i] == maj[i + 1]:
                del maj[i : i + 2]
                changed = True
            elif maj[i] > maj[i + 1]:
                maj[i], maj[i + 1] = maj[i + 1], maj[i]
                k += 2
                changed = True
                i += 1
            else:
                i += 1
    return tuple(maj), k % 4


def fermionize(sym: Symmetries, factors: Sequence[tuple[int, str]]) -> FermionTerm:
    """Exact fermion form of ``prod sigma^{pauli}_{spin}`` (in the given order)."""
    m = sym.lat.n_sites
    k = 0
    acc = Op()
    bosons: list[tuple[int, str]] = []
    for spin, pauli in factors:
        op, boson = pauli_tokens(spin, pauli)
        # bring op left of every boson collected so far
        for q, _ in bosons:
            if (op.p >> q) & 1:
                k += 2
        acc = acc @ op
        if boson is not None:
            bosons.append((spin // 2, boson))
    k += acc.k
    acc = Op(0, acc.x, acc.z, acc.p)
    maj: list[int] = []
    for q, kind in bosons:
        if _chi(acc, q, sym.strings):
            k += 2
        maj.append(q if kind == "a" else m + q)
        acc = acc @ sym.strings[q]
    sites = sorted({spin // 2 for spin, _ in factors})
    for r in range(len(sites) + 1):
        for sub in combinations(sites, r):
            trial = acc
            extra = []
            kk = k
            for q in sub:
                trial = Op.P(q) @ trial
                extra += [q, m + q]
                kk += 3  # P_q = -i alpha_q beta_q
            if sym._basis.contains(_vec(trial, m)):
                kk += trial.k
                trial = Op(0, trial.x, trial.z, trial.p)
                try:
                    red = sym.reduce(trial)
                except ReductionError:
                    # generator product carries i relative to trial
                    trial = trial.times(1j)
                    kk -= 1
                    red = sym.reduce(trial)
                word, kk = _canonical(maj + extra, kk)
                return FermionTerm(kk, word, red)
    raise ReductionError(f"term {list(factors)} has no fermion form with a conserved Z")


@dataclass(frozen=True)
class BondForm:
    """``bond = i * u0 * z * gamma_p gamma_q`` where ``z`` is the sector value of ``reduction``."""

    p: int
    q: int
    u0: int
    reduction: ZReduction

    def to_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "u0": self.u0, **self.reduction.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "BondForm":
        return cls(int(d["p"]), int(d["q"]), int(d["u0"]), ZReduction.from_dict(d))


class FermionModel:
    """Fermion forms of every bond and three-spin term of one lattice."""

    def __init__(self, sym: Symmetries) -> None:
        self.sym = sym
        self.lat = sym.lat
        self.honeycomb = Honeycomb(sym.lat)

    @cached_property
    def bond_forms(self) -> list[BondForm]:
        out = []
        for b in self.honeycomb.bonds:
            t = fermionize(self.sym, [(b.i, b.kind), (b.j, b.kind)])
            if len(t.majoranas) != 2 or t.k % 2 == 0:
                raise ReductionError(f"bond {b} is not a Hermitian Majorana bilinear")
            # coef = i**k = i * u0 with u0 = +-1
            out.append(BondForm(t.majoranas[0], t.majoranas[1], 1 if t.k == 1 else -1, t.reduction))
        return out

    @cached_property
    def spin_majorana(self) -> np.ndarray:
        """The Majorana shared by the three bonds of each honeycomb spin."""
        out = np.full(self.honeycomb.n_spins, -1, dtype=int)
        for s, nb in enumerate(self.honeycomb.neighbours):
            common = None
            for n, _ in nb:
                pair = {self.bond_forms[n].p, self.bond_forms[n].q}
                common = pair if common is None else common & pair
            if not common or len(common) != 1:
                raise ReductionError(f"spin {s} has no unique Majorana")
            out[s] = common.pop()
        if len(set(out.tolist())) != len(out):
            raise ReductionError("two spins share a Majorana")
        return out

    def oriented(self, n: int, spin: int) -> int:
        """Sign ``s`` with ``bond = i * s * u0 * z * gamma(spin) gamma(other)``."""
        bf = self.bond_forms[n]
        return 1 if self.spin_majorana[spin] == bf.p else -1

    @cached_property
    def link_bonds(self) -> np.ndarray:
        """Bond index of every x/y link."""
        out = np.empty(self.lat.n_links, dtype=int)
        for n, b in enumerate(self.honeycomb.bonds):
            if b.link >= 0:
                out[b.link] = n
        return out

    @cached_property
    def reductions(self) -> list[ZReduction]:
        return [bf.reduction for bf in self.bond_forms]

    def bond_signs(self, sector) -> np.ndarray:
        """``u0 * z`` per bond in ``sector`` (vectorised :func:`evaluate_Z`)."""
        from .symmetry import evaluate_Z

        return np.array(
            [bf.u0 * evaluate_Z(bf.reduction, sector) for bf in self.bond_forms], dtype=float
        )

    @cached_property
    def path_data(self) -> tuple[np.ndarray, ...]:
        """Arrays ``(gi, gk, eps*orient, bond_ij, bond_jk)`` for the three-spin terms.

        ``sigma^a_i sigma^b_j sigma^c_k = i eps_abc bond_ij bond_jk`` and
        ``bond_ij bond_jk = -(u_ij)(u_jk) gamma_i gamma_k``.
        """
        p = self.honeycomb.paths
        gi = np.array([self.spin_majorana[t.i] for t in p], dtype=int)
        gk = np.array([self.spin_majorana[t.k] for t in p], dtype=int)
        w = np.array(
            [levi_civita(t.a, t.b, t.c) * self.oriented(t.bond_ij, t.i) * self.oriented(t.bond_jk, t.j) for t in p],
            dtype=float,
        )
        bij = np.array([t.bond_ij for t in p], dtype=int)
        bjk = np.array([t.bond_jk for t in p], dtype=int)
        return gi, gk, w, bij, bjk
