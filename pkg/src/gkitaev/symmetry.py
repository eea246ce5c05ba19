"""Vortex, loop, string and link operators, and their GF(2) reductions.

All operators are :class:`gkitaev.pauli.Op` values in the effective
spin/hardcore-boson representation. The link operators ``Z_e`` that dress
every hopping term are rewritten as a sign times a product of loop and
vortex operators by solving one GF(2) linear system per link; in a fixed
symmetry sector they then reduce to numbers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .gf2 import XorBasis, int_to_bits
from .lattice import DEFECT, DOWN, LEFT, RIGHT, UP, Cycle, Lattice, LatticeDims, build_lattice
from .pauli import IDENTITY, Op, compose, product


class ReductionError(RuntimeError):
    """An operator is not in the group generated by loops and vortices."""


# which link of the site a move enters / leaves through
_IN = {RIGHT: "xl", UP: "yd", LEFT: "xr", DOWN: "yu"}
_OUT = {RIGHT: "xr", UP: "yu", LEFT: "xl", DOWN: "yd"}


def _outward(q: int, used: frozenset) -> Op:
    """Site factor equal to the product of honeycomb Paulis pointing off a cycle."""
    P, X, Z = Op.P(q), Op.X(q), Op.Z(q)
    table = {
        frozenset(("xl", "xr")): -(P @ X),
        frozenset(("yd", "yu")): X,
        frozenset(("xr", "yu")): P @ Z,
        frozenset(("xl", "yd")): Z,
        frozenset(("xl", "yu")): Op.Y(q),
        frozenset(("xr", "yd")): P @ Op.Y(q),
    }
    return table[used]


def _loop_factor(q: int, used: frozenset) -> Op:
    """Single-site loop factors: horizontal, vertical and the four corners."""
    P, X, Z, Y = Op.P(q), Op.X(q), Op.Z(q), Op.Y(q)
    table = {
        frozenset(("xl", "xr")): -(P @ X),  # horizontal
        frozenset(("yd", "yu")): X,  # vertical
        frozenset(("xr", "yd")): -(P @ Y),  # corner 1
        frozenset(("xl", "yd")): Z.times(1j),  # corner 2
        frozenset(("xr", "yu")): (P @ Z).times(-1j),  # corner 3
        frozenset(("xl", "yu")): -Y,  # corner 4
    }
    return table[used]


def _visits(sites: Sequence[int], moves: Sequence[int]):
    n = len(sites)
    for i in range(n):
        used = frozenset((_IN[moves[i - 1]], _OUT[moves[i]]))
        if len(used) != 2:  # pragma: no cover - impossible on a simple lattice
            raise ValueError(f"cycle backtracks at site {sites[i]}")
        yield sites[i], used


def vortex_operator(lat: Lattice, p: int) -> Op:
    """Vortex operator of plaquette ``p`` (4 or 12 sites)."""
    pl = lat.plaquettes[p]
    return product(_outward(q, used) for q, used in _visits(pl.sites, pl.moves))


def cycle_operator(cyc: Cycle) -> Op:
    """Loop operator of an arbitrary closed walk (overall factor -1)."""
    return -product(_loop_factor(q, used) for q, used in _visits(cyc.sites, cyc.moves))


def loop_operator(lat: Lattice, i: int) -> Op:
    """Loop operator ``L_i`` for ``i`` in ``1..2g``."""
    if not 1 <= i <= 2 * lat.genus:
        raise IndexError(f"loop index {i} outside 1..{2 * lat.genus}")
    return cycle_operator(lat.homology_cycles[i - 1])


# --------------------------------------------------------------------------
# strings


@dataclass(frozen=True)
class StringPath:
    horizontal: int  # steps to the right from the reference site
    vertical: int  # steps up from the corner


def string_paths(lat: Lattice) -> list[StringPath]:
    """Right-then-up path from the reference site to every site.

    The horizontal leg runs along the reference row (which wraps around the
    whole chain); each site is reached from the nearest row site below it.
    """
    m = lat.n_sites
    row_pos = {}
    q = lat.reference_site
    k = 0
    while q not in row_pos:
        row_pos[q] = k
        q = int(lat.right[q])
        k += 1
    out = []
    for q in range(m):
        s, j = q, 0
        while s not in row_pos:
            s = int(lat.down[s])
            j += 1
            if j > m:
                raise ReductionError(f"site {q} is not above the reference row")
        out.append(StringPath(row_pos[s], j))
    return out


def string_operator(lat: Lattice, q: int, path: StringPath | None = None) -> Op:
    if path is None:
        path = string_paths(lat)[q]
    sites = lat.walk(lat.reference_site, [RIGHT] * path.horizontal + [UP] * path.vertical)
    assert sites[-1] == q
    kx = path.horizontal
    ops = [-(Op.P(s) @ Op.X(s)) for s in sites[:kx]]
    if path.vertical:
        ops.append(-Op.Y(sites[kx]))
        ops.extend(Op.X(s) for s in sites[kx + 1 : -1])
    # a path that never leaves the reference row ends on tau^x, otherwise tau^y
    ops.append(Op.Y(q) if path.vertical else Op.X(q))
    if len(set(sites)) != len(sites):
        raise ReductionError(f"string path to site {q} revisits a site")
    return product(ops)


def link_operator(lat: Lattice, link: int, strings: Sequence[Op] | None = None) -> Op:
    """``X`` operator of an x-link or ``Y`` operator of a y-link."""
    q1, q2, kind = lat.link_endpoints(link)
    if strings is None:
        s1, s2 = string_operator(lat, q1), string_operator(lat, q2)
    else:
        s1, s2 = strings[q1], strings[q2]
    if kind == "x":
        return -compose(Op.P(q1), s1, Op.X(q2), s2)
    return compose(Op.Z(q1), s1, Op.Y(q2), s2).times(1j)


# --------------------------------------------------------------------------
# sectors and reductions


@dataclass(frozen=True)
class SectorConfig:
    vortex: tuple[int, ...]
    loops: tuple[int, ...]

    def __post_init__(self) -> None:
        for v in self.vortex + self.loops:
            if v not in (1, -1):
                raise ValueError("eigenvalues must be +1 or -1")
        if int(np.prod(self.vortex)) != 1:
            raise ValueError("product of vortex eigenvalues must be +1")

    @classmethod
    def vortex_free(cls, lat: Lattice, loops: Sequence[int] | None = None) -> "SectorConfig":
        if loops is None:
            loops = (1,) * (2 * lat.genus)
        if len(loops) != 2 * lat.genus:
            raise ValueError(f"need {2 * lat.genus} loop eigenvalues")
        return cls((1,) * len(lat.plaquettes), tuple(int(v) for v in loops))

    @classmethod
    def from_index(cls, lat: Lattice, index: int, vortex: Sequence[int] | None = None) -> "SectorConfig":
        """Homology sector number ``index``; bit ``i`` set means ``l_{i+1} = -1``."""
        loops = tuple(-1 if (index >> i) & 1 else 1 for i in range(2 * lat.genus))
        if vortex is None:
            vortex = (1,) * len(lat.plaquettes)
        return cls(tuple(vortex), loops)

    @property
    def loop_bits(self) -> str:
        return "".join("1" if v < 0 else "0" for v in self.loops)


@dataclass(frozen=True)
class ZReduction:
    """``Z = residual_sign * prod_i L_i**a_i * prod_{p in chain} W_p``."""

    loop_exps: tuple[int, ...]
    chain: frozenset
    residual_sign: int

    def to_dict(self) -> dict:
        return {"loops": list(self.loop_exps), "chain": sorted(self.chain), "sign": self.residual_sign}

    @classmethod
    def from_dict(cls, d: dict) -> "ZReduction":
        return cls(tuple(d["loops"]), frozenset(d["chain"]), int(d["sign"]))


def evaluate_Z(red: ZReduction, sector: SectorConfig) -> int:
    v = red.residual_sign
    for a, l in zip(red.loop_exps, sector.loops):
        if a:
            v *= l
    for p in red.chain:
        v *= sector.vortex[p]
    return v


def _vec(op: Op, m: int) -> int:
    return op.x | (op.z << m) | (op.p << (2 * m))


@dataclass(frozen=True)
class ParityRelation:
    colored: frozenset
    loop_exps: tuple[int, ...]
    sign: int


@dataclass(eq=False)
class Symmetries:
    """All operators of one lattice plus the solver for their group."""

    lat: Lattice
    vortices: list[Op]
    loops: list[Op]
    strings: list[Op]
    dropped: int
    _basis: XorBasis = field(repr=False)
    _gens: list[tuple[str, int]] = field(repr=False)
    _links: dict = field(default_factory=dict, repr=False)
    _reductions: dict = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, lat: Lattice, loops: Sequence[Op] | None = None) -> "Symmetries":
        """``loops`` swaps in other homology representatives (they must commute with everything)."""
        vort = [vortex_operator(lat, p) for p in range(len(lat.plaquettes))]
        if loops is None:
            loops = [loop_operator(lat, i) for i in range(1, 2 * lat.genus + 1)]
        loops = list(loops)
        paths = string_paths(lat)
        strings = [string_operator(lat, q, paths[q]) for q in range(lat.n_sites)]
        dropped = [i for i, p in enumerate(lat.plaquettes) if p.kind == DEFECT][-1]
        m = lat.n_sites
        basis = XorBasis()
        gens: list[tuple[str, int]] = []
        for i, op in enumerate(loops):
            basis.add(_vec(op, m))
            gens.append(("L", i))
        for p, op in enumerate(vort):
            if p == dropped:
                continue
            basis.add(_vec(op, m))
            gens.append(("W", p))
        return cls(lat, vort, loops, strings, dropped, basis, gens)

    @property
    def generator_rank(self) -> int:
        return self._basis.rank

    def link_operator(self, link: int) -> Op:
        op = self._links.get(link)
        if op is None:
            op = link_operator(self.lat, link, self.strings)
            self._links[link] = op
        return op

    def recompose(self, loop_exps: Sequence[int], chain) -> Op:
        ops = [self.loops[i] for i, a in enumerate(loop_exps) if a]
        ops += [self.vortices[p] for p in sorted(chain)]
        return product(ops)

    def reduce(self, target: Op) -> ZReduction:
        """Express ``target`` through loop and vortex generators."""
        combo = self._basis.solve(_vec(target, self.lat.n_sites))
        if combo is None:
            raise ReductionError(f"operator not generated by loops and vortices: {target}")
        loops = [0] * len(self.loops)
        chain = set()
        for idx in int_to_bits(combo):
            kind, i = self._gens[idx]
            if kind == "L":
                loops[i] ^= 1
            else:
                chain ^= {i}
        rec = self.recompose(loops, chain)
        dk = (target.k - rec.k) % 4
        if dk not in (0, 2):
            raise ReductionError("reduction leaves an imaginary phase")
        red = ZReduction(tuple(loops), frozenset(chain), 1 if dk == 0 else -1)
        return red

    def reduce_link(self, link: int) -> ZReduction:
        red = self._reductions.get(link)
        if red is None:
            red = self.reduce(self.link_operator(link))
            self._reductions[link] = red
        return red

    def reductions(self) -> list[ZReduction]:
        return [self.reduce_link(e) for e in range(self.lat.n_links)]

    def z_values(self, sector: SectorConfig) -> np.ndarray:
        return np.array([evaluate_Z(r, sector) for r in self.reductions()], dtype=float)

    def set_reductions(self, reds: Sequence[ZReduction]) -> None:
        self._reductions = dict(enumerate(reds))

    # ---------------------------------------------------------------- parity
    def parity_operator(self) -> Op:
        return Op(p=(1 << self.lat.n_sites) - 1)

    def checkerboard_guess(self) -> set[int]:
        colored = set()
        for i, pl in enumerate(self.lat.plaquettes):
            _, x, y = self.lat.positions[pl.sites[0]]
            if ((x + y) // 2) % 2 == 0:
                colored.add(i)
        return colored

    def parity_relation(self) -> ParityRelation:
        target = self.parity_operator()
        guess = self.checkerboard_guess()
        partial = product(self.vortices[p] for p in sorted(guess))
        # target = (target @ partial) @ partial since W_p squares to one
        rest = self.reduce(target @ partial)
        colored = frozenset(set(rest.chain) ^ guess)
        rec = self.recompose(rest.loop_exps, colored)
        dk = (target.k - rec.k) % 4
        if not rec.same_up_to_phase(target) or dk not in (0, 2):  # pragma: no cover
            raise ReductionError("parity relation failed to recompose")
        return ParityRelation(colored, rest.loop_exps, 1 if dk == 0 else -1)

    def verify_parity_relation(self, rel: ParityRelation | None = None) -> tuple[bool, Op]:
        """Compare ``sign * loops * colored vortices`` with the site parity.

        Returns ``(ok, residual)`` where ``residual`` is the operator
        ``parity^-1 @ rhs``; it is the identity exactly when ``ok``.
        """
        if rel is None:
            rel = self.parity_relation()
        rhs = self.recompose(rel.loop_exps, rel.colored)
        if rel.sign < 0:
            rhs = -rhs
        residual = self.parity_operator() @ rhs
        return residual == IDENTITY, residual

    def required_parity(self, sector: SectorConfig, rel: ParityRelation | None = None) -> int:
        if rel is None:
            rel = self.cached_parity_relation()
        v = rel.sign
        for a, l in zip(rel.loop_exps, sector.loops):
            if a:
                v *= l
        for p in rel.colored:
            v *= sector.vortex[p]
        return v

    def cached_parity_relation(self) -> ParityRelation:
        rel = getattr(self, "_parity", None)
        if rel is None:
            rel = self.parity_relation()
            self._parity = rel
        return rel

    # ---------------------------------------------------------------- serialization
    def reductions_json(self) -> str:
        return json.dumps(
            {"dims": list(self.lat.dims.as_tuple()), "reductions": [r.to_dict() for r in self.reductions()]}
        )

    def load_reductions_json(self, text: str) -> None:
        d = json.loads(text)
        if tuple(d["dims"]) != self.lat.dims.as_tuple():
            raise ValueError("cached reductions belong to another lattice")
        self.set_reductions([ZReduction.from_dict(r) for r in d["reductions"]])


@lru_cache(maxsize=32)
def symmetries_for(dims: LatticeDims) -> Symmetries:
    return Symmetries.build(build_lattice(dims))


# -------------------------------------------------------------------- module-level API


def reduce_link_operator(lat: Lattice, link: int) -> ZReduction:
    return symmetries_for(lat.dims).reduce_link(link)


def parity_relation(lat: Lattice) -> ParityRelation:
    return symmetries_for(lat.dims).cached_parity_relation()


def required_parity(lat: Lattice, sector: SectorConfig) -> int:
    return symmetries_for(lat.dims).required_parity(sector)


def verify_parity_relation(lat: Lattice, rel: ParityRelation | None = None) -> tuple[bool, Op]:
    return symmetries_for(lat.dims).verify_parity_relation(rel)


def fermion_string_consistent(sym: Symmetries) -> list[tuple[int, int]]:
    """Pairs ``(q, q')`` for which ``b_q S_q`` and ``b_q' S_q'`` fail to anticommute.

    ``b_q`` anticommutes with ``S_q'`` iff ``S_q'`` carries a parity factor
    on ``q``; the strings themselves commute or anticommute as Paulis.
    """
    bad = []
    m = sym.lat.n_sites
    S = sym.strings
    for q in range(m):
        if (S[q].p >> q) & 1:
            bad.append((q, q))
    for q in range(m):
        for r in range(q + 1, m):
            e1 = (S[q].p >> r) & 1
            e2 = (S[r].p >> q) & 1
            e3 = 0 if S[q].commutes_with(S[r]) else 1
            if (e1 + e2 + e3) % 2 != 1:
                bad.append((q, r))
    return bad
