"""Square lattices on closed surfaces of genus g >= 2.

A genus-g lattice is a chain of ``g - 1`` octagonal patches of square
lattice. Each patch is the set of unit cells of the octagon with side
vectors ``(A, 0), (B, B), (0, C), (-B, B), (-A, 0), (-B, -B), (0, -C),
(B, -B)`` where ``C = n_a`` (vertical edge), ``B = n_b`` (diagonal edge) and
``A = n_c`` (horizontal edge). Lattice sites sit at cell centres.

Opposite diagonal edges and the two horizontal edges of every octagon are
identified by translation. The vertical edges glue octagon ``k`` to octagon
``k + 1`` and the last one back to the first. Translations preserve the
"right" and "up" directions, so every site keeps two x-links and two
y-links; the octagon corners meet at ``g - 1`` cone points, each of which is
the centre of a 12-edge defect plaquette.

Cells cut in half by a diagonal edge are single sites whose centre lies on
the edge; they are stored on the right-hand diagonals (south-east and
north-east).

Coordinates inside a patch are doubled so every quantity is an integer:
cell centres have odd coordinates, octagon vertices even ones.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .gf2 import XorBasis, bits_to_int, int_to_bits

RIGHT, UP, LEFT, DOWN = 0, 1, 2, 3
DIR_NAMES = ("right", "up", "left", "down")
_UNIT = ((1, 0), (0, 1), (-1, 0), (0, -1))

SQUARE = "square"
DEFECT = "defect"


class LatticeError(ValueError):
    """Raised for dimensions whose gluing does not give a simple lattice."""


@dataclass(frozen=True)
class LatticeDims:
    n_a: int
    n_b: int
    n_c: int
    genus: int

    def __post_init__(self) -> None:
        for name in ("n_a", "n_b", "n_c"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise LatticeError(f"{name} must be a positive integer, got {v!r}")
        if int(self.genus) != self.genus or self.genus < 2:
            raise LatticeError(f"genus must be an integer >= 2, got {self.genus!r}")

    @property
    def sites_per_patch(self) -> int:
        a, b, c = self.n_a, self.n_b, self.n_c
        return 2 * b * (a + b + c) + a * c

    @property
    def n_patches(self) -> int:
        return self.genus - 1

    @property
    def n_sites(self) -> int:
        return self.n_patches * self.sites_per_patch

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.n_a, self.n_b, self.n_c, self.genus)


# --------------------------------------------------------------------------
# octagon geometry (doubled coordinates)


class _Octagon:
    """Sides of one patch as half-planes ``n . p <= c`` with their gluings."""

    def __init__(self, dims: LatticeDims) -> None:
        A, B, C = dims.n_c, dims.n_b, dims.n_a
        self.width = 2 * (2 * B + A)
        self.height = 2 * (2 * B + C)
        # (normal, offset, translation, patch shift); order e1..e8
        self.sides = (
            ((0, -1), 0, (0, self.height), 0),  # bottom -> top
            ((1, -1), 2 * (B + A), (-2 * (B + A), 2 * (B + C)), 0),  # SE -> NW
            ((1, 0), self.width, (-self.width, 0), +1),  # right -> next patch
            ((1, 1), 2 * (3 * B + A + C), (-2 * (B + A), -2 * (B + C)), 0),  # NE -> SW
            ((0, 1), self.height, (0, -self.height), 0),  # top -> bottom
            ((-1, 1), 2 * (B + C), (2 * (B + A), -2 * (B + C)), 0),  # NW -> SE
            ((-1, 0), 0, (self.width, 0), -1),  # left -> previous patch
            ((-1, -1), -2 * B, (2 * (B + A), 2 * (B + C)), 0),  # SW -> NE
        )
        # sites whose centre lies on these sides are re-expressed on the
        # glued partner (NW -> SE, SW -> NE)
        self.noncanonical = (5, 7)

    def slack(self, side: int, x: int, y: int) -> int:
        (nx, ny), c, _, _ = self.sides[side]
        return c - (nx * x + ny * y)

    def is_site(self, x: int, y: int) -> bool:
        for s in range(8):
            sl = self.slack(s, x, y)
            if sl < 0 or (sl == 0 and s in self.noncanonical):
                return False
        return True


def _flow(oct_: _Octagon, n_patch: int, patch: int, x: int, y: int, d: int) -> tuple[int, int, int]:
    """Move one lattice spacing in direction ``d`` along the glued surface."""
    ux, uy = _UNIT[d]
    remaining = 2
    for _ in range(16):
        best, best_side = None, None
        for s, ((nx, ny), c, _, _) in enumerate(oct_.sides):
            rate = nx * ux + ny * uy
            if rate <= 0:
                continue
            t = (c - (nx * x + ny * y)) // rate
            if best is None or t < best:
                best, best_side = t, s
        if best >= remaining:
            x += remaining * ux
            y += remaining * uy
            break
        x += best * ux
        y += best * uy
        remaining -= best
        _, _, (tx, ty), shift = oct_.sides[best_side]
        x += tx
        y += ty
        patch = (patch + shift) % n_patch
    else:  # pragma: no cover - geometry guarantees termination
        raise RuntimeError("flow did not terminate")
    for s in oct_.noncanonical:
        if oct_.slack(s, x, y) == 0:
            _, _, (tx, ty), shift = oct_.sides[s]
            x += tx
            y += ty
            patch = (patch + shift) % n_patch
    return patch, x, y


# --------------------------------------------------------------------------
# lattice data


@dataclass(frozen=True)
class Plaquette:
    """A face, listed counter-clockwise from a bottom-left corner.

    ``moves[i]`` is the direction of the link leaving ``sites[i]``.
    """

    sites: tuple[int, ...]
    moves: tuple[int, ...]
    kind: str
    boundary: int  # link bit vector

    @property
    def n_edges(self) -> int:
        return len(self.sites)


@dataclass(frozen=True)
class Cycle:
    """A closed walk on the lattice; ``moves[i]`` leaves ``sites[i]``."""

    sites: tuple[int, ...]
    moves: tuple[int, ...]
    links: int  # link bit vector (Cycle1)

    def link_indices(self) -> list[int]:
        return int_to_bits(self.links)


@dataclass(frozen=True, eq=False)
class Lattice:
    dims: LatticeDims
    positions: np.ndarray  # (M, 3): patch, x, y (doubled coordinates)
    right: np.ndarray
    up: np.ndarray
    left: np.ndarray
    down: np.ndarray
    plaquettes: tuple[Plaquette, ...]
    reference_site: int
    homology_cycles: tuple[Cycle, ...] = field(default=())

    @property
    def n_sites(self) -> int:
        return len(self.right)

    @property
    def n_links(self) -> int:
        return 2 * self.n_sites

    @property
    def genus(self) -> int:
        return self.dims.genus

    # Link ``q`` is the x-link (q, right[q]); link ``M + q`` is the y-link
    # (q, up[q]).
    @property
    def x_links(self) -> list[tuple[int, int]]:
        return [(q, int(self.right[q])) for q in range(self.n_sites)]

    @property
    def y_links(self) -> list[tuple[int, int]]:
        return [(q, int(self.up[q])) for q in range(self.n_sites)]

    def link_endpoints(self, link: int) -> tuple[int, int, str]:
        m = self.n_sites
        if link < m:
            return link, int(self.right[link]), "x"
        q = link - m
        return q, int(self.up[q]), "y"

    def step(self, q: int, d: int) -> int:
        return int((self.right, self.up, self.left, self.down)[d][q])

    def step_link(self, q: int, d: int) -> int:
        """Index of the link traversed when leaving ``q`` in direction ``d``."""
        m = self.n_sites
        if d == RIGHT:
            return q
        if d == LEFT:
            return int(self.left[q])
        if d == UP:
            return m + q
        return m + int(self.down[q])

    @property
    def defects(self) -> list[int]:
        return [i for i, p in enumerate(self.plaquettes) if p.kind == DEFECT]

    def euler_characteristic(self) -> int:
        return self.n_sites - self.n_links + len(self.plaquettes)

    def patch_of(self, q: int) -> int:
        return int(self.positions[q, 0])

    def walk(self, start: int, moves: list[int] | tuple[int, ...]) -> list[int]:
        sites = [start]
        for d in moves:
            sites.append(self.step(sites[-1], d))
        return sites

    def cycle_from_moves(self, start: int, moves: list[int] | tuple[int, ...]) -> Cycle:
        sites = self.walk(start, moves)
        if sites[-1] != start:
            raise LatticeError("walk does not close")
        links = 0
        for q, d in zip(sites, moves):
            links ^= 1 << self.step_link(q, d)
        return Cycle(tuple(sites[:-1]), tuple(moves), links)

    def to_dict(self) -> dict:
        return {
            "dims": list(self.dims.as_tuple()),
            "sites": [list(map(int, p)) for p in self.positions],
            "x_links": self.x_links,
            "y_links": self.y_links,
            "plaquettes": [
                {"kind": p.kind, "sites": list(p.sites), "moves": [DIR_NAMES[d] for d in p.moves]}
                for p in self.plaquettes
            ],
            "reference_site": self.reference_site,
            "homology_cycles": [
                {"sites": list(c.sites), "moves": [DIR_NAMES[d] for d in c.moves]}
                for c in self.homology_cycles
            ],
            "coloring": dict(zip(("colored", "loop_exponents", "sign"), _coloring_json(self))),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


# --------------------------------------------------------------------------
# construction


def _enumerate_sites(dims: LatticeDims, oct_: _Octagon) -> list[tuple[int, int, int]]:
    out = []
    for patch in range(dims.n_patches):
        for y in range(1, oct_.height, 2):
            for x in range(1, oct_.width, 2):
                if oct_.is_site(x, y):
                    out.append((patch, x, y))
    return out


def _check_simple(right: np.ndarray, up: np.ndarray) -> None:
    seen: dict[frozenset, str] = {}
    for q in range(len(right)):
        for kind, nb in (("x", right[q]), ("y", up[q])):
            nb = int(nb)
            if nb == q:
                raise LatticeError(f"{kind}-link of site {q} is a self-loop")
            key = frozenset((q, nb))
            tag = f"{kind}-link ({q},{nb})"
            if key in seen:
                raise LatticeError(f"multi-edge: {tag} duplicates {seen[key]}")
            seen[key] = tag


def _trace_faces(right, up, left, down, m: int) -> list[Plaquette]:
    nbrs = (right, up, left, down)
    done = np.zeros(m, dtype=bool)
    faces = []
    for q0 in range(m):
        if done[q0]:
            continue
        sites, moves, links = [], [], 0
        q = q0
        while True:
            done[q] = True
            for d in (RIGHT, UP, LEFT, DOWN):
                sites.append(q)
                moves.append(d)
                if d == RIGHT:
                    links ^= 1 << q
                elif d == LEFT:
                    links ^= 1 << int(left[q])
                elif d == UP:
                    links ^= 1 << (m + q)
                else:
                    links ^= 1 << (m + int(down[q]))
                q = int(nbrs[d][q])
            if q == q0:
                break
            if len(sites) > 4 * m:  # pragma: no cover
                raise LatticeError("face tracing did not close")
        n = len(sites)
        if n == 4:
            kind = SQUARE
        elif n == 12:
            kind = DEFECT
        else:
            raise LatticeError(f"face with {n} edges at site {q0}")
        faces.append(Plaquette(tuple(sites), tuple(moves), kind, links))
    return faces


def build_lattice(dims: LatticeDims) -> Lattice:
    """Build the glued chain of octagons for ``dims``.

    Sites are indexed patch by patch, then row by row from the bottom, left
    to right within a row.
    """
    oct_ = _Octagon(dims)
    coords = _enumerate_sites(dims, oct_)
    m = len(coords)
    if m != dims.n_sites:  # pragma: no cover - geometry check
        raise LatticeError(f"enumerated {m} sites, expected {dims.n_sites}")
    index = {c: i for i, c in enumerate(coords)}
    nbrs = np.zeros((4, m), dtype=np.int64)
    for i, (patch, x, y) in enumerate(coords):
        for d in range(4):
            nbrs[d, i] = index[_flow(oct_, dims.n_patches, patch, x, y, d)]
    right, up, left, down = nbrs
    for a, b, name in ((right, left, "right/left"), (up, down, "up/down")):
        if not np.array_equal(b[a], np.arange(m)):  # pragma: no cover
            raise LatticeError(f"{name} moves are not inverse")
    _check_simple(right, up)
    faces = _trace_faces(right, up, left, down, m)
    n_def = sum(f.kind == DEFECT for f in faces)
    if n_def != dims.genus - 1:
        raise LatticeError(f"found {n_def} defect plaquettes, expected {dims.genus - 1}")

    B = dims.n_b
    ref = index[(0, 2 * B + 1, 2 * B + 1)]
    lat = Lattice(
        dims=dims,
        positions=np.array(coords, dtype=np.int64),
        right=right,
        up=up,
        left=left,
        down=down,
        plaquettes=tuple(faces),
        reference_site=ref,
    )
    cycles = _choose_homology_cycles(lat, oct_)
    object.__setattr__(lat, "homology_cycles", tuple(cycles))
    for arr in (right, up, left, down, lat.positions):
        arr.setflags(write=False)
    return lat


# --------------------------------------------------------------------------
# homology


def boundary_basis(lat: Lattice) -> XorBasis:
    basis = XorBasis()
    for p in lat.plaquettes:
        basis.add(p.boundary)
    return basis


def chain_boundary(lat: Lattice, plaquettes) -> int:
    """Boundary (link bit vector) of a 2-chain given as plaquette indices."""
    v = 0
    for i in plaquettes:
        v ^= lat.plaquettes[i].boundary
    return v


def is_closed(lat: Lattice, links: int) -> bool:
    """True if every site touches an even number of the given links."""
    deg = np.zeros(lat.n_sites, dtype=np.int64)
    for e in int_to_bits(links):
        a, b, _ = lat.link_endpoints(e)
        deg[a] += 1
        deg[b] += 1
    return bool(np.all(deg % 2 == 0))


def _orbit(step: np.ndarray, start: int) -> list[int]:
    out = [start]
    q = int(step[start])
    while q != start:
        out.append(q)
        q = int(step[q])
    return out


def _is_simple(cyc: Cycle) -> bool:
    return len(set(cyc.sites)) == len(cyc.sites)


def _staircases(lat: Lattice, patch: int) -> Iterator[Cycle]:
    """Closed walks right^a up^b starting in ``patch``, shortest first."""
    m = lat.n_sites
    orbit_id = np.full(m, -1)
    orbit_pos = np.zeros(m, dtype=np.int64)
    orbit_len = []
    for q in range(m):
        if orbit_id[q] < 0:
            orb = _orbit(lat.up, q)
            for k, s in enumerate(orb):
                orbit_id[s] = len(orbit_len)
                orbit_pos[s] = k
            orbit_len.append(len(orb))
    found = []
    for s in range(m):
        if lat.patch_of(s) != patch:
            continue
        c = s
        for a in range(1, m + 1):
            c = int(lat.right[c])
            if c == s:
                break
            if orbit_id[c] != orbit_id[s]:
                continue
            b = int((orbit_pos[s] - orbit_pos[c]) % orbit_len[orbit_id[s]])
            if b == 0:
                continue
            cyc = lat.cycle_from_moves(s, [RIGHT] * a + [UP] * b)
            if _is_simple(cyc):
                found.append((a + b, s, a, cyc))
    found.sort(key=lambda t: t[:3])
    for *_, cyc in found:
        yield cyc


def _choose_homology_cycles(lat: Lattice, oct_: _Octagon) -> list[Cycle]:
    g = lat.genus
    ref = lat.reference_site
    basis = boundary_basis(lat)
    n_bdy = basis.rank

    def push(cyc: Cycle) -> bool:
        return _is_simple(cyc) and basis.add(cyc.links)

    vertical = lat.cycle_from_moves(ref, [UP] * len(_orbit(lat.up, ref)))
    horizontal = lat.cycle_from_moves(ref, [RIGHT] * len(_orbit(lat.right, ref)))
    out: list[Cycle | None] = [None] * (2 * g)
    if not push(vertical):
        raise LatticeError("vertical cycle is null-homologous")
    out[0] = vertical
    if not push(horizontal):
        raise LatticeError("horizontal cycle is dependent")
    out[1] = horizontal

    B = lat.dims.n_b
    for patch in range(lat.dims.n_patches):
        slots = [2 * patch + 2, 2 * patch + 3]
        cands: list[Cycle] = []
        if patch > 0:
            start = {(int(p[0]), int(p[1]), int(p[2])): i for i, p in enumerate(lat.positions)}
            q = start[(patch, 2 * B + 1, 2 * B + 1)]
            cands.append(lat.cycle_from_moves(q, [UP] * len(_orbit(lat.up, q))))
        it = _staircases(lat, patch)
        for slot in slots:
            while True:
                if cands:
                    cyc = cands.pop(0)
                else:
                    cyc = next(it, None)
                    if cyc is None:
                        raise LatticeError(f"no independent cycle for patch {patch}")
                if push(cyc):
                    out[slot] = cyc
                    break
    if basis.rank - n_bdy != 2 * g:
        raise LatticeError("homology basis has wrong rank")
    return [c for c in out if c is not None]


def homology_basis(lat: Lattice) -> list[Cycle]:
    """The 2g representative cycles, after re-checking closure and independence.

    Order: ``L_1`` vertical through the first patch, ``L_2`` horizontal
    around the whole chain, then two cycles per patch.
    """
    cycles = list(lat.homology_cycles)
    g = lat.genus
    if len(cycles) != 2 * g:
        raise LatticeError(f"expected {2 * g} cycles, have {len(cycles)}")
    for c in cycles:
        if not is_closed(lat, c.links):
            raise LatticeError("homology representative is not closed")
    basis = boundary_basis(lat)
    r0 = basis.rank
    for c in cycles:
        basis.add(c.links)
    if basis.rank - r0 != 2 * g:
        raise LatticeError("homology representatives are not independent")
    return cycles


def _coloring_json(lat: Lattice):
    colored, exps, sign = checkerboard(lat)
    return sorted(colored), list(exps), sign


def checkerboard(lat: Lattice):
    """Colored plaquettes, loop exponents and sign expressing the site parity.

    Returns ``(colored, loop_exponents, sign)`` such that
    ``sign * prod_i L_i**e_i * prod_{p in colored} W_p`` equals the product
    of ``(1 - 2N_q)`` over all sites. See
    :func:`gkitaev.symmetry.parity_relation`.
    """
    from .symmetry import parity_relation

    rel = parity_relation(lat)
    return rel.colored, rel.loop_exps, rel.sign


__all__ = [
    "RIGHT",
    "UP",
    "LEFT",
    "DOWN",
    "SQUARE",
    "DEFECT",
    "Cycle",
    "Lattice",
    "LatticeDims",
    "LatticeError",
    "Plaquette",
    "bits_to_int",
    "boundary_basis",
    "build_lattice",
    "chain_boundary",
    "checkerboard",
    "homology_basis",
    "is_closed",
]
