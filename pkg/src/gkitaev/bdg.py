"""Sector-restricted quadratic Hamiltonian, its BdG diagonalization and vacuum parity.

In a fixed sector every bond is ``i u gamma_p gamma_q`` with a sign ``u``, so

    H = -sum_bonds J_kind * bond + kappa * sum_paths sigma sigma sigma
      = (i/4) gamma^T A gamma

for a real antisymmetric ``A`` on the ``2M`` Majoranas. In the Nambu basis
``psi = (c, c^dag)`` this is ``H = (1/2) psi^dag H_BdG psi`` with
``H_BdG = (1/2) Omega^dag (iA) Omega``, ``gamma = Omega psi``.
Quasiparticle energies are the positive eigenvalues, and
``E_vac = -1/2 sum E``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fermion import FermionModel
from .lattice import Lattice, LatticeDims
from .symmetry import SectorConfig, Symmetries, symmetries_for

HERMITICITY_TOL = 1e-12
ZERO_MODE_TOL = 1e-10
SVD_DELTA = 1e-7


class BdGError(RuntimeError):
    pass


@dataclass(frozen=True)
class Couplings:
    j_x: float
    j_y: float
    j_z: float = 1.0
    kappa: float = 0.0

    def __post_init__(self) -> None:
        for v in (self.j_x, self.j_y, self.j_z, self.kappa):
            if not math.isfinite(v):
                raise ValueError("couplings must be finite")

    @classmethod
    def isotropic(cls, j: float, kappa: float = 0.0, j_z: float = 1.0) -> "Couplings":
        """``j_x = j_y = j``."""
        return cls(j, j, j_z, kappa)

    def phase(self) -> str:
        """``'A_x'``, ``'A_y'``, ``'A_z'`` for the gapped Abelian phases, ``'B'`` otherwise."""
        x, y, z = abs(self.j_x), abs(self.j_y), abs(self.j_z)
        if x + y <= z:
            return "A_z"
        if x + z <= y:
            return "A_y"
        if y + z <= x:
            return "A_x"
        return "B"

    @property
    def abelian(self) -> bool:
        return self.phase() != "B"

    def bond_strengths(self, kinds: str) -> np.ndarray:
        table = {"x": self.j_x, "y": self.j_y, "z": self.j_z}
        return np.array([table[k] for k in kinds], dtype=float)


# ---------------------------------------------------------------------- model cache


@dataclass(eq=False)
class Model:
    """Everything that depends on the lattice only."""

    sym: Symmetries
    fermions: FermionModel
    kinds: str
    bond_p: np.ndarray
    bond_q: np.ndarray
    bond_u0: np.ndarray
    red_sign: np.ndarray
    red_loops: np.ndarray  # (n_bonds, 2g) 0/1
    red_chain: list  # per bond, array of plaquettes
    paths: tuple

    @property
    def lat(self) -> Lattice:
        return self.sym.lat

    @classmethod
    def build(cls, sym: Symmetries, bond_forms=None) -> "Model":
        fm = FermionModel(sym)
        if bond_forms is not None:
            fm.bond_forms = bond_forms  # fills the cached property
        bf = fm.bond_forms
        kinds = "".join(b.kind for b in fm.honeycomb.bonds)
        return cls(
            sym,
            fm,
            kinds,
            np.array([b.p for b in bf]),
            np.array([b.q for b in bf]),
            np.array([b.u0 for b in bf], dtype=float),
            np.array([b.reduction.residual_sign for b in bf], dtype=float),
            np.array([b.reduction.loop_exps for b in bf], dtype=int).reshape(len(bf), -1),
            [np.array(sorted(b.reduction.chain), dtype=int) for b in bf],
            fm.path_data,
        )

    def z_values(self, sector: SectorConfig) -> np.ndarray:
        """Sector value of the conserved operator attached to each bond."""
        loops = np.array(sector.loops, dtype=float)
        vort = np.array(sector.vortex, dtype=float)
        z = self.red_sign * np.prod(np.where(self.red_loops == 1, loops, 1.0), axis=1)
        for n, ch in enumerate(self.red_chain):
            if ch.size:
                z[n] *= np.prod(vort[ch])
        return z


_MODELS: dict[LatticeDims, Model] = {}


def model_for(dims: LatticeDims) -> Model:
    """Model of ``dims``, memoised; uses the on-disk cache when ``GK_CACHE_DIR`` is set."""
    model = _MODELS.get(dims)
    if model is None:
        from .cache import load_or_build

        model = load_or_build(dims)
        _MODELS[dims] = model
    return model


def get_model(lat_or_dims) -> Model:
    dims = lat_or_dims.dims if isinstance(lat_or_dims, Lattice) else lat_or_dims
    return model_for(dims)


# ---------------------------------------------------------------------- assembly


@dataclass
class BdGSystem:
    A: np.ndarray  # real antisymmetric Majorana matrix
    H: np.ndarray  # 2M x 2M Nambu matrix
    E: np.ndarray | None = None
    U: np.ndarray | None = None
    V: np.ndarray | None = None
    majorana_modes: np.ndarray | None = field(default=None, repr=False)

    @property
    def M(self) -> int:
        return self.H.shape[0] // 2

    @property
    def xi(self) -> np.ndarray:
        return self.H[: self.M, : self.M]

    @property
    def delta(self) -> np.ndarray:
        return self.H[: self.M, self.M :]

    @property
    def T(self) -> np.ndarray:
        return np.block([[self.U, self.V.conj()], [self.V, self.U.conj()]])


def nambu_transform(m: int) -> np.ndarray:
    """``Omega`` with ``gamma = Omega psi``: ``alpha = c + c^dag``, ``beta = i(c^dag - c)``."""
    eye = np.eye(m)
    return np.block([[eye, eye], [-1j * eye, 1j * eye]])


def majorana_matrix(model: Model, sector: SectorConfig, coup: Couplings, z_table=None) -> np.ndarray:
    m = model.lat.n_sites
    z = model.z_values(sector) if z_table is None else np.asarray(z_table, dtype=float)
    u = model.bond_u0 * z
    A = np.zeros((2 * m, 2 * m))
    c = -coup.bond_strengths(model.kinds) * u
    np.add.at(A, (model.bond_p, model.bond_q), 2 * c)
    np.add.at(A, (model.bond_q, model.bond_p), -2 * c)
    if coup.kappa:
        gi, gk, w, bij, bjk = model.paths
        c3 = -coup.kappa * w * u[bij] * u[bjk]
        np.add.at(A, (gi, gk), 2 * c3)
        np.add.at(A, (gk, gi), -2 * c3)
    return A


def assemble(lat, sector: SectorConfig, coup: Couplings, z_table=None) -> BdGSystem:
    """Build the BdG matrix of ``sector``; ``z_table`` optionally overrides bond signs."""
    model = get_model(lat)
    A = majorana_matrix(model, sector, coup, z_table)
    om = nambu_transform(model.lat.n_sites)
    H = 0.5 * om.conj().T @ (1j * A) @ om
    res = hermiticity_residual(H)
    if res > HERMITICITY_TOL * max(1.0, np.abs(H).max()):
        raise BdGError(f"non-Hermitian BdG matrix, residual {res:.3e}")
    return BdGSystem(A, H)


def hermiticity_residual(H: np.ndarray) -> float:
    return float(np.abs(H - H.conj().T).max())


# ---------------------------------------------------------------------- diagonalization


def _majorana_modes(A: np.ndarray, tol: float = ZERO_MODE_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Energies and real orthogonal ``O`` pairing Majoranas into canonical modes.

    Column pair ``(O[:, 2k], O[:, 2k+1])`` defines ``f_k = (g1 + i g2)/2``
    with ``H = sum_k E_k (f_k^dag f_k - 1/2)``.
    """
    n = A.shape[0]
    m = n // 2
    lam, W = np.linalg.eigh(1j * A)
    pos = lam > tol
    zero = np.abs(lam) <= tol
    nz = int(zero.sum())
    if nz % 2 or int(pos.sum()) + nz // 2 != m:
        raise BdGError(f"cannot pair spectrum: {int(pos.sum())} positive, {nz} near zero")
    E = []
    cols = []
    # zero modes: real orthonormal basis of the (conjugation-closed) null space
    if nz:
        N = W[:, zero]
        basis, s, _ = np.linalg.svd(np.hstack([N.real, N.imag]), full_matrices=False)
        R = basis[:, :nz]
        for k in range(nz // 2):
            E.append(0.0)
            cols += [R[:, 2 * k], R[:, 2 * k + 1]]
    for idx in np.flatnonzero(pos):
        w = W[:, idx] * math.sqrt(2)
        # w = x + i y: f = w^dag gamma / 2 = (x - i y).gamma / 2
        E.append(lam[idx])
        cols += [w.real, -w.imag]
    E = np.array(E)
    O = np.array(cols).T
    order = np.argsort(E, kind="stable")
    E = E[order]
    O = O[:, np.ravel(np.column_stack([2 * order, 2 * order + 1]))]
    return E, O


def diagonalize(sys: BdGSystem) -> tuple[np.ndarray, np.ndarray]:
    """Quasiparticle energies (ascending, non-negative) and the Bogoliubov matrix ``T``.

    ``T = [[U, V*], [V, U*]]`` with quasiparticle ``a_k = sum_i U*_ik c_i + V*_ik c_i^dag``.
    """
    E, O = _majorana_modes(sys.A)
    m = sys.M
    # f_k = (O[:,2k] + i O[:,2k+1]) . gamma / 2 = w_k^dag Omega psi / 2, w_k = O[:,2k] - i O[:,2k+1]
    w = O[:, 0::2] - 1j * O[:, 1::2]
    om = nambu_transform(m)
    cols = (om.conj().T @ w) / 2.0
    sys.E = E
    sys.U = cols[:m]
    sys.V = cols[m:]
    sys.majorana_modes = O
    return E, sys.T


def unitarity_residuals(U: np.ndarray, V: np.ndarray) -> tuple[float, float]:
    m = U.shape[1]
    r1 = np.abs(U.conj().T @ U + V.conj().T @ V - np.eye(m)).max()
    r2 = np.abs(U.T @ V + V.T @ U).max()
    return float(r1), float(r2)


def phs_residual(H: np.ndarray) -> float:
    """Distance between the spectrum and its mirror image."""
    ev = np.linalg.eigvalsh(H)
    return float(np.abs(ev + ev[::-1]).max())


# ---------------------------------------------------------------------- parity


@dataclass(frozen=True)
class ParityReport:
    parity: int
    zero_count: int
    largest_counted: float  # largest singular value below delta (0 if none)
    smallest_uncounted: float
    delta: float
    ambiguous: bool


def vacuum_parity(U: np.ndarray, delta: float = SVD_DELTA) -> ParityReport:
    """Parity of the quasiparticle vacuum from the zero singular values of ``U``."""
    s = np.linalg.svd(U, compute_uv=False)
    ambiguous = bool(np.any((s >= delta / 10) & (s <= delta * 10)))
    used = delta
    if ambiguous:
        used = delta / 100
    counted = s[s < used]
    rest = s[s >= used]
    n0 = int(counted.size)
    return ParityReport(
        1 if n0 % 2 == 0 else -1,
        n0,
        float(counted.max()) if n0 else 0.0,
        float(rest.min()) if rest.size else math.inf,
        used,
        ambiguous,
    )


def majorana_parity(O: np.ndarray) -> int:
    """Vacuum parity from ``det`` of the mode basis relative to the bare fermion vacuum."""
    m = O.shape[0] // 2
    ref = np.ravel(np.column_stack([np.arange(m), m + np.arange(m)]))
    # the bare vacuum pairs (alpha_q, beta_q); its ordering permutation has this sign
    sign_ref = int(round(np.linalg.det(np.eye(2 * m)[:, ref])))
    return int(np.sign(np.linalg.det(O))) * sign_ref


# ---------------------------------------------------------------------- sector solve


@dataclass(frozen=True)
class SectorResult:
    sector: SectorConfig
    energies: np.ndarray
    vacuum_parity: int
    required_parity: int
    ground_energy: float
    parity_corrected: bool
    parity_report: ParityReport
    index: int = -1
    audit: dict | None = field(default=None, compare=False, repr=False)

    @property
    def e1(self) -> float:
        return float(self.energies[0])

    @property
    def energy_sum(self) -> float:
        return float(self.energies.sum())

    @property
    def excitation_gap(self) -> float:
        """Lowest excitation within the same sector and parity."""
        e = self.energies
        if len(e) < 2:
            return math.inf
        return float(e[1] - e[0]) if self.parity_corrected else float(e[0] + e[1])

    def csv_row(self) -> dict:
        return {
            "sector": self.index,
            "loop_bits": self.sector.loop_bits,
            "E_GS": self.ground_energy,
            "vacuum_parity": self.vacuum_parity,
            "required_parity": self.required_parity,
            "parity_corrected": int(self.parity_corrected),
            "E_1": self.e1,
            "sum_E": self.energy_sum,
        }


CSV_FIELDS = ("sector", "loop_bits", "E_GS", "vacuum_parity", "required_parity", "parity_corrected", "E_1", "sum_E")


AUDIT_DELTAS = tuple(np.logspace(-9, -5, 9))


def audit_system(sys: BdGSystem, deltas=AUDIT_DELTAS) -> dict:
    """Residuals of a diagonalized system and its vacuum parity at each threshold."""
    T = sys.T
    R = generalized_density(T)
    u1, u2 = unitarity_residuals(sys.U, sys.V)
    return {
        "hermiticity": hermiticity_residual(sys.H),
        "phs": phs_residual(sys.H),
        "unitarity": max(u1, u2),
        "projector": float(np.abs(R @ R - R).max()),
        "parities": [vacuum_parity(sys.U, d).parity for d in deltas],
        "majorana_parity": majorana_parity(sys.majorana_modes),
    }


def solve_sector(lat, sector: SectorConfig, coup: Couplings, *, delta: float = SVD_DELTA, index: int = -1,
                 audit: bool = False) -> SectorResult:
    model = get_model(lat)
    sys = assemble(lat, sector, coup)
    E, _ = diagonalize(sys)
    rep = vacuum_parity(sys.U, delta)
    req = model.sym.required_parity(sector)
    corrected = rep.parity != req
    eg = -0.5 * float(E.sum()) + (float(E[0]) if corrected else 0.0)
    return SectorResult(sector, E, rep.parity, req, eg, corrected, rep, index, audit_system(sys) if audit else None)


# ---------------------------------------------------------------------- Bogoliubov matrices


def density_matrices(T: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``rho = V* V^T`` and ``k = V* U^T`` of the quasiparticle vacuum."""
    m = T.shape[0] // 2
    U, V = T[:m, :m], T[m:, :m]
    return V.conj() @ V.T, V.conj() @ U.T


def generalized_density(T: np.ndarray) -> np.ndarray:
    rho, k = density_matrices(T)
    m = rho.shape[0]
    return np.block([[rho, k], [-k.conj(), np.eye(m) - rho.conj()]])


def quasiparticle_state(T: np.ndarray, excitations) -> np.ndarray:
    """Bogoliubov matrix of ``prod_i a_i^dag |vac>``: swaps ``(U, V)`` columns with ``(V*, U*)``."""
    exc = list(excitations)
    if len(set(exc)) != len(exc):
        raise ValueError("duplicate excitation index")
    m = T.shape[0] // 2
    out = T.copy()
    for i in exc:
        if not 0 <= i < m:
            raise IndexError(f"excitation {i} out of range")
        out[:, [i, m + i]] = T[:, [m + i, i]]
    return out


def u_block(T: np.ndarray) -> np.ndarray:
    m = T.shape[0] // 2
    return T[:m, :m]
