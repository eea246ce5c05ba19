import numpy as np
import pytest

from gkitaev.bdg import Couplings, solve_sector
from gkitaev.ed import (
    MAX_SPINS,
    Oracle,
    OracleError,
    PauliMatrices,
    build_full_hamiltonian,
    constraint_rank,
    run_oracle,
    to_honeycomb,
)
from gkitaev.lattice import LatticeDims, build_lattice
from gkitaev.pauli import Op
from gkitaev.symmetry import SectorConfig


@pytest.fixture(scope="module")
def oracle(tiny):
    return Oracle(tiny, seed=3)


def test_pauli_matrices_match_kron():
    pm = PauliMatrices(2)
    x = np.array([[0, 1], [1, 0]])
    z = np.diag([1, -1])
    # qubit 0 is the least significant bit
    dense = pm.sparse(Op.X(0) @ Op.Z(1)).toarray()
    assert np.allclose(dense, np.kron(z, x))
    y = pm.sparse(Op.Y(1)).toarray()
    assert np.allclose(y, np.kron(np.array([[0, -1j], [1j, 0]]), np.eye(2)))
    v = np.arange(4.0)
    assert np.allclose(pm.apply(Op.Y(1), v), y @ v)


def test_spin_limit():
    with pytest.raises(OracleError):
        PauliMatrices(MAX_SPINS + 1)


def test_constraint_rank_counts():
    assert constraint_rank([(Op.Z(0), 1)], 3) == 4
    assert constraint_rank([(Op.Z(0), 1), (Op.Z(0), -1)], 2) == 0
    assert constraint_rank([(Op.Z(0) @ Op.Z(1), 1), (Op.X(0) @ Op.X(1), -1)], 2) == 1


def test_effective_translation(tiny):
    m = tiny.n_sites
    assert to_honeycomb(Op.P(0), m) == Op.Z(0) @ Op.Z(1)
    assert to_honeycomb(Op.X(1), m) == Op.X(2) @ Op.X(3)


def test_vortex_forms_agree(oracle):
    assert oracle.vortex_forms_agree()


def test_conserved_operators_commute(oracle, tiny):
    H = build_full_hamiltonian(tiny, Couplings(0.4, 0.7, 1.0, 0.15))
    wc, lc = oracle.commutator_norms(H)
    assert wc == 0.0 and lc == 0.0
    assert np.abs((H - H.conj().T)).max() < 1e-14


def test_feasibility_follows_parity_prediction(oracle):
    feas = oracle.feasibility()
    assert all((f["rank"] > 0) == f["predicted_feasible"] for f in feas)


def test_sector_basis_is_sector_eigenspace(oracle, tiny):
    sec = SectorConfig.from_index(tiny, 5)
    B = oracle.sector_basis(sec)
    for g, s in oracle._constraints(sec, None):
        assert np.abs(oracle.pm.apply(g, B) - s * B).max() < 1e-10
    assert np.abs(B.conj().T @ B - np.eye(B.shape[1])).max() < 1e-10


@pytest.mark.parametrize("coup", [
    Couplings.isotropic(0.25, 0.2),
    Couplings.isotropic(1.0, 0.2),
    Couplings(0.3, 0.8, 1.2, -0.1),
])
def test_bdg_matches_exact(tiny, coup):
    rep = run_oracle(tiny, coup, seed=1)
    assert rep["max_abs_diff"] < 1e-8
    assert rep["feasibility_matches_prediction"]
    assert rep["odd_vortex_rank"] == 0
    for row in rep["sectors"]:
        sec = SectorConfig.from_index(tiny, row["sector"])
        assert row["bdg_energy"] == pytest.approx(solve_sector(tiny, sec, coup).ground_energy, abs=1e-14)
