import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gkitaev.bdg import (
    BdGError,
    Couplings,
    assemble,
    diagonalize,
    generalized_density,
    hermiticity_residual,
    majorana_parity,
    phs_residual,
    quasiparticle_state,
    solve_sector,
    u_block,
    unitarity_residuals,
    vacuum_parity,
)
from gkitaev.lattice import LatticeDims, build_lattice
from gkitaev.symmetry import SectorConfig, symmetries_for

POINTS = [Couplings.isotropic(0.25, 0.2), Couplings.isotropic(1.0, 0.2), Couplings(0.3, 0.7, 1.1, 0.05)]


@pytest.mark.parametrize("j_z", [0.5, 1.0, 1.7])
@pytest.mark.parametrize("dims", [(2, 2, 2, 2), (3, 3, 3, 2)])
def test_decoupled_limit(dims, j_z):
    lat = build_lattice(LatticeDims(*dims))
    m = lat.n_sites
    coup = Couplings(0.0, 0.0, j_z, 0.0)
    sym = symmetries_for(lat.dims)
    for idx in range(16):
        sec = SectorConfig.from_index(lat, idx)
        res = solve_sector(lat, sec, coup)
        assert np.allclose(res.energies, 2 * j_z, atol=1e-12)
        if res.vacuum_parity == res.required_parity:
            assert res.ground_energy == pytest.approx(-m * j_z, abs=1e-10)
        else:
            assert res.ground_energy == pytest.approx(-m * j_z + 2 * j_z, abs=1e-10)
        assert res.required_parity == sym.required_parity(sec)


@pytest.mark.parametrize("coup", POINTS)
def test_numerical_invariants(lat333, coup):
    for idx in (0, 5, 15):
        sys = assemble(lat333, SectorConfig.from_index(lat333, idx), coup)
        assert hermiticity_residual(sys.H) < 1e-12
        assert phs_residual(sys.H) < 1e-10
        E, T = diagonalize(sys)
        assert (E >= 0).all() and (np.diff(E) >= 0).all()
        assert max(unitarity_residuals(sys.U, sys.V)) < 1e-10
        assert np.abs(T.conj().T @ T - np.eye(len(T))).max() < 1e-10
        # T diagonalizes H into diag(E, -E)
        D = T.conj().T @ sys.H @ T
        assert np.abs(D - np.diag(np.concatenate([E, -E]))).max() < 1e-9
        R = generalized_density(T)
        assert np.abs(R @ R - R).max() < 1e-10


def test_kappa_zero_is_real(lat222):
    sys = assemble(lat222, SectorConfig.from_index(lat222, 3), Couplings.isotropic(0.6))
    xi, delta = sys.xi, sys.delta
    assert np.abs(xi.imag).max() < 1e-14 and np.abs(xi - xi.T).max() < 1e-14
    assert np.abs(delta.imag).max() < 1e-14 and np.abs(delta + delta.T).max() < 1e-14


def test_kappa_makes_pairing_complex(lat222):
    sys = assemble(lat222, SectorConfig.from_index(lat222, 0), Couplings.isotropic(0.6, 0.2))
    assert np.abs(sys.H.imag).max() > 1e-3


@st.composite
def phs_matrices(draw):
    m = draw(st.integers(1, 6))
    seed = draw(st.integers(0, 2**31 - 1))
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((2 * m, 2 * m))
    return a - a.T


class _Sys:
    def __init__(self, A):
        from gkitaev.bdg import BdGSystem, nambu_transform

        om = nambu_transform(A.shape[0] // 2)
        self.inner = BdGSystem(A, 0.5 * om.conj().T @ (1j * A) @ om)


@given(phs_matrices())
def test_random_phs_projector(A):
    sys = _Sys(A).inner
    assert phs_residual(sys.H) < 1e-10
    E, T = diagonalize(sys)
    assert max(unitarity_residuals(sys.U, sys.V)) < 1e-10
    R = generalized_density(T)
    assert np.abs(R @ R - R).max() < 1e-10
    assert np.abs(R - R.conj().T).max() < 1e-10
    assert vacuum_parity(sys.U).parity == majorana_parity(sys.majorana_modes)


@given(phs_matrices(), st.data())
def test_quasiparticle_flips_parity(A, data):
    sys = _Sys(A).inner
    _, T = diagonalize(sys)
    m = sys.M
    p0 = vacuum_parity(u_block(T)).parity
    i = data.draw(st.integers(0, m - 1))
    one = quasiparticle_state(T, [i])
    assert vacuum_parity(u_block(one)).parity == -p0
    if m >= 2:
        j = data.draw(st.integers(0, m - 1).filter(lambda x: x != i))
        two = quasiparticle_state(T, [i, j])
        assert vacuum_parity(u_block(two)).parity == p0
    back = quasiparticle_state(one, [i])
    assert np.array_equal(back, T)


def test_quasiparticle_state_validation():
    T = np.eye(4)
    with pytest.raises(ValueError):
        quasiparticle_state(T, [0, 0])
    with pytest.raises(IndexError):
        quasiparticle_state(T, [2])


@pytest.mark.parametrize("delta", np.logspace(-9, -5, 9))
def test_vacuum_parity_threshold_stable(lat333, delta):
    coup = Couplings.isotropic(0.55, 0.2)
    for idx in (0, 9):
        sec = SectorConfig.from_index(lat333, idx)
        base = solve_sector(lat333, sec, coup)
        res = solve_sector(lat333, sec, coup, delta=delta)
        assert res.vacuum_parity == base.vacuum_parity
        sys = assemble(lat333, sec, coup)
        diagonalize(sys)
        assert res.vacuum_parity == majorana_parity(sys.majorana_modes)


def test_parity_report_fields(lat222):
    sys = assemble(lat222, SectorConfig.from_index(lat222, 0), Couplings(0, 0, 1, 0))
    diagonalize(sys)
    rep = vacuum_parity(sys.U)
    assert rep.zero_count % 2 == (0 if rep.parity == 1 else 1)
    assert rep.largest_counted < rep.delta <= rep.smallest_uncounted


def test_zero_modes_are_paired():
    # two decoupled Majoranas plus a bonded pair
    A = np.zeros((4, 4))
    A[0, 2], A[2, 0] = 1.0, -1.0
    sys = _Sys(A).inner
    E, _ = diagonalize(sys)
    assert np.allclose(E, [0.0, 1.0])
    assert max(unitarity_residuals(sys.U, sys.V)) < 1e-12


def test_couplings_validation_and_phase():
    with pytest.raises(ValueError):
        Couplings(float("nan"), 0.2)
    assert Couplings(0.0, 0.0).phase() == "A_z"
    assert Couplings(2.0, 0.1, 0.3).phase() == "A_x"
    assert Couplings.isotropic(0.25, 0.2).abelian
    assert not Couplings.isotropic(1.0, 0.2).abelian


def test_non_hermitian_input_rejected(lat222, monkeypatch):
    import gkitaev.bdg as bdg

    monkeypatch.setattr(bdg, "hermiticity_residual", lambda H: 1.0)
    with pytest.raises(BdGError):
        assemble(lat222, SectorConfig.from_index(lat222, 0), Couplings.isotropic(0.5))


def _canonical_T(n_occ, n_pairs, n_empty, rng):
    """``T`` in Bloch-Messiah form with random outer unitaries."""
    from scipy.stats import unitary_group

    m = n_occ + 2 * n_pairs + n_empty
    ub = np.zeros((m, m))
    vb = np.zeros((m, m))
    k = 0
    for _ in range(n_occ):
        vb[k, k] = 1.0
        k += 1
    for _ in range(n_pairs):
        t = rng.uniform(0.2, 1.3)
        ub[k, k] = ub[k + 1, k + 1] = np.cos(t)
        vb[k, k + 1], vb[k + 1, k] = np.sin(t), -np.sin(t)
        k += 2
    for _ in range(n_empty):
        ub[k, k] = 1.0
        k += 1
    D = unitary_group.rvs(m, random_state=rng) if m > 1 else np.eye(1)
    C = unitary_group.rvs(m, random_state=rng) if m > 1 else np.eye(1)
    U = D @ ub @ C
    V = D.conj() @ vb @ C
    return U, V


@given(st.integers(0, 3), st.integers(0, 2), st.integers(0, 3), st.integers(0, 2**31 - 1))
def test_bloch_messiah_zero_count(n_occ, n_pairs, n_empty, seed):
    if n_occ + n_pairs + n_empty == 0:
        return
    U, V = _canonical_T(n_occ, n_pairs, n_empty, np.random.default_rng(seed))
    assert max(unitarity_residuals(U, V)) < 1e-10
    rep = vacuum_parity(U)
    assert rep.zero_count == n_occ
    assert rep.parity == (-1) ** n_occ


def test_unpaired_limit_has_no_pairing(lat222):
    sys = assemble(lat222, SectorConfig.from_index(lat222, 0), Couplings(0.0, 0.0, 1.0, 0.0))
    _, T = diagonalize(sys)
    assert np.abs(sys.V).max() < 1e-12
    assert np.abs(np.abs(sys.U) @ np.ones(lat222.n_sites) - 1).max() < 1e-12
    rep = vacuum_parity(sys.U)
    assert rep.zero_count == 0 and rep.parity == 1
    from gkitaev.bdg import density_matrices

    rho, k = density_matrices(T)
    assert np.abs(rho).max() < 1e-12 and np.abs(k).max() < 1e-12
    assert np.array_equal(quasiparticle_state(T, []), T)


@pytest.mark.parametrize("coup", POINTS)
def test_parity_corrected_state(lat333, coup):
    corrected = 0
    for idx in range(16):
        sec = SectorConfig.from_index(lat333, idx)
        res = solve_sector(lat333, sec, coup)
        sys = assemble(lat333, sec, coup)
        E, T = diagonalize(sys)
        vac = -0.5 * E.sum()
        if res.parity_corrected:
            corrected += 1
            fixed = quasiparticle_state(T, [0])
            assert vacuum_parity(u_block(fixed)).parity == res.required_parity
            assert res.ground_energy - vac == pytest.approx(E[0], abs=1e-12)
            assert max(unitarity_residuals(fixed[:lat333.n_sites, :lat333.n_sites],
                                           fixed[lat333.n_sites:, :lat333.n_sites])) < 1e-10
        else:
            assert res.ground_energy == pytest.approx(vac, abs=1e-12)
    # odd lattices need the correction somewhere
    assert corrected > 0


def test_random_sector_density_trace(lat222):
    sys = assemble(lat222, SectorConfig.from_index(lat222, 7), Couplings.isotropic(0.8, 0.1))
    _, T = diagonalize(sys)
    from gkitaev.bdg import density_matrices

    rho, _ = density_matrices(T)
    assert np.trace(rho).real == pytest.approx(float((np.abs(sys.V) ** 2).sum()), abs=1e-10)
