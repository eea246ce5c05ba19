import math

import numpy as np
import pytest

from gkitaev.bdg import Couplings, ParityReport, SectorResult
from gkitaev.degeneracy import (
    cluster,
    coupling_sweep,
    degeneracy,
    expected_degeneracy,
    log_linear_fit,
    parity_depends_on_loops,
    splitting_scan,
)
from gkitaev.lattice import LatticeDims, build_lattice
from gkitaev.symmetry import SectorConfig

_REP = ParityReport(1, 0, 0.0, 1.0, 1e-7, False)


def fake(energies, gap=5.0):
    sec = SectorConfig((1,), (1, 1, 1, 1))
    return [SectorResult(sec, np.array([gap, gap]), 1, 1, e, False, _REP, i) for i, e in enumerate(energies)]


def test_expected_degeneracy_table():
    assert expected_degeneracy(2, True, False) == 16
    assert expected_degeneracy(2, True, True) == 8
    assert expected_degeneracy(3, True, False) == 64
    assert expected_degeneracy(3, True, True) == 32
    assert expected_degeneracy(2, False, True) == 10
    assert expected_degeneracy(3, False, False) == 36
    assert [expected_degeneracy(g, False, False) for g in (4, 5, 6)] == [136, 528, 2080]


def test_cluster_picks_well_separated_gap():
    e = [0.0, 1e-4, 2e-4] + [1.0] * 13
    rep = cluster(fake(e))
    assert rep.ground_count == 3 and not rep.indeterminate
    assert rep.ground_sectors == [0, 1, 2]
    assert rep.splitting == pytest.approx(2e-4)
    assert rep.gap == pytest.approx(0.9998)


def test_cluster_prefers_wider_valid_gap():
    # the cut after two sectors is valid but narrower than the cut after four
    e = [0.0, 0.0, 0.01, 0.011] + [2.0] * 12
    rep = cluster(fake(e, gap=10.0))
    assert rep.ground_count == 4


def test_cluster_whole_list_uses_excitation_gap():
    rep = cluster(fake([0.0] * 16, gap=3.0))
    assert rep.ground_count == 16 and rep.gap == pytest.approx(6.0)


def test_cluster_flags_unresolved():
    # no cut has a gap above it, as at a gapless point
    rep = cluster(fake([0.0] * 16, gap=0.0))
    assert rep.indeterminate and rep.ratio == math.inf


def test_cluster_single_ground_sector():
    rep = cluster(fake(np.linspace(0.0, 1.0, 16), gap=0.05))
    assert rep.ground_count == 1 and not rep.indeterminate


def test_cluster_empty():
    with pytest.raises(ValueError):
        cluster([])


def test_log_linear_fit_exact():
    x = [2, 4, 6]
    a, b, r2 = log_linear_fit(x, [math.exp(-1.5 * v + 0.3) for v in x])
    assert a == pytest.approx(-1.5) and b == pytest.approx(0.3) and r2 == pytest.approx(1.0)


def test_parity_dependence():
    assert not parity_depends_on_loops(build_lattice(LatticeDims(2, 2, 2, 2)))
    assert parity_depends_on_loops(build_lattice(LatticeDims(3, 3, 3, 2)))


@pytest.mark.parametrize("dims,coup,count", [
    ((4, 4, 4, 2), Couplings.isotropic(0.25, 0.2), 16),
    ((4, 4, 4, 2), Couplings.isotropic(1.0, 0.2), 10),
    ((3, 3, 3, 2), Couplings.isotropic(0.25, 0.2), 8),
    ((3, 3, 3, 2), Couplings.isotropic(1.0, 0.2), 10),
])
def test_genus_two_degeneracy(dims, coup, count):
    rep, res = degeneracy(build_lattice(LatticeDims(*dims)), coup)
    assert rep.ground_count == count and not rep.indeterminate
    assert len(res) == 16


def test_parallel_matches_serial():
    lat = build_lattice(LatticeDims(2, 2, 2, 2))
    coup = Couplings.isotropic(0.8, 0.2)
    a, _ = degeneracy(lat, coup)
    b, _ = degeneracy(lat, coup, workers=2)
    assert a.sector_energies == b.sector_energies


def test_sweep_requires_sorted_values(lat222):
    with pytest.raises(ValueError):
        coupling_sweep(lat222, [0.5, 0.2], 0.2)
    pts = coupling_sweep(lat222, [0.2, 0.5], 0.2)
    assert [p.j for p in pts] == [0.2, 0.5]
    assert all(min(p.delta_e) == 0.0 and len(p.delta_e) == 16 for p in pts)


def test_splitting_scan_rejects_unequal_dims():
    with pytest.raises(ValueError):
        splitting_scan([LatticeDims(2, 3, 2, 2)], Couplings.isotropic(0.25, 0.1))


def test_splitting_scan_rows():
    scan = splitting_scan([LatticeDims(2, 2, 2, 2), LatticeDims(4, 4, 4, 2)], Couplings.isotropic(0.25, 0.1))
    assert [r["cluster_size"] for r in scan.rows] == [16, 16]
    assert scan.strictly_decreasing and scan.slope < 0


def test_decoupled_point_is_fully_degenerate(lat222):
    rep, res = degeneracy(lat222, Couplings(0.0, 0.0, 1.0, 0.0))
    assert len({r.ground_energy for r in res}) == 1
    assert rep.ground_count == 16 and rep.splitting == 0.0


def test_sector_ordering(lat222):
    from gkitaev.degeneracy import sweep_sectors

    res = sweep_sectors(lat222, Couplings.isotropic(0.5, 0.1))
    assert [r.index for r in res] == list(range(16))
    assert [r.sector.loop_bits for r in res[:3]] == ["0000", "1000", "0100"]


def test_flux_spot_check(lat222):
    from gkitaev.degeneracy import flux_spot_check

    lat = build_lattice(LatticeDims(4, 4, 4, 2))
    fc = flux_spot_check(lat, Couplings.isotropic(1.0, 0.2), 2, seed=5)
    assert len(fc.configurations) == 2 and all(len(c) == 2 for c in fc.configurations)
    assert fc.vortex_free_lowest
