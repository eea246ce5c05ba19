import numpy as np

import pytest

from gkitaev.lattice import DEFECT, SQUARE, LatticeDims, build_lattice
from gkitaev.pauli import IDENTITY, Op
from gkitaev.symmetry import (
    ParityRelation,
    ReductionError,
    SectorConfig,
    ZReduction,
    evaluate_Z,
    fermion_string_consistent,
    symmetries_for,
)
from gkitaev.verify import verify_lattice


def _pcount(op):
    return bin(op.p).count("1")


def test_vortex_supports(lat333):
    sym = symmetries_for(lat333.dims)
    for pl, w in zip(lat333.plaquettes, sym.vortices):
        assert len(w.support) == len(pl.sites)
        if pl.kind == SQUARE:
            assert len(w.support) == 4 and _pcount(w) == 2
        else:
            assert pl.kind == DEFECT
            assert len(w.support) == 12 and _pcount(w) == 6


def test_reference_string_is_local(lat222):
    sym = symmetries_for(lat222.dims)
    r = lat222.reference_site
    # a path that never leaves the reference row ends on tau^x
    assert sym.strings[r] == Op.X(r)


def test_strings_give_canonical_fermions(lat333):
    assert fermion_string_consistent(symmetries_for(lat333.dims)) == []


@pytest.mark.parametrize("dims", [(2, 2, 2, 2), (3, 3, 3, 2), (2, 2, 2, 3), (3, 3, 3, 3), (1, 1, 1, 2)])
def test_full_identity_suite(dims):
    report, _, _ = verify_lattice(LatticeDims(*dims))
    failed = [k for k, v in report["checks"].items() if not v]
    assert failed == []
    assert report["failed_links"] == []


def test_generator_rank(lat222):
    sym = symmetries_for(lat222.dims)
    assert sym.generator_rank == lat222.n_sites + 1


def test_link_reductions_recompose(lat222):
    sym = symmetries_for(lat222.dims)
    for e in range(lat222.n_links):
        red = sym.reduce_link(e)
        rec = sym.recompose(red.loop_exps, red.chain)
        assert (rec if red.residual_sign > 0 else -rec) == sym.link_operator(e)


def test_reduce_rejects_foreign_operator(lat222):
    sym = symmetries_for(lat222.dims)
    with pytest.raises(ReductionError):
        sym.reduce(Op.X(0))


def test_reduce_rejects_imaginary_phase(lat222):
    sym = symmetries_for(lat222.dims)
    with pytest.raises(ReductionError, match="imaginary"):
        sym.reduce(sym.loops[0].times(1j))


def test_evaluate_Z_is_multiplicative(lat222):
    sym = symmetries_for(lat222.dims)
    a, b = sym.reduce_link(0), sym.reduce_link(5)
    prod = sym.reduce(sym.link_operator(0) @ sym.link_operator(5))
    for idx in range(16):
        sec = SectorConfig.from_index(lat222, idx)
        assert evaluate_Z(prod, sec) == evaluate_Z(a, sec) * evaluate_Z(b, sec)


def test_evaluate_Z_vortex_dependence():
    red = ZReduction((1, 0, 0, 0), frozenset({2}), -1)
    lat = build_lattice(LatticeDims(2, 2, 2, 2))
    vort = [1] * len(lat.plaquettes)
    vort[2] = vort[3] = -1
    sec = SectorConfig.from_index(lat, 1, vortex=vort)
    assert evaluate_Z(red, sec) == -1 * -1 * -1


def test_sector_config_validation(lat222):
    with pytest.raises(ValueError):
        SectorConfig((1, -1), (1,))
    with pytest.raises(ValueError):
        SectorConfig.vortex_free(lat222, (1, 1))
    sec = SectorConfig.from_index(lat222, 0b0101)
    assert sec.loops == (-1, 1, -1, 1) and sec.loop_bits == "1010"


@pytest.mark.parametrize("dims", [(2, 2, 2, 2), (3, 3, 3, 2), (3, 3, 3, 3)])
def test_parity_relation_verifies(dims):
    sym = symmetries_for(LatticeDims(*dims))
    ok, residual = sym.verify_parity_relation()
    assert ok and residual == IDENTITY


def test_wrong_coloring_is_rejected(lat222):
    sym = symmetries_for(lat222.dims)
    rel = sym.cached_parity_relation()
    wrong = ParityRelation(rel.colored ^ {0}, rel.loop_exps, rel.sign)
    ok, residual = sym.verify_parity_relation(wrong)
    assert not ok and residual != IDENTITY
    flipped = ParityRelation(rel.colored, rel.loop_exps, -rel.sign)
    ok, residual = sym.verify_parity_relation(flipped)
    assert not ok and residual == -IDENTITY


def test_even_lattice_parity_is_sector_independent(lat222):
    sym = symmetries_for(lat222.dims)
    assert {sym.required_parity(SectorConfig.from_index(lat222, i)) for i in range(16)} == {1}


@pytest.mark.parametrize("dims", [(3, 3, 3, 2), (3, 3, 3, 3)])
def test_odd_lattice_parity_splits_sectors_in_half(dims):
    lat = build_lattice(LatticeDims(*dims))
    sym = symmetries_for(lat.dims)
    n = 1 << (2 * lat.genus)
    vals = [sym.required_parity(SectorConfig.from_index(lat, i)) for i in range(n)]
    assert vals.count(1) == vals.count(-1) == n // 2


def test_reductions_json_round_trip(lat222):
    sym = symmetries_for(lat222.dims)
    text = sym.reductions_json()
    fresh = type(sym).build(lat222)
    fresh.load_reductions_json(text)
    assert fresh.reductions() == sym.reductions()
    other = symmetries_for(LatticeDims(3, 3, 3, 2))
    with pytest.raises(ValueError):
        other.load_reductions_json(text)


def test_loop_representative_change(lat222):
    from gkitaev.symmetry import Symmetries

    sym = symmetries_for(lat222.dims)
    p = next(i for i in range(len(lat222.plaquettes)) if i != sym.dropped)
    loops = list(sym.loops)
    loops[0] = loops[0] @ sym.vortices[p]
    alt = Symmetries.build(lat222, loops=loops)
    for idx in range(16):
        sec = SectorConfig.from_index(lat222, idx)
        assert (alt.z_values(sec) == sym.z_values(sec)).all()
        assert alt.required_parity(sec) == sym.required_parity(sec)


def test_sector_flips_are_linear(lat333):
    sym = symmetries_for(lat333.dims)
    reds = sym.reductions()
    base = sym.z_values(SectorConfig.vortex_free(lat333))
    for i in range(4):
        flipped = sym.z_values(SectorConfig.from_index(lat333, 1 << i))
        assert ((flipped != base) == np.array([r.loop_exps[i] == 1 for r in reds])).all()
    n_p = len(lat333.plaquettes)
    for p, q in [(0, 1), (3, n_p - 1)]:
        vort = [1] * n_p
        vort[p] = vort[q] = -1
        flipped = sym.z_values(SectorConfig.from_index(lat333, 0, vortex=vort))
        expect = np.array([(p in r.chain) ^ (q in r.chain) for r in reds])
        assert ((flipped != base) == expect).all()


def test_five_by_five_parity_halves():
    lat = build_lattice(LatticeDims(5, 5, 5, 2))
    sym = symmetries_for(lat.dims)
    assert sym.verify_parity_relation()[0]
    vals = [sym.required_parity(SectorConfig.from_index(lat, i)) for i in range(16)]
    assert vals.count(1) == vals.count(-1) == 8
