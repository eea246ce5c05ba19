"""Exact symbolic checks of a built lattice and its operators."""

from __future__ import annotations

from .lattice import LatticeDims, build_lattice, boundary_basis, chain_boundary, homology_basis, is_closed
from .pauli import IDENTITY, product
from .symmetry import (
    ReductionError,
    Symmetries,
    fermion_string_consistent,
    symmetries_for,
)


def verify_lattice(dims: LatticeDims):
    """Run the full identity suite; returns ``(report, lattice, symmetries)``."""
    lat = build_lattice(dims)
    sym: Symmetries = symmetries_for(dims)
    checks: dict[str, bool] = {}
    m, g = lat.n_sites, lat.genus

    checks["site_count"] = m == dims.n_sites
    checks["link_count"] = lat.n_links == 2 * m
    checks["plaquette_count"] = len(lat.plaquettes) == m - 2 * (g - 1)
    checks["defect_count"] = len(lat.defects) == g - 1
    checks["euler_characteristic"] = lat.euler_characteristic() == 2 - 2 * g
    checks["boundaries_sum_to_zero"] = chain_boundary(lat, range(len(lat.plaquettes))) == 0
    cycles = homology_basis(lat)
    checks["cycles_closed"] = all(is_closed(lat, c.links) for c in cycles)
    basis = boundary_basis(lat)
    r0 = basis.rank
    for c in cycles:
        basis.add(c.links)
    checks["homology_rank_2g"] = basis.rank - r0 == 2 * g

    W, L = sym.vortices, sym.loops
    checks["product_of_vortices_is_identity"] = product(W) == IDENTITY
    checks["vortex_loop_squares"] = all(o @ o == IDENTITY for o in W + L)
    checks["vortex_loop_hermitian"] = all(o.is_hermitian() for o in W + L)
    ops = W + L
    checks["mutual_commutation"] = all(a.commutes_with(b) for i, a in enumerate(ops) for b in ops[i + 1 :])
    checks["loop_self_reduction"] = all(
        sym.reduce(L[i]).loop_exps == tuple(int(j == i) for j in range(2 * g)) and not sym.reduce(L[i]).chain
        for i in range(2 * g)
    )
    checks["strings_square_to_one"] = all(s @ s == IDENTITY for s in sym.strings)
    checks["string_anticommutation"] = not fermion_string_consistent(sym)

    recomposed = 0
    failures = []
    for e in range(lat.n_links):
        target = sym.link_operator(e)
        try:
            red = sym.reduce_link(e)
        except ReductionError:
            failures.append(e)
            continue
        rec = sym.recompose(red.loop_exps, red.chain)
        if red.residual_sign < 0:
            rec = -rec
        if rec == target and target.is_hermitian() and target @ target == IDENTITY:
            recomposed += 1
        else:
            failures.append(e)
    checks["link_recomposition"] = not failures

    rel = sym.cached_parity_relation()
    ok, residual = sym.verify_parity_relation(rel)
    checks["parity_relation"] = ok

    report = {
        "dims": list(dims.as_tuple()),
        "n_sites": m,
        "n_plaquettes": len(lat.plaquettes),
        "checks": checks,
        "links_recomposed": recomposed,
        "failed_links": failures,
        "parity_relation": {
            "sign": rel.sign,
            "loop_exponents": list(rel.loop_exps),
            "colored": sorted(rel.colored),
            "residual": str(residual),
        },
        "pass": all(checks.values()),
    }
    return report, lat, sym
