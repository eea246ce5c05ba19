"""How the sector energies reorganize as j_x = j_y = j grows at kappa = 0.2.

Prints, for each j, the number of clustered ground sectors and their
energies above the lowest one. On even lattices 16 nearly degenerate
sectors survive for small j. Past the transition 10 remain low and 6 lift
off. On odd lattices the parity constraint leaves 8 at small j.
"""

import sys

import numpy as np

from gkitaev.degeneracy import coupling_sweep
from gkitaev.lattice import LatticeDims, build_lattice


def main(n: int = 4) -> None:
    lat = build_lattice(LatticeDims(n, n, n, 2))
    for p in coupling_sweep(lat, np.linspace(0.05, 1.0, 20), 0.2):
        de = np.sort(p.delta_e)
        flag = "  (unresolved)" if p.report.indeterminate else ""
        print(f"j={p.j:5.3f}  ground={p.report.ground_count:2d}  lowest dE: "
              + " ".join(f"{x:.1e}" for x in de[:12]) + flag)


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 4)
