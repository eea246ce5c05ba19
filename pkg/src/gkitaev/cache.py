"""On-disk cache of Z-reduction tables, keyed by lattice dimensions.

Set ``GK_CACHE_DIR`` to enable it. Each file stores the reduction of
every link operator and the fermion form of every bond; a file whose
dimensions or format version do not match is ignored and rewritten.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .lattice import LatticeDims
from .symmetry import ZReduction, symmetries_for

FORMAT = 1
ENV = "GK_CACHE_DIR"


def cache_path(dims: LatticeDims, root: str | os.PathLike | None = None) -> Path | None:
    root = root if root is not None else os.environ.get(ENV)
    if not root:
        return None
    return Path(root) / "zred_{}_{}_{}_g{}.json".format(*dims.as_tuple())


def load_or_build(dims: LatticeDims):
    from .bdg import Model
    from .fermion import BondForm

    sym = symmetries_for(dims)
    path = cache_path(dims)
    if path is not None and path.exists():
        try:
            d = json.loads(path.read_text())
            if d.get("format") == FORMAT and tuple(d["dims"]) == dims.as_tuple():
                sym.set_reductions([ZReduction.from_dict(r) for r in d["links"]])
                return Model.build(sym, [BondForm.from_dict(b) for b in d["bonds"]])
        except (ValueError, KeyError, TypeError):
            pass
    model = Model.build(sym)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "format": FORMAT,
            "dims": list(dims.as_tuple()),
            "links": [r.to_dict() for r in sym.reductions()],
            "bonds": [b.to_dict() for b in model.fermions.bond_forms],
        }
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload, sort_keys=True))
        tmp.replace(path)
    return model


def warm_model(dims: LatticeDims):
    from .bdg import model_for

    return model_for(dims)
