"""Batch front-end: ``gkitaev --config run.json [--mode m] [--out dir]``.

Exit status is 0 on success, 2 when a degeneracy cluster is indeterminate
and 1 on any error (including failed verification).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import platform
import sys
import time
from pathlib import Path
from typing import Any

import numpy as np
import scipy

from . import __version__
from .bdg import CSV_FIELDS, SVD_DELTA, Couplings
from .degeneracy import (
    FLAG_RATIO,
    coupling_sweep,
    degeneracy,
    flux_spot_check,
    expected_degeneracy,
    log_linear_fit,
    parity_depends_on_loops,
    splitting_scan,
)
from .lattice import LatticeDims, build_lattice

MODES = ("degeneracy", "sweep", "splitting", "verify", "oracle")
EXIT_OK, EXIT_ERROR, EXIT_INDETERMINATE = 0, 1, 2

# transition window left out of the per-bin sweep check
SWEEP_ABELIAN_MAX = 0.35
SWEEP_NONABELIAN_MIN = 0.75

_SCHEMA: dict[str, Any] = {
    "mode": str,
    "dims": {"n_a": int, "n_b": int, "n_c": int, "genus": int},
    "couplings": {"j_x": float, "j_y": float, "j_z": float, "kappa": float},
    "sweep": {"j_min": float, "j_max": float, "steps": int, "kappa": float, "j_z": float},
    "splitting": {"N": list, "genus": int, "j": float, "kappa": float, "j_z": float},
    "tolerances": {"svd_delta": float, "cluster_flag_ratio": float},
    "flux_check": int,
    "workers": int,
    "output": str,
    "seed": int,
}


class ConfigError(ValueError):
    pass


def _check(cfg: dict, schema: dict, prefix: str, errors: list[str]) -> None:
    for key, val in cfg.items():
        name = f"{prefix}{key}"
        if key not in schema:
            errors.append(f"unknown key '{name}'")
            continue
        want = schema[key]
        if isinstance(want, dict):
            if not isinstance(val, dict):
                errors.append(f"'{name}' must be an object")
            else:
                _check(val, want, name + ".", errors)
        elif want is float:
            if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
                errors.append(f"'{name}' must be a finite number")
        elif want is int:
            if isinstance(val, bool) or not isinstance(val, int):
                errors.append(f"'{name}' must be an integer")
        elif not isinstance(val, want):
            errors.append(f"'{name}' must be of type {want.__name__}")


def validate_config(cfg: Any) -> dict:
    """Check ``cfg`` against the schema; every problem is reported at once."""
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    errors: list[str] = []
    _check(cfg, _SCHEMA, "", errors)
    mode = cfg.get("mode")
    if mode is not None and mode not in MODES:
        errors.append(f"'mode' must be one of {', '.join(MODES)}")
    if mode in ("degeneracy", "sweep", "verify", "oracle") and "dims" not in cfg:
        errors.append(f"mode '{mode}' needs 'dims'")
    if "dims" in cfg and isinstance(cfg["dims"], dict):
        missing = {"n_a", "n_b", "n_c", "genus"} - set(cfg["dims"])
        errors += [f"missing key 'dims.{k}'" for k in sorted(missing)]
    if mode == "degeneracy" and "couplings" not in cfg:
        errors.append("mode 'degeneracy' needs 'couplings'")
    if "couplings" in cfg and isinstance(cfg["couplings"], dict):
        errors += [f"missing key 'couplings.{k}'" for k in ("j_x", "j_y") if k not in cfg["couplings"]]
    if mode == "sweep" and "sweep" not in cfg:
        errors.append("mode 'sweep' needs 'sweep'")
    if mode == "splitting" and "splitting" not in cfg:
        errors.append("mode 'splitting' needs 'splitting'")
    if isinstance(cfg.get("splitting"), dict) and isinstance(cfg["splitting"].get("N"), list):
        if not all(isinstance(n, int) and not isinstance(n, bool) and n > 0 for n in cfg["splitting"]["N"]):
            errors.append("'splitting.N' must be a list of positive integers")
    if errors:
        raise ConfigError("; ".join(errors))
    return cfg


# ---------------------------------------------------------------------- output helpers


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.15g}"
    return str(x)


def write_csv(path: Path, fields, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            w.writerow([fmt(r[f]) for f in fields])


def _round_floats(obj):
    if isinstance(obj, float):
        return float(f"{obj:.15g}") if math.isfinite(obj) else str(obj)
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    if isinstance(obj, np.generic):
        return _round_floats(obj.item())
    return obj


def write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(_round_floats(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _dims(cfg) -> LatticeDims:
    d = cfg["dims"]
    return LatticeDims(d["n_a"], d["n_b"], d["n_c"], d["genus"])


def _tol(cfg) -> tuple[float, float]:
    t = cfg.get("tolerances", {})
    return t.get("svd_delta", SVD_DELTA), t.get("cluster_flag_ratio", FLAG_RATIO)


def _load_cached_model(dims: LatticeDims) -> None:
    from .cache import warm_model

    warm_model(dims)


# ---------------------------------------------------------------------- modes


def run_degeneracy(cfg, out: Path, workers: int) -> int:
    dims = _dims(cfg)
    _load_cached_model(dims)
    lat = build_lattice(dims)
    c = cfg["couplings"]
    coup = Couplings(c["j_x"], c["j_y"], c.get("j_z", 1.0), c.get("kappa", 0.0))
    delta, ratio = _tol(cfg)
    rep, res = degeneracy(lat, coup, workers=workers, delta=delta, flag_ratio=ratio)
    write_csv(out / "sectors.csv", CSV_FIELDS, [r.csv_row() for r in res])
    write_csv(out / "degeneracy.csv", ("j", "ground_count", "splitting", "gap"),
              [{"j": coup.j_x, "ground_count": rep.ground_count, "splitting": rep.splitting, "gap": rep.gap}])
    odd = parity_depends_on_loops(lat)
    expected = expected_degeneracy(dims.genus, coup.abelian, odd)
    summary = {
        "mode": "degeneracy",
        "dims": list(dims.as_tuple()),
        "phase": coup.phase(),
        "parity_class": "odd" if odd else "even",
        "ground_count": rep.ground_count,
        "expected_ground_count": expected,
        "splitting": rep.splitting,
        "gap": rep.gap,
        "indeterminate": rep.indeterminate,
        "ground_sectors": rep.ground_sectors,
        "pass": rep.ground_count == expected and not rep.indeterminate,
    }
    if cfg.get("flux_check"):
        fc = flux_spot_check(lat, coup, cfg["flux_check"], seed=cfg.get("seed", 0), delta=delta)
        summary["flux_check"] = {"vortex_free_min": fc.vortex_free_min, "vortex_pair_min": fc.vortex_min,
                                 "configurations": [list(c) for c in fc.configurations],
                                 "vortex_free_lowest": fc.vortex_free_lowest}
    write_json(out / "summary.json", summary)
    return EXIT_INDETERMINATE if rep.indeterminate else EXIT_OK


def run_sweep(cfg, out: Path, workers: int) -> int:
    dims = _dims(cfg)
    _load_cached_model(dims)
    lat = build_lattice(dims)
    s = cfg["sweep"]
    js = np.linspace(s["j_min"], s["j_max"], s["steps"])
    delta, _ = _tol(cfg)
    pts = coupling_sweep(lat, js, s.get("kappa", 0.0), j_z=s.get("j_z", 1.0), workers=workers, delta=delta)
    write_csv(out / "degeneracy.csv", ("j", "ground_count", "splitting", "gap"),
              [{"j": p.j, "ground_count": p.report.ground_count, "splitting": p.report.splitting,
                "gap": p.report.gap} for p in pts])
    genus = dims.genus
    rows = [{"j": p.j, "sector": i, "delta_E": de} for p in pts for i, de in enumerate(p.delta_e)]
    write_csv(out / "sectors.csv", ("j", "sector", "delta_E"), rows)
    odd = parity_depends_on_loops(lat)
    checks = []
    for p in pts:
        if p.j <= SWEEP_ABELIAN_MAX:
            want = expected_degeneracy(genus, True, odd)
        elif p.j >= SWEEP_NONABELIAN_MIN:
            want = expected_degeneracy(genus, False, odd)
        else:
            continue
        checks.append({"j": p.j, "ground_count": p.report.ground_count, "expected": want,
                       "pass": p.report.ground_count == want})
    indeterminate = any(p.report.indeterminate for p in pts)
    write_json(out / "summary.json", {
        "mode": "sweep",
        "dims": list(dims.as_tuple()),
        "parity_class": "odd" if odd else "even",
        "bins": {"abelian_max_j": SWEEP_ABELIAN_MAX, "non_abelian_min_j": SWEEP_NONABELIAN_MIN},
        "checks": checks,
        "indeterminate_points": [p.j for p in pts if p.report.indeterminate],
        "pass": all(c["pass"] for c in checks),
    })
    return EXIT_INDETERMINATE if indeterminate else EXIT_OK


def run_splitting(cfg, out: Path, workers: int) -> int:
    s = cfg["splitting"]
    genus = s.get("genus", 2)
    j = s.get("j", 1.0)
    coup = Couplings.isotropic(j, s.get("kappa", 0.2), s.get("j_z", 1.0))
    delta, _ = _tol(cfg)
    dims_list = [LatticeDims(n, n, n, genus) for n in s["N"]]
    for d in dims_list:
        _load_cached_model(d)
    scan = splitting_scan(dims_list, coup, workers=workers, delta=delta)
    write_csv(out / "splitting.csv", ("N", "splitting", "gap", "cluster_size", "clustered_count"), scan.rows)
    write_json(out / "summary.json", {
        "mode": "splitting",
        "phase": coup.phase(),
        "rows": scan.rows,
        "log_slope": scan.slope,
        "r_squared": scan.r_squared,
        "strictly_decreasing": scan.strictly_decreasing,
        "pass": bool(scan.strictly_decreasing and scan.r_squared > 0.95),
    })
    return EXIT_OK


def run_verify(cfg, out: Path, workers: int) -> int:
    from .verify import verify_lattice

    dims = _dims(cfg)
    _load_cached_model(dims)
    report, lat, sym = verify_lattice(dims)
    (out / "lattice.json").write_text(lat.to_json() + "\n")
    (out / "zreductions.json").write_text(sym.reductions_json() + "\n")
    write_json(out / "summary.json", {"mode": "verify", **report})
    return EXIT_OK if report["pass"] else EXIT_ERROR


def run_oracle_mode(cfg, out: Path, workers: int) -> int:
    from .ed import run_oracle

    dims = _dims(cfg)
    lat = build_lattice(dims)
    c = cfg.get("couplings", {"j_x": 1.0, "j_y": 1.0})
    coup = Couplings(c["j_x"], c["j_y"], c.get("j_z", 1.0), c.get("kappa", 0.0))
    rep = run_oracle(lat, coup, seed=cfg.get("seed", 0))
    rep["pass"] = bool(rep["max_abs_diff"] < 1e-8 and rep["feasibility_matches_prediction"])
    write_json(out / "oracle.json", rep)
    return EXIT_OK if rep["pass"] else EXIT_ERROR


_RUNNERS = {
    "degeneracy": run_degeneracy,
    "sweep": run_sweep,
    "splitting": run_splitting,
    "verify": run_verify,
    "oracle": run_oracle_mode,
}


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def run(cfg: dict, out: Path, workers: int = 1) -> int:
    cfg = validate_config(cfg)
    mode = cfg.get("mode")
    if mode is None:
        raise ConfigError("no mode given in config or on the command line")
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    code = _RUNNERS[mode](cfg, out, workers)
    write_json(out / "manifest.json", {
        "config": cfg,
        "config_sha256": config_hash(cfg),
        "mode": mode,
        "exit_code": code,
        "wall_time_s": time.perf_counter() - t0,
        "versions": {
            "gkitaev": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    })
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gkitaev", description=__doc__.splitlines()[0])
    p.add_argument("--config", required=True, type=Path, help="JSON run configuration")
    p.add_argument("--mode", choices=MODES, help="override the config's mode")
    p.add_argument("--out", type=Path, help="output directory (default: config 'output' or ./out)")
    p.add_argument("--workers", type=int, help="worker processes for sector sweeps")
    p.add_argument("--seed", type=int, help="seed for randomized steps")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = json.loads(args.config.read_text())
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        if args.mode:
            cfg["mode"] = args.mode
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.workers is not None:
            cfg["workers"] = args.workers
        out = args.out or Path(cfg.get("output", "out"))
        return run(cfg, out, cfg.get("workers", 1))
    except (ConfigError, OSError, json.JSONDecodeError, ValueError, RuntimeError) as exc:
        print(f"gkitaev: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
