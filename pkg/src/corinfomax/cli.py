"""Command-line driver: ``cimx run``, ``cimx sweep`` and ``cimx check``.

Exit codes: 0 success, 1 failed checks, 2 invalid configuration, 3 divergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .checks import SUITES, run_suite
from .config import ExperimentConfig, config_to_json, load_config, parse_config, set_dotted
from .exceptions import ConfigError, DegenerateInputError, DivergenceError, NumericalDegeneracyError
from .experiment import run_experiment
from .metrics import SINR_CONVENTION

log = logging.getLogger("corinfomax")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_DIVERGED = 0, 1, 2, 3
AXES = ("rho", "snr", "mixing_dist", "param")
SWEEP_COLUMNS = ("axis_value", "realization", "seed", "status", "mean_sinr_db", "final_sinr_db", "ser", "wall_s")
AGG_COLUMNS = ("axis_value", "n_ok", "mean_sinr_db_mean", "mean_sinr_db_std", "final_sinr_db_mean",
               "final_sinr_db_std", "ser_mean", "ser_std", "wall_s_mean", "wall_s_std")


def fmt(v) -> str:
    """CSV cell: 12 significant digits, '.' decimal, empty for missing values."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{float(v):.12g}"
    return str(v)


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _write_meta(out: Path, cfg_doc, extra=None):
    import numba
    import scipy

    meta = {
        "tool": "corinfomax", "version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__,
        "numba": numba.__version__, "sinr_convention": SINR_CONVENTION,
        "config": cfg_doc,
    }
    meta.update(extra or {})
    (out / "meta.json").write_text(json.dumps(meta, indent=2, default=str))


def _seed_override(cfg: ExperimentConfig, cli_seed):
    seed = cli_seed
    if seed is None and os.environ.get("CIMX_SEED"):
        try:
            seed = int(os.environ["CIMX_SEED"])
        except ValueError:
            raise ConfigError("CIMX_SEED", "must be a non-negative integer") from None
    if seed is not None:
        if seed < 0:
            raise ConfigError("seed", "must be a non-negative integer")
        cfg.seed = seed
    return cfg


# -- run --------------------------------------------------------------------


def cmd_run(args) -> int:
    cfg = _seed_override(load_config(args.config), args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.N == 0:
        log.warning("N = 0: nothing to fit, writing an empty trace")
    res = run_experiment(cfg)
    _write_csv(out / "result.csv",
               ("seed", "N", "window", "final_sinr_db", "mean_sinr_db", "ser", "nu_mean", "nu_max",
                "converged_frac"),
               [(res.seed, res.N, res.window, res.final_sinr_db, res.mean_sinr_db, res.ser, res.nu_mean,
                 res.nu_max, res.converged_frac)])
    _write_csv(out / "trace.csv", ("window", "sinr_db"), [(int(e), s) for e, s in res.trace])
    # timings live in the sidecar so that the CSV bodies are reproducible byte for byte
    _write_meta(out, json.loads(config_to_json(cfg)), {"wall_s": res.wall_s})
    print(f"final SINR {res.final_sinr_db:.2f} dB, mean SINR {res.mean_sinr_db:.2f} dB"
          + ("" if res.ser is None else f", SER {res.ser:.3g}") + f" ({res.wall_s:.1f} s)")
    return EXIT_OK


# -- sweep ------------------------------------------------------------------


def cell_seed(base: int, axis_index: int, realization: int) -> int:
    """Deterministic per-cell seed derived from (base seed, axis index, realization index)."""
    return int(np.random.SeedSequence([base, axis_index, realization]).generate_state(1, np.uint32)[0])


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _axis_doc(doc: dict, axis: str, value, param: str | None) -> dict:
    doc = json.loads(json.dumps(doc))
    if axis == "rho":
        src = doc.setdefault("source", {"type": "copula_t"})
        src["rho"] = value
    elif axis == "snr":
        doc["snr_db"] = value
    elif axis == "mixing_dist":
        doc["mixing"] = value
    else:
        set_dotted(doc, param, value)
    return doc


def _run_cell(task):
    value, r, seed, doc = task
    doc = dict(doc, seed=seed)
    try:
        res = run_experiment(parse_config(doc))
    except (DivergenceError, NumericalDegeneracyError, DegenerateInputError) as err:
        return (value, r, seed, f"diverged: {err}", None, None, None, None)
    return (value, r, seed, "ok", res.mean_sinr_db, res.final_sinr_db, res.ser, res.wall_s)


def aggregate(rows, values):
    """Mean and (population) standard deviation per axis value over successful cells."""
    agg = []
    for v in values:
        ok = [r for r in rows if r[0] == v and r[3] == "ok"]
        line = [v, len(ok)]
        for col in (4, 5, 6, 7):
            xs = np.array([r[col] for r in ok if r[col] is not None], dtype=float)
            line += [float(xs.mean()), float(xs.std())] if xs.size else [None, None]
        agg.append(tuple(line))
    return agg


def cmd_sweep(args) -> int:
    base_cfg = _seed_override(load_config(args.config), args.seed)
    doc = json.loads(Path(args.config).read_text())
    if args.axis not in AXES:
        raise ConfigError("--axis", f"must be one of {AXES}")
    if args.axis == "param" and not args.param:
        raise ConfigError("--param", "required for the param axis (dotted config path)")
    if args.axis == "rho" and base_cfg.source["type"] != "copula_t":
        raise ConfigError("--axis", "rho sweeps need a copula_t source")
    if args.realizations < 1:
        raise ConfigError("--realizations", "must be at least 1")
    values = [_parse_value(v.strip()) for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("--values", "no values given")
    tasks = []
    for i, v in enumerate(values):
        cell_doc = _axis_doc(doc, args.axis, v, args.param)
        parse_config(dict(cell_doc, seed=0))  # validate every cell up front
        for r in range(args.realizations):
            tasks.append((v, r, cell_seed(base_cfg.seed, i, r), cell_doc))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_run_cell, tasks))
    else:
        rows = [_run_cell(t) for t in tasks]
    order = {json.dumps(v): i for i, v in enumerate(values)}
    rows.sort(key=lambda row: (order[json.dumps(row[0])], row[1]))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "sweep.csv", SWEEP_COLUMNS, rows)
    _write_csv(out / "sweep_agg.csv", AGG_COLUMNS, aggregate(rows, values))
    _write_meta(out, doc, {"axis": args.axis, "param": args.param, "values": values,
                           "realizations": args.realizations, "base_seed": base_cfg.seed})
    failed = sum(r[3] != "ok" for r in rows)
    print(f"{len(rows)} cells, {failed} failed")
    return EXIT_OK


# -- check ------------------------------------------------------------------


def cmd_check(args) -> int:
    ok, first = run_suite(args.suite)
    if not ok:
        print(f"first failure: {first}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cimx", description="Online correlative information maximization experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one experiment")
    r.add_argument("--config", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--seed", type=int, default=None, help="overrides the config seed and CIMX_SEED")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="sweep one axis over several realizations")
    s.add_argument("--config", required=True)
    s.add_argument("--axis", required=True, choices=AXES)
    s.add_argument("--values", required=True, help="comma-separated values")
    s.add_argument("--param", default=None, help="dotted config path for --axis param, e.g. network.mu_W")
    s.add_argument("--realizations", type=int, default=10)
    s.add_argument("--out", required=True)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--seed", type=int, default=None)
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("check", help="run built-in invariant suites")
    c.add_argument("suite", choices=("all",) + SUITES)
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as err:
        print(f"diverged at sample {err.sample_index}: {err}", file=sys.stderr)
        return EXIT_DIVERGED
    except (NumericalDegeneracyError, DegenerateInputError) as err:
        print(f"diverged: {err}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
