"""Experiment configuration: JSON schema, validation and per-domain hyperparameter presets.

A config document looks like::

    {
      "n": 5, "m": 10, "N": 100000,
      "domain": {"kind": "antisparse"},
      "source": {"type": "copula_t", "rho": 0.0, "df": 4},
      "mixing": "std_normal",
      "snr_db": 30,
      "seed": 1,
      "preset": "antisparse",
      "network": {...}, "dynamics": {...}, "eval": {...}
    }

Only ``domain`` is required.  Network and dynamics fields missing from the
document are filled from the preset (by default the one named after the
domain kind).
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .datagen import MIXING_DISTS
from .domains import DomainKind, DomainSpec, domain_from_dict, domain_to_dict
from .dynamics import DynamicsConfig, ForgettingConfig, NetworkState, steady_counter_start
from .exceptions import ConfigError

# Hyperparameter rows per source domain.  Be_init also fixes eps = 1 / Be_init.
PRESETS: dict[str, dict[str, dict[str, Any]]] = {
    "antisparse": {
        "network": {"By_init": 5.0, "Be_init": 5000.0, "zeta_y": 0.99, "zeta_e": 0.98, "mu_W": 0.03},
        "dynamics": {"c_y": 0.9, "floor_y": 0.0},
    },
    "nonneg_antisparse": {
        "network": {"By_init": 5.0, "Be_init": 2000.0, "zeta_y": 0.99, "zeta_e": 1.0 - 0.1 / 3.0, "mu_W": 0.03},
        "dynamics": {"c_y": 0.9, "floor_y": 1e-3},
    },
    "sparse": {
        "network": {"By_init": 1.0, "Be_init": 1000.0, "zeta_y": 0.99, "zeta_e": 0.99, "mu_W": 0.03},
        "dynamics": {"c_y": 0.1, "floor_y": 1e-3, "eta_lam": 1.0},
    },
    "nonneg_sparse": {
        "network": {"By_init": 5.0, "Be_init": 1000.0, "zeta_y": 0.99, "zeta_e": 0.99, "mu_W": 0.03},
        "dynamics": {"c_y": 0.1, "floor_y": 1e-3, "eta_lam": 1.0},
    },
    "simplex": {
        "network": {"By_init": 5.0, "Be_init": 1000.0, "zeta_y": 0.99, "zeta_e": 0.99, "mu_W": 0.03},
        "dynamics": {"c_y": 0.1, "floor_y": 1e-3, "eta_lam": 0.05},
    },
    "hpolytope": {
        "network": {"By_init": 1.0, "Be_init": 1000.0, "zeta_y": 0.99, "zeta_e": 0.99, "mu_W": 0.05},
        "dynamics": {"c_y": 0.25, "floor_y": 1e-4, "eta_lam": 0.1},
    },
    "feature": {
        "network": {"By_init": 5.0, "Be_init": 2500.0, "zeta_y": 0.99, "zeta_e": 0.99, "mu_W": 0.05},
        "dynamics": {"c_y": 0.1, "floor_y": 1e-10, "eta_lam": 1.0},
    },
    "pam4": {
        "network": {"By_init": 5.0, "Be_init": 1000.0, "zeta_y": 0.99, "zeta_e": 0.99, "mu_W": 0.03},
        "dynamics": {"c_y": 0.9, "floor_y": 1e-3},
    },
}

_COMMON_NETWORK = {
    "be_mode": "scalar",
    "update_mode": "steady",
    "counter_start": "steady",
    "mu_W_decay": None,
}
_COMMON_DYNAMICS = {"nu_max": 500, "eps_t": 1e-6, "eta_lam": 1.0, "lam_init": 0.0, "warm_start": True,
                    "gamma": "steady"}
_SOURCE_TYPES = ("copula_t", "uniform", "pam4")


@dataclass
class ExperimentConfig:
    n: int
    m: int
    N: int
    domain: DomainSpec
    source: dict
    mixing: str
    snr_db: float
    seed: int
    preset: str
    network: dict
    dynamics: dict
    eval: dict = field(default_factory=dict)

    # -- derived objects ---------------------------------------------------
    def forgetting(self) -> ForgettingConfig:
        nw = self.network
        return ForgettingConfig(nw["zeta_y"], nw["zeta_e"], 1.0 / nw["Be_init"])

    def dynamics_config(self) -> DynamicsConfig:
        d = self.dynamics
        return DynamicsConfig(
            nu_max=int(d["nu_max"]), eps_t=d["eps_t"], c_y=d["c_y"], floor_y=d["floor_y"],
            eta_lam=d["eta_lam"], lam_init=d["lam_init"], warm_start=bool(d["warm_start"]),
            gamma=d["gamma"],
        )

    def counter_start(self) -> int:
        cs = self.network["counter_start"]
        if cs == "steady":
            return steady_counter_start(self.network["zeta_y"], self.network["zeta_e"])
        return int(cs)

    def initial_state(self) -> NetworkState:
        nw = self.network
        return NetworkState.initial(self.n, self.m, nw["By_init"], nw["Be_init"], "eye",
                                    k=self.counter_start(), be_exact=nw["be_mode"] == "matrix")

    def mu_W(self):
        """Constant step, or ``mu_W / (1 + decay * (k - k0))`` when a decay rate is set."""
        mu = self.network["mu_W"]
        decay = self.network["mu_W_decay"]
        if not decay:
            return mu
        k0 = self.counter_start()
        return lambda k: mu / (1.0 + decay * (k - k0))

    def to_dict(self) -> dict:
        return {
            "n": self.n, "m": self.m, "N": self.N,
            "domain": domain_to_dict(self.domain),
            "source": dict(self.source), "mixing": self.mixing, "snr_db": self.snr_db,
            "seed": self.seed, "preset": self.preset,
            "network": dict(self.network), "dynamics": dict(self.dynamics), "eval": dict(self.eval),
        }


def _json_safe(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def config_to_json(cfg: ExperimentConfig) -> str:
    d = cfg.to_dict()
    d["snr_db"] = _json_safe(d["snr_db"])
    return json.dumps(d, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# Validation helpers
# ---------------------------------------------------------------------------


def _int(d, key, path, lo=None, default=None):
    v = d.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int):
        if isinstance(v, float) and v.is_integer():
            v = int(v)
        else:
            raise ConfigError(f"{path}{key}", f"expected an integer, got {v!r}")
    if lo is not None and v < lo:
        raise ConfigError(f"{path}{key}", f"must be >= {lo}, got {v}")
    return v


def _num(d, key, path, default=None, lo=None, hi=None, lo_open=False, hi_open=False):
    v = d.get(key, default)
    if isinstance(v, str) and v in ("inf", "+inf"):
        v = math.inf
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}{key}", f"expected a number, got {v!r}")
    v = float(v)
    if math.isnan(v):
        raise ConfigError(f"{path}{key}", "must not be NaN")
    if lo is not None and (v < lo or (lo_open and v == lo)):
        raise ConfigError(f"{path}{key}", f"out of range, got {v}")
    if hi is not None and (v > hi or (hi_open and v == hi)):
        raise ConfigError(f"{path}{key}", f"out of range, got {v}")
    return v


def _numlist(d, key, path, default, lo=0.0, positive=False):
    v = d.get(key, default)
    if isinstance(v, list):
        if not v:
            raise ConfigError(f"{path}{key}", "must not be empty")
        out = [_num({"x": x}, "x", f"{path}{key}[{i}].") for i, x in enumerate(v)]
    else:
        out = [_num(d, key, path, default)]
    for x in out:
        if x < lo or (positive and x <= 0):
            raise ConfigError(f"{path}{key}", f"out of range, got {x}")
    return out if isinstance(v, list) else out[0]


def _reject_unknown(d, allowed, path):
    for key in d:
        if key not in allowed:
            raise ConfigError(f"{path}{key}", "unknown field")


def parse_config(doc: dict) -> ExperimentConfig:
    """Validate a config document and fill defaults; raises ``ConfigError`` with a field path."""
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    _reject_unknown(doc, {"n", "m", "N", "domain", "source", "mixing", "snr_db", "seed", "preset",
                          "network", "dynamics", "eval", "comment"}, "")
    if "domain" not in doc or not isinstance(doc["domain"], dict):
        raise ConfigError("domain", "required object is missing")
    n_hint = doc.get("n")
    try:
        domain = domain_from_dict(doc["domain"], n=n_hint if isinstance(n_hint, int) else None)
    except (ValueError, KeyError, TypeError) as err:
        raise ConfigError("domain", str(err)) from None
    n = _int(doc, "n", "", lo=1, default=domain.n)
    m = _int(doc, "m", "", lo=n, default=2 * n)
    N = _int(doc, "N", "", lo=0, default=100000)
    seed = _int(doc, "seed", "", lo=0, default=0)
    snr_db = _num(doc, "snr_db", "", default=30.0)

    source = dict(doc.get("source", {"type": "uniform"}))
    stype = source.get("type")
    if stype not in _SOURCE_TYPES:
        raise ConfigError("source.type", f"must be one of {_SOURCE_TYPES}, got {stype!r}")
    if stype == "copula_t":
        _reject_unknown(source, {"type", "rho", "df"}, "source.")
        source["rho"] = _num(source, "rho", "source.", default=0.0, lo=0.0, hi=0.8)
        source["df"] = _num(source, "df", "source.", default=4.0, lo=0.0, lo_open=True)
        if domain.kind not in (DomainKind.ANTISPARSE, DomainKind.NONNEG_ANTISPARSE):
            raise ConfigError("source.type", "copula_t sources need an antisparse or nonneg_antisparse domain")
    elif stype == "pam4":
        _reject_unknown(source, {"type"}, "source.")
        if domain.kind is not DomainKind.ANTISPARSE:
            raise ConfigError("source.type", "pam4 sources are fed to the antisparse network")
    else:
        _reject_unknown(source, {"type"}, "source.")

    mixing = doc.get("mixing", "std_normal")
    if mixing not in MIXING_DISTS:
        raise ConfigError("mixing", f"must be one of {MIXING_DISTS}, got {mixing!r}")

    preset = doc.get("preset", "pam4" if stype == "pam4" else domain.kind.value)
    if preset not in PRESETS:
        raise ConfigError("preset", f"unknown preset {preset!r}")

    network = {**_COMMON_NETWORK, **copy.deepcopy(PRESETS[preset]["network"])}
    given = doc.get("network", {})
    if not isinstance(given, dict):
        raise ConfigError("network", "must be an object")
    _reject_unknown(given, set(network), "network.")
    network.update(given)
    p = "network."
    network["By_init"] = _num(network, "By_init", p, lo=0.0, lo_open=True)
    network["Be_init"] = _num(network, "Be_init", p, lo=0.0, lo_open=True)
    network["zeta_y"] = _num(network, "zeta_y", p, lo=0.0, hi=1.0, lo_open=True, hi_open=True)
    network["zeta_e"] = _num(network, "zeta_e", p, lo=0.0, hi=1.0, lo_open=True, hi_open=True)
    network["mu_W"] = _num(network, "mu_W", p, lo=0.0, lo_open=True)
    if network["mu_W_decay"] is not None:
        network["mu_W_decay"] = _num(network, "mu_W_decay", p, lo=0.0)
    if network["be_mode"] not in ("scalar", "matrix"):
        raise ConfigError("network.be_mode", "must be 'scalar' or 'matrix'")
    if network["update_mode"] not in ("steady", "exact"):
        raise ConfigError("network.update_mode", "must be 'steady' or 'exact'")
    if network["counter_start"] != "steady":
        network["counter_start"] = _int(network, "counter_start", p, lo=1)

    dynamics = {**_COMMON_DYNAMICS, **copy.deepcopy(PRESETS[preset]["dynamics"])}
    given = doc.get("dynamics", {})
    if not isinstance(given, dict):
        raise ConfigError("dynamics", "must be an object")
    _reject_unknown(given, set(dynamics), "dynamics.")
    dynamics.update(given)
    p = "dynamics."
    dynamics["nu_max"] = _int(dynamics, "nu_max", p, lo=1)
    dynamics["eps_t"] = _num(dynamics, "eps_t", p, lo=0.0, lo_open=True)
    dynamics["c_y"] = _num(dynamics, "c_y", p, lo=0.0, lo_open=True)
    dynamics["floor_y"] = _num(dynamics, "floor_y", p, lo=0.0)
    dynamics["eta_lam"] = _numlist(dynamics, "eta_lam", p, 1.0, positive=True)
    dynamics["lam_init"] = _numlist(dynamics, "lam_init", p, 0.0)
    if dynamics["gamma"] not in ("steady", "recompute"):
        raise ConfigError("dynamics.gamma", "must be 'steady' or 'recompute'")
    if not isinstance(dynamics["warm_start"], bool):
        raise ConfigError("dynamics.warm_start", "must be true or false")
    n_lam = domain.n_multipliers
    for key in ("eta_lam", "lam_init"):
        if isinstance(dynamics[key], list) and len(dynamics[key]) != n_lam:
            raise ConfigError(f"dynamics.{key}", f"needs {n_lam} entries for this domain")

    ev = {"window": None, "final_fraction": 0.1, "ser_fraction": 0.8}
    given = doc.get("eval", {})
    if not isinstance(given, dict):
        raise ConfigError("eval", "must be an object")
    _reject_unknown(given, set(ev), "eval.")
    ev.update(given)
    if ev["window"] is not None:
        ev["window"] = _int(ev, "window", "eval.", lo=1)
    ev["final_fraction"] = _num(ev, "final_fraction", "eval.", lo=0.0, hi=1.0, lo_open=True)
    ev["ser_fraction"] = _num(ev, "ser_fraction", "eval.", lo=0.0, hi=1.0, lo_open=True)

    if domain.n != n:
        raise ConfigError("n", f"domain has dimension {domain.n} but n = {n}")
    return ExperimentConfig(n, m, N, domain, source, mixing, snr_db, seed, preset, network, dynamics, ev)


def load_config(path) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise ConfigError("<root>", f"invalid JSON: {err}") from None
    except OSError as err:
        raise ConfigError("<file>", str(err)) from None
    return parse_config(doc)


def set_dotted(doc: dict, dotted: str, value):
    """Set ``doc["a"]["b"] = value`` for ``dotted = "a.b"``, creating objects as needed."""
    keys = dotted.split(".")
    cur = doc
    for k in keys[:-1]:
        cur = cur.setdefault(k, {})
        if not isinstance(cur, dict):
            raise ConfigError(dotted, "path crosses a non-object field")
    cur[keys[-1]] = value
    return doc
