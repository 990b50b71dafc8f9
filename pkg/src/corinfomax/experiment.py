"""Single-run pipeline: generate sources, mix, add noise, fit online, score."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .config import ExperimentConfig
from .datagen import add_awgn, experiment_streams, gen_copula_t, gen_mixing, gen_pam4, gen_uniform_polytope, pam4_scaled
from .domains import DomainKind
from .dynamics import NetworkState, OutputTrace, fit_online
from .metrics import align_to_sources, ser_pam4, sinr_db


@dataclass
class ExperimentData:
    S: np.ndarray  # sources in the units scored against (PAM symbols unscaled)
    S_net: np.ndarray  # sources as seen by the network
    A: np.ndarray
    X: np.ndarray


@dataclass
class RunResult:
    config: dict
    seed: int
    N: int
    window: int
    trace: np.ndarray  # (n_windows, 2): window end index, SINR dB
    final_sinr_db: float
    mean_sinr_db: float
    ser: float | None
    nu_mean: float
    nu_max: int
    converged_frac: float
    wall_s: float
    state: NetworkState | None = field(default=None, repr=False)
    outputs: OutputTrace | None = field(default=None, repr=False)


def generate_data(cfg: ExperimentConfig) -> ExperimentData:
    rs, rm, rn = experiment_streams(cfg.seed)
    st = cfg.source["type"]
    if st == "copula_t":
        marginal = "signed" if cfg.domain.kind is DomainKind.ANTISPARSE else "nonneg"
        S = gen_copula_t(cfg.n, cfg.N, cfg.source["rho"], cfg.source["df"], marginal, rs)
        S_net = S
    elif st == "pam4":
        S = gen_pam4(cfg.n, cfg.N, rs)
        S_net = pam4_scaled(S)
    else:
        S = gen_uniform_polytope(cfg.domain, cfg.N, rs)
        S_net = S
    A = gen_mixing(cfg.m, cfg.n, cfg.mixing, rm)
    X = A @ S_net
    if cfg.N > 0:
        X = add_awgn(X, cfg.snr_db, rn)
    return ExperimentData(S, S_net, A, X)


def trace_window(cfg: ExperimentConfig) -> int:
    return cfg.eval["window"] or max(2, cfg.N // 100)


def sinr_trace(Y, S, window):
    """SINR on the trailing ``window`` samples ending at each multiple of ``window``.

    Returns an array of shape (ceil(N / window), 2) holding the end index and the mean SINR.
    """
    N = Y.shape[1]
    ends = [min((j + 1) * window, N) for j in range(math.ceil(N / window))] if N else []
    rows = []
    for end in ends:
        start = max(0, end - window)
        if end - start < 2:
            start = max(0, end - 2)
        if end - start < 2:
            continue
        rows.append((end, sinr_db(Y[:, start:end], S[:, start:end], strict=False)[1]))
    return np.array(rows, dtype=float).reshape(-1, 2)


def score(cfg: ExperimentConfig, data: ExperimentData, outputs: OutputTrace):
    N = outputs.Y.shape[1]
    window = trace_window(cfg)
    trace = sinr_trace(outputs.Y, data.S_net, window)
    if N < 2:
        return window, trace, math.nan, math.nan, None
    tail = max(2, int(round(cfg.eval["final_fraction"] * N)))
    final = sinr_db(outputs.Y[:, -tail:], data.S_net[:, -tail:], strict=False)[1]
    mean = float(trace[:, 1].mean())
    ser = None
    if cfg.source["type"] == "pam4":
        tail = max(2, int(round(cfg.eval["ser_fraction"] * N)))
        S_tail = data.S[:, -tail:]
        ser = ser_pam4(align_to_sources(outputs.Y[:, -tail:], S_tail), S_tail)
    return window, trace, final, mean, ser


def run_experiment(cfg: ExperimentConfig, keep_outputs=False) -> RunResult:
    data = generate_data(cfg)
    init = cfg.initial_state()
    t0 = time.perf_counter()
    state, outputs = fit_online(data.X, cfg.domain, cfg.forgetting(), cfg.dynamics_config(), cfg.mu_W(),
                                init, mode=cfg.network["update_mode"])
    wall = time.perf_counter() - t0
    window, trace, final, mean, ser = score(cfg, data, outputs)
    N = cfg.N
    return RunResult(
        config=cfg.to_dict(), seed=cfg.seed, N=N, window=window, trace=trace,
        final_sinr_db=final, mean_sinr_db=mean, ser=ser,
        nu_mean=float(outputs.nu.mean()) if N else math.nan,
        nu_max=int(outputs.nu.max()) if N else 0,
        converged_frac=float(outputs.converged.mean()) if N else math.nan,
        wall_s=wall,
        state=state if keep_outputs else None,
        outputs=outputs if keep_outputs else None,
    )
