"""Online CorInfoMax learner: network state, gamma factors, neural dynamics, synaptic updates.

The public per-step functions (``compute_gamma_y``, ``grad_J``, ``run_dynamics``,
``update_W``, ``update_By``, ``update_Be``) are plain numpy.  The inner fixed-point
loop and the whole-stream driver used by ``fit_online`` are compiled with numba;
both follow the same arithmetic as the per-step functions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from numba import njit

from .domains import DomainKind, DomainSpec
from .exceptions import DegenerateInputError, DivergenceError, NumericalDegeneracyError

_KIND_CODE = {
    DomainKind.ANTISPARSE: 0,
    DomainKind.NONNEG_ANTISPARSE: 1,
    DomainKind.SPARSE: 2,
    DomainKind.NONNEG_SPARSE: 3,
    DomainKind.SIMPLEX: 4,
    DomainKind.HPOLYTOPE: 5,
    DomainKind.FEATURE: 6,
}

# kernel status codes
_OK = 0
_NONFINITE = 1
_DEGENERATE_GAMMA = 2
_LOST_PD = 3


# ---------------------------------------------------------------------------
# Configuration and state
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ForgettingConfig:
    zeta_y: float
    zeta_e: float
    eps: float

    def __post_init__(self):
        for name in ("zeta_y", "zeta_e"):
            z = getattr(self, name)
            if not 0.0 < z < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {z}")
        if not self.eps > 0.0:
            raise ValueError(f"eps must be positive, got {self.eps}")


@dataclass(frozen=True)
class DynamicsConfig:
    """Controls of the per-sample fixed-point loop.

    The output step size is ``eta_y(nu) = max(c_y / nu, floor_y)``.  ``eta_lam``
    and ``lam_init`` may be scalars or one value per multiplier.

    ``gamma`` selects how the gradient weights are formed at each iteration:
    ``"recompute"`` evaluates ``compute_gamma_y``/``compute_gamma_e`` at the
    current y and e; ``"steady"`` uses the constants ``(1 - zeta)/zeta``, as in
    the fixed-synapse network realization.
    """

    nu_max: int = 500
    eps_t: float = 1e-6
    c_y: float = 0.9
    floor_y: float = 0.0
    eta_lam: float | Sequence[float] = 1.0
    lam_init: float | Sequence[float] = 0.0
    warm_start: bool = True
    gamma: str = "recompute"

    def __post_init__(self):
        if self.gamma not in ("recompute", "steady"):
            raise ValueError(f"gamma must be 'recompute' or 'steady', got {self.gamma!r}")
        if int(self.nu_max) < 1:
            raise ValueError("nu_max must be at least 1")
        if not self.eps_t > 0:
            raise ValueError("eps_t must be positive")
        if not self.c_y > 0 or self.floor_y < 0:
            raise ValueError("eta_y schedule must be positive")
        if np.any(np.asarray(self.eta_lam, dtype=float) <= 0):
            raise ValueError("eta_lam must be positive")
        if np.any(np.asarray(self.lam_init, dtype=float) < 0):
            raise ValueError("lam_init must be nonnegative")

    def eta_y(self, nu: int) -> float:
        return max(self.c_y / nu, self.floor_y)


@dataclass
class NetworkState:
    """Synaptic state of the network.

    ``Be`` is either an (n, n) matrix or a float ``b`` standing for ``b * I``
    (the scalar-identity approximation with ``b = 1 / eps``).
    """

    W: np.ndarray
    By: np.ndarray
    Be: np.ndarray | float
    k: int = 1

    def __post_init__(self):
        self.W = np.array(self.W, dtype=float)
        self.By = np.array(self.By, dtype=float)
        if self.W.ndim != 2:
            raise ValueError("W must be a matrix")
        n = self.W.shape[0]
        if self.By.shape != (n, n):
            raise ValueError(f"By must be {n}x{n}, got {self.By.shape}")
        if np.isscalar(self.Be) or np.ndim(self.Be) == 0:
            self.Be = float(self.Be)
            if not self.Be > 0:
                raise ValueError("scalar Be must be positive")
        else:
            self.Be = np.array(self.Be, dtype=float)
            if self.Be.shape != (n, n):
                raise ValueError(f"Be must be {n}x{n}, got {self.Be.shape}")
        if int(self.k) < 1:
            raise ValueError("sample counter must be >= 1")
        self.k = int(self.k)

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @property
    def m(self) -> int:
        return self.W.shape[1]

    @property
    def be_scalar(self) -> bool:
        return isinstance(self.Be, float)

    def copy(self) -> NetworkState:
        Be = self.Be if self.be_scalar else self.Be.copy()
        return NetworkState(self.W.copy(), self.By.copy(), Be, self.k)

    def Be_matrix(self) -> np.ndarray:
        return self.Be * np.eye(self.n) if self.be_scalar else self.Be

    @classmethod
    def initial(cls, n, m, by=5.0, be=1000.0, w="eye", k=1, be_exact=False) -> NetworkState:
        """Scaled-identity start: ``W = eye(n, m)``, ``By = by*I``, ``Be = be*I``."""
        if isinstance(w, str):
            if w != "eye":
                raise ValueError(f"unknown W initializer {w!r}")
            W = np.eye(n, m)
        else:
            W = np.asarray(w, dtype=float)
        Be = be * np.eye(n) if be_exact else float(be)
        return cls(W, by * np.eye(n), Be, k)


def steady_counter_start(*zetas: float, tol: float = 1e-12) -> int:
    """Smallest k with ``zeta**k < tol`` for every forgetting factor."""
    return max(int(math.ceil(math.log(tol) / math.log(z))) for z in zetas)


@dataclass
class OutputRecord:
    y: np.ndarray
    e: np.ndarray
    nu_used: int
    converged: bool
    lam_final: np.ndarray | None = None


@dataclass
class OutputTrace:
    """Columnar store of per-sample outputs; indexing yields ``OutputRecord``."""

    Y: np.ndarray
    E: np.ndarray
    nu: np.ndarray
    converged: np.ndarray
    lam: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    def __len__(self):
        return self.Y.shape[1]

    def __getitem__(self, i):
        lam = self.lam[i].copy() if self.lam.shape[1] else None
        return OutputRecord(self.Y[:, i].copy(), self.E[:, i].copy(), int(self.nu[i]), bool(self.converged[i]), lam)

    def __iter__(self):
        return (self[i] for i in range(len(self)))


# ---------------------------------------------------------------------------
# Per-step numpy functions
# ---------------------------------------------------------------------------


def _prior_weight(zeta, k):
    return (zeta - zeta**k) / (1.0 - zeta)


def _gamma(B, v, zeta, k):
    if k < 1:
        raise ValueError("k must be >= 1")
    v = np.asarray(v, dtype=float)
    q = (v @ v) * B if np.ndim(B) == 0 else v @ B @ v
    den = _prior_weight(zeta, k) + q
    if not den > 0:
        raise DegenerateInputError(f"gamma denominator is {den} (k={k}, quadratic term {q})")
    return 1.0 / den


def compute_gamma_y(By, y, zeta_y, k) -> float:
    """``((zeta - zeta**k)/(1 - zeta) + y' By y)**-1``."""
    return _gamma(np.asarray(By, dtype=float), y, zeta_y, k)


def compute_gamma_e(Be, e, zeta_e, k) -> float:
    """Same formula as ``compute_gamma_y``; a scalar ``Be`` stands for ``Be * I``."""
    return _gamma(Be if np.ndim(Be) == 0 else np.asarray(Be, dtype=float), e, zeta_e, k)


def grad_J(state: NetworkState, y, e, gamma_y, gamma_e) -> np.ndarray:
    """Gradient of the online objective in y: ``gamma_y By y - gamma_e Be e``."""
    y = np.asarray(y, dtype=float)
    e = np.asarray(e, dtype=float)
    if y.shape != (state.n,) or e.shape != (state.n,):
        raise ValueError("y and e must have length n")
    Be_e = state.Be * e if state.be_scalar else state.Be @ e
    return gamma_y * (state.By @ y) - gamma_e * Be_e


def _rank1_inverse_update(B, v, zeta, k, mode):
    z = B @ v
    q = v @ z
    if q < 0:
        raise NumericalDegeneracyError(f"quadratic form is negative ({q})")
    if mode == "exact":
        if zeta - zeta**k <= 0:
            raise DegenerateInputError("exact update is undefined at k = 1")
        g = 1.0 / (_prior_weight(zeta, k) + q)
        B = ((1.0 - zeta**k) / (zeta - zeta**k)) * (B - g * np.outer(z, z))
    elif mode == "steady":
        c = (1.0 - zeta) / zeta
        if c * q >= 1.0:
            raise NumericalDegeneracyError(f"steady update loses definiteness (c*q = {c * q})")
        B = (B - c * np.outer(z, z)) / zeta
    else:
        raise ValueError(f"unknown update mode {mode!r}")
    return 0.5 * (B + B.T)


def update_W(state: NetworkState, e, x, mu_W) -> NetworkState:
    """LMS step ``W + mu_W e x'``."""
    W = state.W + mu_W * np.outer(e, x)
    return replace(state, W=W)


def update_By(state: NetworkState, y, zeta_y, mode="steady") -> NetworkState:
    """Rank-one inverse-correlation update of ``By``; advances the counter."""
    By = _rank1_inverse_update(state.By, np.asarray(y, dtype=float), zeta_y, state.k, mode)
    return replace(state, By=By, k=state.k + 1)


def update_Be(state: NetworkState, e, zeta_e, mode="steady", k=None) -> NetworkState:
    """Rank-one update of a matrix ``Be``; a no-op for the scalar-identity mode.

    ``k`` defaults to ``state.k``.  ``fit_online`` passes the counter of the
    current sample since ``update_By`` has already advanced it.
    """
    if state.be_scalar:
        return state
    k = state.k if k is None else k
    Be = _rank1_inverse_update(state.Be, np.asarray(e, dtype=float), zeta_e, k, mode)
    return replace(state, Be=Be)


# ---------------------------------------------------------------------------
# Domain encoding for the compiled kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Encoded:
    code: int
    A: np.ndarray
    b: np.ndarray
    signed: np.ndarray
    G: np.ndarray
    n_lam: int


def _encode_domain(domain: DomainSpec) -> _Encoded:
    n = domain.n
    A = np.zeros((0, n))
    b = np.zeros(0)
    signed = np.zeros(n, dtype=np.bool_)
    G = np.zeros((0, n))
    if domain.kind is DomainKind.HPOLYTOPE:
        A = np.ascontiguousarray(domain.hrep.A)
        b = np.ascontiguousarray(domain.hrep.b)
    elif domain.kind is DomainKind.FEATURE:
        signed = domain.fp.signed_mask()
        G = np.ascontiguousarray(domain.fp.group_matrix())
    return _Encoded(_KIND_CODE[domain.kind], A, b, signed, G, domain.n_multipliers)


def _broadcast_lam(value, n_lam, name):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(n_lam, float(arr))
    if arr.shape != (n_lam,):
        raise ValueError(f"{name} needs {n_lam} entries, got shape {arr.shape}")
    return arr.copy()


# ---------------------------------------------------------------------------
# Compiled kernels
# ---------------------------------------------------------------------------


@njit(cache=True)
def _dyn_kernel(y, Wx, By, Be, be, be_scalar, zy, ze, k, code, A, b, signed, G,
                lam, eta_lam, c_y, floor_y, nu_max, eps_t, gsteady, path):
    """Fixed-point loop for one sample; updates ``y`` and ``lam`` in place.

    Returns (nu_used, converged, status).
    """
    n = y.shape[0]
    dy = (zy - zy**k) / (1.0 - zy)
    de = (ze - ze**k) / (1.0 - ze)
    e = np.empty(n)
    y_old = np.empty(n)
    v = np.empty(n)
    record = path.shape[0] > 0
    n_lam = lam.shape[0]
    for nu in range(1, nu_max + 1):
        for i in range(n):
            e[i] = y[i] - Wx[i]
            y_old[i] = y[i]
        By_y = By @ y
        if be_scalar:
            Be_e = be * e
        else:
            Be_e = Be @ e
        if gsteady:
            gy = (1.0 - zy) / zy
            ge = (1.0 - ze) / ze
        else:
            den_y = dy + y @ By_y
            den_e = de + e @ Be_e
            if not (den_y > 0.0 and den_e > 0.0):
                return nu, False, 2
            gy = 1.0 / den_y
            ge = 1.0 / den_e
        eta = max(c_y / nu, floor_y)
        for i in range(n):
            v[i] = y[i] + eta * (gy * By_y[i] - ge * Be_e[i])
        if code == 0:
            for i in range(n):
                y[i] = min(1.0, max(-1.0, v[i]))
        elif code == 1:
            for i in range(n):
                y[i] = min(1.0, max(0.0, v[i]))
        elif code == 2:
            s = 0.0
            for i in range(n):
                a = abs(v[i]) - lam[0]
                y[i] = np.sign(v[i]) * a if a > 0.0 else 0.0
                s += abs(y[i])
            lam[0] = max(0.0, lam[0] + eta_lam[0] * (s - 1.0))
        elif code == 3 or code == 4:
            s = 0.0
            for i in range(n):
                y[i] = max(0.0, v[i] - lam[0])
                s += y[i]
            if code == 3:
                lam[0] = max(0.0, lam[0] + eta_lam[0] * (s - 1.0))
            else:
                lam[0] = lam[0] + eta_lam[0] * (s - 1.0)
        elif code == 5:
            At_lam = A.T @ lam
            for i in range(n):
                y[i] = y[i] + eta * (gy * By_y[i] - ge * Be_e[i] - At_lam[i])
            viol = A @ y - b
            for l in range(n_lam):
                lam[l] = max(0.0, lam[l] + eta_lam[l] * viol[l])
        else:
            for i in range(n):
                alpha = 0.0
                grouped = False
                for l in range(n_lam):
                    if G[l, i] != 0.0:
                        grouped = True
                        alpha += lam[l]
                if grouped:
                    if signed[i]:
                        a = abs(v[i]) - alpha
                        y[i] = np.sign(v[i]) * a if a > 0.0 else 0.0
                    else:
                        y[i] = max(0.0, v[i] - alpha)
                elif signed[i]:
                    y[i] = min(1.0, max(-1.0, v[i]))
                else:
                    y[i] = min(1.0, max(0.0, v[i]))
            for l in range(n_lam):
                s = 0.0
                for i in range(n):
                    if G[l, i] != 0.0:
                        s += abs(y[i])
                lam[l] = max(0.0, lam[l] + eta_lam[l] * (s - 1.0))
        if record:
            for i in range(n):
                path[nu - 1, i] = y[i]
        d2 = 0.0
        y2 = 0.0
        for i in range(n):
            if not np.isfinite(y[i]):
                return nu, False, 1
            d2 += (y[i] - y_old[i]) ** 2
            y2 += y[i] ** 2
        if math.sqrt(d2) / max(math.sqrt(y2), 1e-12) < eps_t:
            return nu, True, 0
    return nu_max, False, 0


@njit(cache=True)
def _rank1_kernel(B, v, zeta, k, exact):
    z = B @ v
    q = v @ z
    n = v.shape[0]
    if q < 0.0:
        return 3
    if exact:
        if zeta - zeta**k <= 0.0:
            return 2
        g = 1.0 / ((zeta - zeta**k) / (1.0 - zeta) + q)
        scale = (1.0 - zeta**k) / (zeta - zeta**k)
    else:
        g = (1.0 - zeta) / zeta
        if g * q >= 1.0:
            return 3
        scale = 1.0 / zeta
    for i in range(n):
        for j in range(n):
            B[i, j] = scale * (B[i, j] - g * z[i] * z[j])
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.5 * (B[i, j] + B[j, i])
            B[i, j] = s
            B[j, i] = s
    return 0


@njit(cache=True)
def _fit_kernel(XT, W, By, Be, be, be_scalar, k0, zy, ze, exact, code, A, b, signed, G,
                lam_init, eta_lam, c_y, floor_y, nu_max, eps_t, gsteady, warm, mu, y0,
                Y, E, NU, CONV, LAM):
    """Whole-stream driver over the rows of ``XT``; mutates W, By, Be and the output arrays.

    Returns (status, sample index, iteration).
    """
    n, m = W.shape
    N = XT.shape[0]
    y = y0.copy()
    lam = lam_init.copy()
    empty_path = np.zeros((0, n))
    for t in range(N):
        k = k0 + t
        x = XT[t]
        Wx = W @ x
        if not warm:
            y[:] = 0.0
        lam[:] = lam_init
        nu, conv, status = _dyn_kernel(y, Wx, By, Be, be, be_scalar, zy, ze, k, code, A, b, signed, G,
                                       lam, eta_lam, c_y, floor_y, nu_max, eps_t, gsteady, empty_path)
        if status != 0:
            return status, t, nu
        for i in range(n):
            E[i, t] = y[i] - Wx[i]
            Y[i, t] = y[i]
        NU[t] = nu
        CONV[t] = conv
        for l in range(lam.shape[0]):
            LAM[t, l] = lam[l]
        for i in range(n):
            for j in range(m):
                W[i, j] += mu[t] * E[i, t] * x[j]
        status = _rank1_kernel(By, y, zy, k, exact)
        if status != 0:
            return status, t, nu
        if not be_scalar:
            status = _rank1_kernel(Be, E[:, t].copy(), ze, k, exact)
            if status != 0:
                return status, t, nu
    return 0, N, 0


# ---------------------------------------------------------------------------
# Python entry points
# ---------------------------------------------------------------------------


def _check_domain(state: NetworkState, domain: DomainSpec):
    if domain.n != state.n:
        raise ValueError(f"domain dimension {domain.n} does not match network output dimension {state.n}")


def _raise_status(status, sample_index, iteration):
    where = f"sample {sample_index}, iteration {iteration}" if sample_index is not None else f"iteration {iteration}"
    if status == _NONFINITE:
        raise DivergenceError(f"non-finite output at {where}", iteration=iteration, sample_index=sample_index)
    if status == _DEGENERATE_GAMMA:
        raise DegenerateInputError(f"gamma denominator is not positive at {where}")
    if status == _LOST_PD:
        raise NumericalDegeneracyError(f"inverse correlation update lost definiteness at {where}")


def run_dynamics(state: NetworkState, x, domain: DomainSpec, fcfg: ForgettingConfig, dcfg: DynamicsConfig,
                 y0=None, record_path=False):
    """Run the neural dynamics for one input sample.

    ``y0`` is the starting output (zeros when omitted).  With ``record_path``
    the iterate after every step is returned as a second value, shape (nu_used, n).
    """
    _check_domain(state, domain)
    x = np.asarray(x, dtype=float)
    if x.shape != (state.m,):
        raise ValueError(f"x must have length {state.m}, got shape {x.shape}")
    enc = _encode_domain(domain)
    y = np.zeros(state.n) if y0 is None else np.array(y0, dtype=float)
    lam = _broadcast_lam(dcfg.lam_init, enc.n_lam, "lam_init")
    eta_lam = _broadcast_lam(dcfg.eta_lam, enc.n_lam, "eta_lam")
    Wx = state.W @ x
    Be = np.zeros((0, 0)) if state.be_scalar else state.Be
    be = state.Be if state.be_scalar else 0.0
    path = np.zeros((int(dcfg.nu_max) if record_path else 0, state.n))
    nu, conv, status = _dyn_kernel(y, Wx, state.By, Be, be, state.be_scalar, fcfg.zeta_y, fcfg.zeta_e,
                                   state.k, enc.code, enc.A, enc.b, enc.signed, enc.G, lam, eta_lam,
                                   float(dcfg.c_y), float(dcfg.floor_y), int(dcfg.nu_max), float(dcfg.eps_t),
                                   dcfg.gamma == "steady", path)
    _raise_status(status, None, nu)
    rec = OutputRecord(y, y - Wx, int(nu), bool(conv), lam if enc.n_lam else None)
    if record_path:
        return rec, path[:nu].copy()
    return rec


def _mu_schedule(mu_W, N, k0):
    if callable(mu_W):
        mu = np.array([float(mu_W(k0 + t)) for t in range(N)])
    else:
        mu = np.full(N, float(mu_W))
    if np.any(~np.isfinite(mu)) or np.any(mu < 0):
        raise ValueError("mu_W must be finite and nonnegative")
    return mu


def fit_online(X, domain: DomainSpec, fcfg: ForgettingConfig, dcfg: DynamicsConfig, mu_W,
               init: NetworkState, mode="steady", y_init=None):
    """Process a stream of inputs (columns of ``X``, shape (m, N)) one sample at a time.

    ``mu_W`` is a constant or a callable of the sample counter k.  Returns the
    final state (``init`` is not modified) and an ``OutputTrace``.
    """
    if mode not in ("steady", "exact"):
        raise ValueError(f"unknown update mode {mode!r}")
    _check_domain(init, domain)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        X = X.reshape(init.m, -1)
    if X.shape[0] != init.m:
        raise ValueError(f"inputs must have {init.m} rows, got {X.shape[0]}")
    n, N = init.n, X.shape[1]
    enc = _encode_domain(domain)
    state = init.copy()
    lam_init = _broadcast_lam(dcfg.lam_init, enc.n_lam, "lam_init")
    eta_lam = _broadcast_lam(dcfg.eta_lam, enc.n_lam, "eta_lam")
    mu = _mu_schedule(mu_W, N, init.k)
    Y = np.zeros((n, N))
    E = np.zeros((n, N))
    NU = np.zeros(N, dtype=np.int64)
    CONV = np.zeros(N, dtype=np.bool_)
    LAM = np.zeros((N, enc.n_lam))
    Be = np.zeros((0, 0)) if state.be_scalar else state.Be
    be = state.Be if state.be_scalar else 0.0
    y0 = np.zeros(n) if y_init is None else np.array(y_init, dtype=float)
    status, t, nu = _fit_kernel(np.ascontiguousarray(X.T), state.W, state.By, Be, be, state.be_scalar, init.k,
                                fcfg.zeta_y, fcfg.zeta_e, mode == "exact", enc.code, enc.A, enc.b,
                                enc.signed, enc.G, lam_init, eta_lam, float(dcfg.c_y), float(dcfg.floor_y),
                                int(dcfg.nu_max), float(dcfg.eps_t), dcfg.gamma == "steady",
                                bool(dcfg.warm_start), mu, y0,
                                Y, E, NU, CONV, LAM)
    _raise_status(status, t, nu)
    state.k = init.k + N
    return state, OutputTrace(Y, E, NU, CONV, LAM)


def fit_online_stepwise(X, domain, fcfg, dcfg, mu_W, init: NetworkState, mode="steady", y_init=None):
    """Uncompiled composition of the per-step functions; same contract as ``fit_online``."""
    X = np.asarray(X, dtype=float)
    state = init.copy()
    n, N = init.n, X.shape[1]
    mu = _mu_schedule(mu_W, N, init.k)
    y_prev = np.zeros(n) if y_init is None else np.array(y_init, dtype=float)
    records = []
    for t in range(N):
        x = X[:, t]
        try:
            rec = run_dynamics(state, x, domain, fcfg, dcfg, y0=y_prev if dcfg.warm_start else None)
        except DivergenceError as err:
            raise DivergenceError(str(err), iteration=err.iteration, sample_index=t) from None
        records.append(rec)
        k = state.k
        state = update_W(state, rec.e, x, mu[t])
        state = update_By(state, rec.y, fcfg.zeta_y, mode)
        state = update_Be(state, rec.e, fcfg.zeta_e, mode, k=k)
        y_prev = rec.y
    return state, records


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------


def save_checkpoint(path, state: NetworkState, fcfg: ForgettingConfig):
    """Write state and forgetting factors as JSON with round-trip float repr."""
    doc = {
        "format": "corinfomax-checkpoint",
        "version": 1,
        "n": state.n,
        "m": state.m,
        "k": state.k,
        "W": state.W.tolist(),
        "By": state.By.tolist(),
        "Be_mode": "scalar_identity" if state.be_scalar else "matrix",
        "Be": state.Be if state.be_scalar else state.Be.tolist(),
        "forgetting": {"zeta_y": fcfg.zeta_y, "zeta_e": fcfg.zeta_e, "eps": fcfg.eps},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_checkpoint(path):
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != "corinfomax-checkpoint":
        raise ValueError("not a checkpoint document")
    Be = float(doc["Be"]) if doc["Be_mode"] == "scalar_identity" else np.array(doc["Be"], dtype=float)
    state = NetworkState(np.array(doc["W"], dtype=float).reshape(doc["n"], doc["m"]),
                         np.array(doc["By"], dtype=float), Be, doc["k"])
    f = doc["forgetting"]
    return state, ForgettingConfig(f["zeta_y"], f["zeta_e"], f["eps"])
