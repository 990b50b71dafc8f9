"""Synthetic sources, mixing matrices and additive noise.

Every generator takes a ``numpy.random.Generator`` (or anything accepted by
``numpy.random.default_rng``) so that source, mixing and noise streams can be
independent children of one experiment seed (see ``experiment_streams``).
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from scipy.linalg import toeplitz
from scipy.special import stdtr

from .domains import DomainKind, DomainSpec, membership_mask
from .exceptions import DegenerateMixingError, InfeasibleSamplerError

MIXING_DISTS = ("std_normal", "uniform_1", "uniform_2", "laplace")


def experiment_streams(seed: int):
    """Independent generators (sources, mixing, noise) spawned from one seed."""
    ss = np.random.SeedSequence(int(seed))
    return tuple(np.random.default_rng(child) for child in ss.spawn(3))


def _rng(rng):
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def gen_copula_t(n, N, rho, df=4.0, marginal="signed", rng=None):
    """Samples with a t-copula dependence and uniform marginals on the domain box.

    The Gaussian core has Toeplitz correlation with first row ``[1, rho, ..., rho]``.
    Returns an (n, N) array with entries in [-1, 1] (``signed``) or [0, 1] (``nonneg``).
    """
    if marginal not in ("signed", "nonneg"):
        raise ValueError(f"marginal must be 'signed' or 'nonneg', got {marginal!r}")
    if not 0.0 <= rho < 1.0:
        raise ValueError("rho must lie in [0, 1)")
    if not df > 0:
        raise ValueError("df must be positive")
    rng = _rng(rng)
    first = np.full(n, float(rho))
    first[0] = 1.0
    Sigma = toeplitz(first)
    try:
        L = np.linalg.cholesky(Sigma)
    except np.linalg.LinAlgError:
        raise ValueError("Toeplitz correlation matrix is not positive definite") from None
    z = L @ rng.standard_normal((n, N))
    g = rng.chisquare(df, size=N)
    t = z / np.sqrt(g / df)
    u = stdtr(df, t)
    return 2.0 * u - 1.0 if marginal == "signed" else u


def _dirichlet_ones(n, N, rng):
    e = rng.exponential(size=(n, N))
    return e / e.sum(axis=0)


def gen_uniform_polytope(domain: DomainSpec, N, rng=None, batch=None):
    """Uniform samples from the domain, shape (n, N)."""
    rng = _rng(rng)
    n = domain.n
    kind = domain.kind
    if kind is DomainKind.ANTISPARSE:
        return rng.uniform(-1.0, 1.0, size=(n, N))
    if kind is DomainKind.NONNEG_ANTISPARSE:
        return rng.uniform(0.0, 1.0, size=(n, N))
    if kind is DomainKind.SIMPLEX:
        return _dirichlet_ones(n, N, rng)
    if kind in (DomainKind.SPARSE, DomainKind.NONNEG_SPARSE):
        d = _dirichlet_ones(n, N, rng)
        r = rng.uniform(size=N) ** (1.0 / n)
        S = d * r
        if kind is DomainKind.SPARSE:
            S *= rng.choice((-1.0, 1.0), size=(n, N))
        return S
    return _rejection_sample(domain, N, rng, batch)


def _rejection_sample(domain, N, rng, batch=None):
    lo, hi = domain.box()
    batch = batch or max(1024, 2 * N)
    probe = rng.uniform(lo[:, None], hi[:, None], size=(domain.n, batch))
    rate = membership_mask(domain, probe, 0.0).mean()
    if rate < 1e-6:
        raise InfeasibleSamplerError(f"acceptance rate {rate:.2e} is too low for rejection sampling")
    out = []
    have = 0
    while have < N:
        size = int(min(max((N - have) / rate * 1.1, 1024), 1e7))
        cand = rng.uniform(lo[:, None], hi[:, None], size=(domain.n, size))
        keep = cand[:, membership_mask(domain, cand, 0.0)]
        out.append(keep)
        have += keep.shape[1]
    return np.concatenate(out, axis=1)[:, :N]


def gen_pam4(n, N, rng=None):
    """I.i.d. symbols from {-3, -1, 1, 3}; see ``pam4_scaled`` for the network input view."""
    rng = _rng(rng)
    return rng.choice(np.array([-3.0, -1.0, 1.0, 3.0]), size=(n, N))


def pam4_scaled(S):
    return np.asarray(S, dtype=float) / 3.0


def gen_mixing(m, n, dist="std_normal", rng=None, tries=100):
    """Random (m, n) mixing matrix of full column rank."""
    if m < n:
        raise ValueError("need m >= n mixtures")
    rng = _rng(rng)
    draw = {
        "std_normal": lambda: rng.standard_normal((m, n)),
        "uniform_1": lambda: rng.uniform(-1.0, 1.0, (m, n)),
        "uniform_2": lambda: rng.uniform(-2.0, 2.0, (m, n)),
        "laplace": lambda: rng.laplace(0.0, 1.0, (m, n)),
    }
    if dist not in draw:
        raise ValueError(f"unknown mixing distribution {dist!r}; choose from {MIXING_DISTS}")
    for _ in range(tries):
        A = draw[dist]()
        if np.linalg.svd(A, compute_uv=False)[-1] > 1e-6:
            return A
    raise DegenerateMixingError(f"no full-rank {m}x{n} matrix after {tries} draws")


def add_awgn(X, snr_db, rng=None):
    """Add white Gaussian noise at ``snr_db`` relative to the mean-square entry of X.

    ``snr_db = inf`` (or None) disables the noise.
    """
    X = np.asarray(X, dtype=float)
    if snr_db is None or np.isposinf(snr_db):
        return X.copy()
    p = np.mean(X**2)
    if p == 0:
        raise ValueError("cannot set an SNR for an all-zero signal")
    sigma = np.sqrt(p * 10.0 ** (-snr_db / 10.0))
    return X + sigma * _rng(rng).standard_normal(X.shape)


# ---------------------------------------------------------------------------
# Dataset dumps
# ---------------------------------------------------------------------------

_MAGIC = b"CIMX"


def save_matrix_bin(path, M):
    """Little-endian float64 matrix with a 16-byte header (magic, u32 rows, u32 cols, 4 reserved)."""
    M = np.asarray(M, dtype="<f8")
    if M.ndim != 2:
        raise ValueError("expected a matrix")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIII", _MAGIC, M.shape[0], M.shape[1], 0))
        fh.write(np.ascontiguousarray(M).tobytes())


def load_matrix_bin(path):
    data = Path(path).read_bytes()
    magic, rows, cols, _ = struct.unpack("<4sIII", data[:16])
    if magic != _MAGIC:
        raise ValueError("bad magic; not a CIMX matrix file")
    body = np.frombuffer(data, dtype="<f8", offset=16)
    if body.size != rows * cols:
        raise ValueError(f"expected {rows * cols} values, found {body.size}")
    return body.reshape(rows, cols).astype(float)


def save_matrix_csv(path, M):
    np.savetxt(path, np.asarray(M, dtype=float), delimiter=",", fmt="%.17g")


def load_matrix_csv(path):
    return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float))
