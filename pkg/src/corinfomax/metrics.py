"""Separation quality: alignment of outputs to sources, SINR, 4-PAM symbol error rate, PSNR."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .exceptions import DegenerateInputError

SINR_CAP_DB = 150.0
SINR_CONVENTION = (
    "per-source 10*log10(|a s|^2 / |y - a s|^2) after |Pearson| assignment and "
    "least-squares scaling a; capped at 150 dB; mean over sources of dB values"
)


@dataclass(frozen=True)
class Alignment:
    """Output row i estimates source ``perm[i]`` scaled by ``scales[i]``."""

    perm: np.ndarray
    scales: np.ndarray

    def apply(self, S):
        """Reconstruct outputs from sources: row i is ``scales[i] * S[perm[i]]``."""
        return self.scales[:, None] * np.asarray(S, dtype=float)[self.perm]


def _check_pair(Y, S):
    Y = np.asarray(Y, dtype=float)
    S = np.asarray(S, dtype=float)
    if Y.shape != S.shape or Y.ndim != 2:
        raise ValueError(f"Y and S must be matrices of the same shape, got {Y.shape} and {S.shape}")
    if Y.shape[1] < 2:
        raise ValueError("need at least two samples")
    return Y, S


def abs_correlation(Y, S, strict=True):
    """|Pearson correlation| between each output row and each source row.

    A zero-variance row raises unless ``strict`` is false, in which case its
    correlations are taken as zero.
    """
    Y, S = _check_pair(Y, S)
    Yc = Y - Y.mean(axis=1, keepdims=True)
    Sc = S - S.mean(axis=1, keepdims=True)
    ny = np.linalg.norm(Yc, axis=1)
    ns = np.linalg.norm(Sc, axis=1)
    bad = (ny == 0)[:, None] | (ns == 0)[None, :]
    if strict and bad.any():
        raise DegenerateInputError("a row has zero variance")
    with np.errstate(divide="ignore", invalid="ignore"):
        C = np.abs((Yc @ Sc.T) / np.outer(ny, ns))
    C[bad] = 0.0
    return C


def resolve_alignment(Y, S, strict=True) -> Alignment:
    """Match outputs to sources by maximal total |correlation|, then fit LS scales."""
    C = abs_correlation(Y, S, strict)
    Y, S = np.asarray(Y, dtype=float), np.asarray(S, dtype=float)
    rows, perm = linear_sum_assignment(-C)
    perm = perm[np.argsort(rows)]
    Sp = S[perm]
    den = np.einsum("ij,ij->i", Sp, Sp)
    if np.any(den == 0):
        raise DegenerateInputError("a source row is identically zero")
    scales = np.einsum("ij,ij->i", Y, Sp) / den
    if strict and np.any(scales == 0):
        raise DegenerateInputError("an output is orthogonal to its matched source")
    return Alignment(perm, scales)


def _sinr_given(Y, S, al: Alignment):
    ref = al.apply(S)
    sig = np.sum(ref**2, axis=1)
    res = np.sum((Y - ref) ** 2, axis=1)
    out = np.full(Y.shape[0], SINR_CAP_DB)
    ok = res > 1e-15 * sig
    with np.errstate(divide="ignore"):
        out[ok] = np.clip(10.0 * np.log10(sig[ok] / res[ok]), -SINR_CAP_DB, SINR_CAP_DB)
    out[sig == 0] = -SINR_CAP_DB
    return out


def sinr_db(Y, S, strict=True):
    """Per-source SINR in dB and their mean (see ``SINR_CONVENTION``).

    With ``strict=False`` zero-variance outputs are scored instead of raising;
    they land at the -150 dB floor.
    """
    Y, S = _check_pair(Y, S)
    per = _sinr_given(Y, S, resolve_alignment(Y, S, strict))
    return per, float(per.mean())


def ser_pam4(Y_aligned, S):
    """Fraction of entries whose nearest 4-PAM symbol differs from S."""
    Y = np.asarray(Y_aligned, dtype=float)
    S = np.asarray(S, dtype=float)
    if Y.shape != S.shape:
        raise ValueError("shape mismatch")
    if Y.size == 0:
        return 0.0
    dec = np.clip(2.0 * np.floor(Y / 2.0) + 1.0, -3.0, 3.0)
    return float(np.mean(dec != S))


def align_to_sources(Y, S):
    """Rows of Y permuted and rescaled to match S (for symbol decisions)."""
    Y, S = _check_pair(Y, S)
    al = resolve_alignment(Y, S)
    out = np.empty_like(Y)
    out[al.perm] = Y / al.scales[:, None]
    return out


def psnr_db(est, ref, peak):
    """``10 log10(peak^2 / MSE)``; ``inf`` when the two agree exactly."""
    est = np.asarray(est, dtype=float)
    ref = np.asarray(ref, dtype=float)
    if est.shape != ref.shape:
        raise ValueError("shape mismatch")
    if not peak > 0:
        raise ValueError("peak must be positive")
    mse = np.mean((est - ref) ** 2)
    if mse == 0:
        return float("inf")
    return float(10.0 * np.log10(peak**2 / mse))
