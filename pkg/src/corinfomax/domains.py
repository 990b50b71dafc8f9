"""Source domains: set descriptions, membership, elementwise activations and proxes.

Every domain is a convex polytope in R^n.  Five special cases have closed-form
activations (clipping, soft thresholding, ReLU); general polytopes are given
either in half-space form ``A y <= b`` or through per-coordinate attributes
(signed / nonnegative) plus group l1 constraints.

Indices are 0-based in Python and 1-based in JSON documents.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np


class DomainKind(str, enum.Enum):
    ANTISPARSE = "antisparse"
    NONNEG_ANTISPARSE = "nonneg_antisparse"
    SPARSE = "sparse"
    NONNEG_SPARSE = "nonneg_sparse"
    SIMPLEX = "simplex"
    HPOLYTOPE = "hpolytope"
    FEATURE = "feature"


def _finite_vector(v, name="v"):
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be finite")
    return v


@dataclass(frozen=True)
class HPolytope:
    """Polytope ``{y : A y <= b}``.

    Construction checks that the set is nonempty by probing ``witness``
    (the origin when not given).
    """

    A: np.ndarray
    b: np.ndarray
    witness: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        if A.shape[0] < 1 or A.shape[0] != b.shape[0]:
            raise ValueError(f"A has {A.shape[0]} rows but b has {b.shape[0]} entries")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("A and b must be finite")
        probe = np.zeros(A.shape[1]) if self.witness is None else np.asarray(self.witness, float)
        if probe.shape != (A.shape[1],) or np.any(A @ probe - b > 1e-12):
            raise ValueError("polytope is empty at the probe point; supply a feasible witness")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def f(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class FeaturePolytope:
    """Polytope described by coordinate attributes and group l1 bounds.

    Coordinates in ``signed`` live in [-1, 1], the rest in [0, 1], and for
    every group ``J`` in ``groups`` the l1 norm of ``y[J]`` is at most one.
    """

    n: int
    signed: tuple[int, ...]
    groups: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        signed = tuple(sorted(set(int(i) for i in self.signed)))
        if any(i < 0 or i >= self.n for i in signed):
            raise ValueError("signed index out of range")
        groups = []
        for g in self.groups:
            g = tuple(sorted(set(int(i) for i in g)))
            if not g:
                raise ValueError("sparsity groups must be nonempty")
            if any(i < 0 or i >= self.n for i in g):
                raise ValueError("group index out of range")
            groups.append(g)
        object.__setattr__(self, "signed", signed)
        object.__setattr__(self, "groups", tuple(groups))

    @property
    def nonneg(self) -> tuple[int, ...]:
        s = set(self.signed)
        return tuple(i for i in range(self.n) if i not in s)

    @property
    def ungrouped(self) -> tuple[int, ...]:
        """Indices that appear in no sparsity group."""
        covered = set(itertools.chain.from_iterable(self.groups))
        return tuple(i for i in range(self.n) if i not in covered)

    @property
    def L(self) -> int:
        return len(self.groups)

    def signed_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[list(self.signed)] = True
        return mask

    def group_matrix(self) -> np.ndarray:
        """0/1 matrix of shape (L, n) with row l marking group l."""
        G = np.zeros((self.L, self.n))
        for l, g in enumerate(self.groups):
            G[l, list(g)] = 1.0
        return G


@dataclass(frozen=True)
class DomainSpec:
    kind: DomainKind
    n: int
    hrep: HPolytope | None = None
    fp: FeaturePolytope | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", DomainKind(self.kind))
        if self.n < 1:
            raise ValueError("domain dimension must be positive")
        if self.kind is DomainKind.HPOLYTOPE:
            if self.hrep is None or self.hrep.n != self.n:
                raise ValueError("hpolytope domain needs an HPolytope of matching dimension")
        if self.kind is DomainKind.FEATURE:
            if self.fp is None or self.fp.n != self.n:
                raise ValueError("feature domain needs a FeaturePolytope of matching dimension")

    @classmethod
    def from_hpolytope(cls, hrep: HPolytope) -> DomainSpec:
        return cls(DomainKind.HPOLYTOPE, hrep.n, hrep=hrep)

    @classmethod
    def from_feature(cls, fp: FeaturePolytope) -> DomainSpec:
        return cls(DomainKind.FEATURE, fp.n, fp=fp)

    @property
    def has_interneurons(self) -> bool:
        return self.kind in (
            DomainKind.SPARSE,
            DomainKind.NONNEG_SPARSE,
            DomainKind.SIMPLEX,
            DomainKind.HPOLYTOPE,
        ) or (self.kind is DomainKind.FEATURE and self.fp.L > 0)

    @property
    def n_multipliers(self) -> int:
        if self.kind in (DomainKind.SPARSE, DomainKind.NONNEG_SPARSE, DomainKind.SIMPLEX):
            return 1
        if self.kind is DomainKind.HPOLYTOPE:
            return self.hrep.f
        if self.kind is DomainKind.FEATURE:
            return self.fp.L
        return 0

    def box(self) -> tuple[np.ndarray, np.ndarray]:
        """An axis-aligned box containing the domain."""
        lo = np.full(self.n, -1.0)
        hi = np.ones(self.n)
        if self.kind in (DomainKind.NONNEG_ANTISPARSE, DomainKind.NONNEG_SPARSE, DomainKind.SIMPLEX):
            lo[:] = 0.0
        elif self.kind is DomainKind.FEATURE:
            lo[list(self.fp.nonneg)] = 0.0
        elif self.kind is DomainKind.HPOLYTOPE:
            lo, hi = _hpolytope_bounding_box(self.hrep)
        return lo, hi


def _hpolytope_bounding_box(h: HPolytope):
    from scipy.optimize import linprog

    lo = np.empty(h.n)
    hi = np.empty(h.n)
    for i in range(h.n):
        c = np.zeros(h.n)
        for sign, out in ((1.0, lo), (-1.0, hi)):
            c[i] = sign
            res = linprog(c, A_ub=h.A, b_ub=h.b, bounds=[(None, None)] * h.n, method="highs")
            if res.status != 0:
                raise ValueError("H-polytope is unbounded or infeasible")
            out[i] = sign * res.fun
    return lo, hi


# ---------------------------------------------------------------------------
# Elementwise operators
# ---------------------------------------------------------------------------


def clip_signed(v):
    """Clip each entry to [-1, 1]."""
    v = _finite_vector(v)
    return np.clip(v, -1.0, 1.0)


def clip_nonneg(v):
    """Clip each entry to [0, 1]."""
    v = _finite_vector(v)
    return np.clip(v, 0.0, 1.0)


def soft_threshold(v, lam):
    """Soft thresholding ``sign(v) * max(|v| - lam, 0)``; ``lam`` may be per-entry."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("threshold must be nonnegative")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - lam, 0.0)


def relu(v):
    return np.maximum(np.asarray(v, dtype=float), 0.0)


def prox_feature(v, lam, fp: FeaturePolytope):
    """Prox of ``sum_l lam_l ||q_{J_l}||_1`` restricted to ``q[nonneg] >= 0``.

    Signed coordinate j is soft-thresholded by ``alpha_j = sum of lam_l over the
    groups containing j``; nonnegative coordinates get ``relu(v_j - alpha_j)``.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if lam.shape != (fp.L,):
        raise ValueError(f"expected {fp.L} multipliers, got shape {lam.shape}")
    if np.any(lam < 0):
        raise ValueError("multipliers must be nonnegative")
    v = np.asarray(v, dtype=float)
    alpha = fp.group_matrix().T @ lam if fp.L else np.zeros(fp.n)
    out = soft_threshold(v, alpha)
    nn = list(fp.nonneg)
    out[nn] = np.maximum(v[nn] - alpha[nn], 0.0)
    return out


# ---------------------------------------------------------------------------
# Membership and conversions
# ---------------------------------------------------------------------------


def membership(domain: DomainSpec | FeaturePolytope | HPolytope, y, tol=0.0) -> bool:
    """True when every defining inequality holds within additive slack ``tol``."""
    if isinstance(domain, FeaturePolytope):
        domain = DomainSpec.from_feature(domain)
    elif isinstance(domain, HPolytope):
        domain = DomainSpec.from_hpolytope(domain)
    y = np.asarray(y, dtype=float)
    if y.shape != (domain.n,):
        raise ValueError(f"expected vector of length {domain.n}, got shape {y.shape}")
    return bool(membership_mask(domain, y[:, None], tol)[0])


def membership_mask(domain: DomainSpec, Y, tol=0.0) -> np.ndarray:
    """Column-wise membership for a matrix of shape (n, N)."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or Y.shape[0] != domain.n:
        raise ValueError(f"expected array with {domain.n} rows, got shape {Y.shape}")
    kind = domain.kind
    if kind is DomainKind.ANTISPARSE:
        return np.all(np.abs(Y) <= 1.0 + tol, axis=0)
    if kind is DomainKind.NONNEG_ANTISPARSE:
        return np.all((Y >= -tol) & (Y <= 1.0 + tol), axis=0)
    if kind is DomainKind.SPARSE:
        return np.abs(Y).sum(axis=0) <= 1.0 + tol
    if kind is DomainKind.NONNEG_SPARSE:
        return np.all(Y >= -tol, axis=0) & (Y.sum(axis=0) <= 1.0 + tol)
    if kind is DomainKind.SIMPLEX:
        return np.all(Y >= -tol, axis=0) & (np.abs(Y.sum(axis=0) - 1.0) <= tol)
    if kind is DomainKind.HPOLYTOPE:
        h = domain.hrep
        return np.all(h.A @ Y - h.b[:, None] <= tol, axis=0)
    fp = domain.fp
    s = list(fp.signed)
    nn = list(fp.nonneg)
    ok = np.all(np.abs(Y[s]) <= 1.0 + tol, axis=0)
    ok &= np.all((Y[nn] >= -tol) & (Y[nn] <= 1.0 + tol), axis=0)
    for g in fp.groups:
        ok &= np.abs(Y[list(g)]).sum(axis=0) <= 1.0 + tol
    return ok


def feature_to_hrep(fp: FeaturePolytope) -> HPolytope:
    """Exact half-space form of a feature-based polytope.

    Each group contributes one row per sign pattern over its signed members
    (nonnegative members always carry +1).  Nonnegativity rows follow, then
    box rows for coordinates outside every group; box rows of grouped
    coordinates are implied by the group bound and omitted.
    """
    signed = set(fp.signed)
    rows, rhs = [], []
    for g in fp.groups:
        sg = [j for j in g if j in signed]
        for pattern in itertools.product((1.0, -1.0), repeat=len(sg)):
            row = np.zeros(fp.n)
            row[list(g)] = 1.0
            row[sg] = pattern
            rows.append(row)
            rhs.append(1.0)
    for i in fp.nonneg:
        row = np.zeros(fp.n)
        row[i] = -1.0
        rows.append(row)
        rhs.append(0.0)
    for i in fp.ungrouped:
        for sign in ((1.0, -1.0) if i in signed else (1.0,)):
            row = np.zeros(fp.n)
            row[i] = sign
            rows.append(row)
            rhs.append(1.0)
    return HPolytope(np.array(rows), np.array(rhs))


def domain_to_hrep(domain: DomainSpec) -> HPolytope:
    """Half-space form of any supported domain (the simplex becomes two inequalities)."""
    n = domain.n
    I = np.eye(n)
    kind = domain.kind
    if kind is DomainKind.HPOLYTOPE:
        return domain.hrep
    if kind is DomainKind.FEATURE:
        return feature_to_hrep(domain.fp)
    if kind is DomainKind.ANTISPARSE:
        return feature_to_hrep(FeaturePolytope(n, tuple(range(n))))
    if kind is DomainKind.NONNEG_ANTISPARSE:
        return feature_to_hrep(FeaturePolytope(n, ()))
    if kind is DomainKind.SPARSE:
        return feature_to_hrep(FeaturePolytope(n, tuple(range(n)), (tuple(range(n)),)))
    if kind is DomainKind.NONNEG_SPARSE:
        return feature_to_hrep(FeaturePolytope(n, (), (tuple(range(n)),)))
    A = np.vstack([np.ones((1, n)), -np.ones((1, n)), -I])
    b = np.concatenate([[1.0, -1.0], np.zeros(n)])
    return HPolytope(A, b, witness=np.full(n, 1.0 / n))


# ---------------------------------------------------------------------------
# Euclidean projections (used by the batch oracle and samplers)
# ---------------------------------------------------------------------------


def project_simplex(v, radius=1.0):
    """Projection onto ``{q >= 0, sum q = radius}`` by the sort-and-threshold rule."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - radius
    ind = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def project_l1_ball(v, radius=1.0):
    v = np.asarray(v, dtype=float)
    if np.abs(v).sum() <= radius:
        return v.copy()
    return np.sign(v) * project_simplex(np.abs(v), radius)


def project_nonneg_l1_ball(v, radius=1.0):
    p = np.maximum(np.asarray(v, dtype=float), 0.0)
    if p.sum() <= radius:
        return p
    return project_simplex(v, radius)


def _project_halfspaces_dykstra(v, A, b, iters=2000, tol=1e-12):
    """Dykstra's alternating projections onto an intersection of half-spaces."""
    x = np.asarray(v, dtype=float).copy()
    norms = np.einsum("ij,ij->i", A, A)
    incr = np.zeros((A.shape[0], x.size))
    for _ in range(iters):
        x_prev = x.copy()
        for i in range(A.shape[0]):
            z = x + incr[i]
            viol = A[i] @ z - b[i]
            x = z - (viol / norms[i]) * A[i] if viol > 0 else z
            incr[i] = z - x
        if np.linalg.norm(x - x_prev) <= tol * max(1.0, np.linalg.norm(x)):
            break
    return x


def _project_feature_dykstra(v, fp: FeaturePolytope, iters=2000, tol=1e-12):
    lo = np.full(fp.n, -1.0)
    lo[list(fp.nonneg)] = 0.0
    signed = set(fp.signed)
    sets = [lambda z: np.clip(z, lo, 1.0)]
    for g in fp.groups:
        g = list(g)
        gs = np.array([j in signed for j in g])

        def proj_group(z, g=g, gs=gs):
            out = z.copy()
            sub = z[g].copy()
            # nonnegative members of a group stay >= 0 at the set level
            sub[~gs] = np.maximum(sub[~gs], 0.0)
            out[g] = project_l1_ball(sub)
            return out

        sets.append(proj_group)
    x = np.asarray(v, dtype=float).copy()
    incr = [np.zeros_like(x) for _ in sets]
    for _ in range(iters):
        x_prev = x.copy()
        for i, proj in enumerate(sets):
            z = x + incr[i]
            x = proj(z)
            incr[i] = z - x
        if np.linalg.norm(x - x_prev) <= tol * max(1.0, np.linalg.norm(x)):
            break
    return x


def project(domain: DomainSpec, v):
    """Euclidean projection of ``v`` onto the domain."""
    v = _finite_vector(v)
    kind = domain.kind
    if kind is DomainKind.ANTISPARSE:
        return np.clip(v, -1.0, 1.0)
    if kind is DomainKind.NONNEG_ANTISPARSE:
        return np.clip(v, 0.0, 1.0)
    if kind is DomainKind.SPARSE:
        return project_l1_ball(v)
    if kind is DomainKind.NONNEG_SPARSE:
        return project_nonneg_l1_ball(v)
    if kind is DomainKind.SIMPLEX:
        return project_simplex(v)
    if kind is DomainKind.FEATURE:
        return _project_feature_dykstra(v, domain.fp)
    return _project_halfspaces_dykstra(v, domain.hrep.A, domain.hrep.b)


def project_columns(domain: DomainSpec, Y):
    """Project every column of ``Y``; vectorized for the closed-form domains."""
    Y = np.asarray(Y, dtype=float)
    kind = domain.kind
    if kind is DomainKind.ANTISPARSE:
        return np.clip(Y, -1.0, 1.0)
    if kind is DomainKind.NONNEG_ANTISPARSE:
        return np.clip(Y, 0.0, 1.0)
    if kind in (DomainKind.SIMPLEX, DomainKind.SPARSE, DomainKind.NONNEG_SPARSE):
        if kind is DomainKind.SPARSE:
            mag, sign = np.abs(Y), np.sign(Y)
        elif kind is DomainKind.NONNEG_SPARSE:
            mag, sign = np.maximum(Y, 0.0), 1.0
        else:
            mag, sign = Y, 1.0
        P = _project_simplex_columns(mag)
        if kind is not DomainKind.SIMPLEX:
            inside = mag.sum(axis=0) <= 1.0
            P[:, inside] = mag[:, inside]
        return sign * P
    return np.column_stack([project(domain, Y[:, i]) for i in range(Y.shape[1])])


def _project_simplex_columns(V):
    n = V.shape[0]
    U = -np.sort(-V, axis=0)
    css = np.cumsum(U, axis=0) - 1.0
    ind = np.arange(1, n + 1)[:, None]
    cond = U - css / ind > 0
    rho = n - 1 - np.argmax(cond[::-1], axis=0)
    theta = css[rho, np.arange(V.shape[1])] / (rho + 1)
    return np.maximum(V - theta, 0.0)


# ---------------------------------------------------------------------------
# JSON form
# ---------------------------------------------------------------------------


def domain_from_dict(d: dict, n: int | None = None) -> DomainSpec:
    """Parse the ``"domain"`` object of an experiment config."""
    try:
        kind = DomainKind(d["kind"])
    except (KeyError, ValueError):
        raise ValueError(f"unknown or missing domain kind: {d.get('kind')!r}") from None
    if kind is DomainKind.HPOLYTOPE:
        A = np.asarray(d["A"], dtype=float)
        hrep = HPolytope(A, np.asarray(d["b"], dtype=float), witness=d.get("witness"))
        if n is not None and hrep.n != n:
            raise ValueError(f"hpolytope has dimension {hrep.n}, expected {n}")
        return DomainSpec.from_hpolytope(hrep)
    if kind is DomainKind.FEATURE:
        signed = [int(i) - 1 for i in d.get("signed", [])]
        nonneg = [int(i) - 1 for i in d.get("nonneg", [])]
        dim = len(signed) + len(nonneg)
        if set(signed) & set(nonneg) or sorted(signed + nonneg) != list(range(dim)):
            raise ValueError("signed and nonneg must partition 1..n")
        if n is not None and dim != n:
            raise ValueError(f"feature polytope has dimension {dim}, expected {n}")
        groups = tuple(tuple(int(i) - 1 for i in g) for g in d.get("groups", []))
        return DomainSpec.from_feature(FeaturePolytope(dim, tuple(signed), groups))
    if n is None:
        raise ValueError(f"domain kind {kind.value!r} needs the dimension n")
    return DomainSpec(kind, n)


def domain_to_dict(domain: DomainSpec) -> dict:
    out = {"kind": domain.kind.value}
    if domain.kind is DomainKind.HPOLYTOPE:
        out["A"] = domain.hrep.A.tolist()
        out["b"] = domain.hrep.b.tolist()
    elif domain.kind is DomainKind.FEATURE:
        fp = domain.fp
        out["signed"] = [i + 1 for i in fp.signed]
        out["nonneg"] = [i + 1 for i in fp.nonneg]
        out["groups"] = [[i + 1 for i in g] for g in fp.groups]
    return out


def p_ex() -> FeaturePolytope:
    """Five-dimensional mixed-attribute polytope used in the polytope experiments.

    y1, y2, y4 signed; y3, y5 nonnegative; ||(y1, y2, y5)||_1 <= 1 and
    ||(y2, y3, y4)||_1 <= 1.
    """
    return FeaturePolytope(5, (0, 1, 3), ((0, 1, 4), (1, 2, 3)))
