"""Built-in invariant suites run by ``cimx check``.

Each check is a small, seeded function that raises ``AssertionError`` on
failure.  ``run_suite`` executes a suite, reports one line per check and
returns whether all of them passed.
"""

from __future__ import annotations

import sys
from collections.abc import Callable

import numpy as np

from . import datagen, domains, dynamics, ldmi, metrics
from .domains import DomainKind, DomainSpec

SUITES = ("ldmi", "dynamics", "domains", "datagen", "metrics")


def online_objective(y, x, W, By, Be, zeta_y, zeta_e, k):
    """Online LD-MI objective after a rank-one step from the stored inverses.

    ``R = a B^-1 + c v v'`` with ``a = zeta (1 - zeta^(k-1)) / (1 - zeta^k)``
    and ``c = (1 - zeta) / (1 - zeta^k)``; the y-gradient of
    ``1/2 log det R_y - 1/2 log det R_e`` is the network's update direction.
    """
    e = y - W @ x

    def term(B, v, zeta):
        a = zeta * (1 - zeta ** (k - 1)) / (1 - zeta**k)
        c = (1 - zeta) / (1 - zeta**k)
        B = B * np.eye(len(v)) if np.ndim(B) == 0 else B
        return 0.5 * np.linalg.slogdet(a * np.linalg.inv(B) + c * np.outer(v, v))[1]

    return term(By, y, zeta_y) - term(Be, e, zeta_e)


def _random_pd(rng, n, cond=10.0):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (Q * np.geomspace(1.0, cond, n)) @ Q.T


# -- ldmi -------------------------------------------------------------------


def check_ldmi_dual_form():
    rng = np.random.default_rng(11)
    for _ in range(20):
        X = rng.standard_normal((4, 50))
        Y = rng.standard_normal((3, 4)) @ X + 0.3 * rng.standard_normal((3, 50))
        st = ldmi.sample_stats(X, Y)
        a, b = ldmi.ld_mutual_info(st, 1e-3), ldmi.ld_mutual_info_xform(st, 1e-3)
        assert abs(a - b) <= 1e-8 * max(1.0, abs(a)), f"dual forms differ: {a} vs {b}"


def check_ldmi_mmse():
    rng = np.random.default_rng(12)
    for _ in range(20):
        X = rng.standard_normal((4, 50))
        Y = rng.standard_normal((3, 4)) @ X + 0.3 * rng.standard_normal((3, 50))
        st = ldmi.sample_stats(X, Y)
        W_hat = np.linalg.solve(st.R_x, st.R_xy).T
        resid = Y - W_hat @ X
        err = np.max(np.abs(resid @ resid.T / X.shape[1] - ldmi.error_corr(st, 0.0)))
        assert err <= 1e-10, f"MMSE identity off by {err:.2e}"


def check_ldmi_weighted_corr():
    rng = np.random.default_rng(13)
    V = rng.standard_normal((3, 40))
    R = ldmi.weighted_corr(V, 0.9)
    w = 0.9 ** np.arange(39, -1, -1)
    ref = sum(w[i] * np.outer(V[:, i], V[:, i]) for i in range(40)) / w.sum()
    assert np.allclose(R, ref, rtol=1e-12, atol=1e-14)


# -- dynamics ---------------------------------------------------------------


def check_dynamics_gradient_fd():
    rng = np.random.default_rng(21)
    h = 1e-6
    for _ in range(50):
        n = int(rng.integers(1, 5))
        m = n + int(rng.integers(0, 3))
        zy, ze = rng.uniform(0.9, 0.995, 2)
        k = int(rng.integers(5, 200))
        st = dynamics.NetworkState(rng.standard_normal((n, m)), _random_pd(rng, n), _random_pd(rng, n), k)
        x, y = rng.standard_normal(m), rng.uniform(-1, 1, n)
        e = y - st.W @ x
        g = dynamics.grad_J(st, y, e, dynamics.compute_gamma_y(st.By, y, zy, k),
                            dynamics.compute_gamma_e(st.Be, e, ze, k))
        fd = np.empty(n)
        for i in range(n):
            d = np.zeros(n)
            d[i] = h
            fd[i] = (online_objective(y + d, x, st.W, st.By, st.Be, zy, ze, k)
                     - online_objective(y - d, x, st.W, st.By, st.Be, zy, ze, k)) / (2 * h)
        rel = np.linalg.norm(g - fd) / max(np.linalg.norm(fd), 1e-12)
        assert rel < 1e-5, f"gradient mismatch {rel:.2e} at n={n}"


def by_exact_oracle(V, zeta, eps, k0):
    """Closed-form inverse tracked by exact-mode ``update_By`` after streaming the columns of V.

    Starting from ``B_y = I/eps`` at counter ``k0``, after j samples the matrix is
    the inverse of ``(1-zeta)/(1-zeta^k) sum_i zeta^(j-i) v_i v_i' + eps zeta^j (1-zeta^(k-j))/(1-zeta^k) I``
    with ``k = k0 + j - 1``.
    """
    n, j = V.shape
    k = k0 + j - 1
    w = zeta ** np.arange(j - 1, -1, -1, dtype=float)
    R = (1 - zeta) / (1 - zeta**k) * (V * w) @ V.T
    R += eps * zeta**j * (1 - zeta ** (k - j)) / (1 - zeta**k) * np.eye(n)
    return np.linalg.inv(R)


def check_dynamics_by_oracle():
    rng = np.random.default_rng(22)
    n, zeta, eps, k0 = 5, 0.99, 1e-3, 10
    st = dynamics.NetworkState.initial(n, n, by=1.0 / eps, be=1.0 / eps, k=k0)
    V = rng.standard_normal((n, 200))
    worst = 0.0
    for j in range(200):
        st = dynamics.update_By(st, V[:, j], zeta, mode="exact")
        ref = by_exact_oracle(V[:, : j + 1], zeta, eps, k0)
        worst = max(worst, np.linalg.norm(st.By - ref) / np.linalg.norm(ref))
    assert worst < 1e-8, f"exact B_y recursion off by {worst:.2e}"


def check_dynamics_two_layer():
    rng = np.random.default_rng(23)
    for _ in range(20):
        n, m, eps = 3, 5, 1e-3
        st = dynamics.NetworkState(rng.standard_normal((n, m)), _random_pd(rng, n), 1.0 / eps, 50)
        x, y = rng.standard_normal(m), rng.uniform(-1, 1, n)
        e = y - st.W @ x
        gy, ge = rng.uniform(0.001, 0.1, 2)
        My = gy * st.By - (ge / eps) * np.eye(n)
        g = dynamics.grad_J(st, y, e, gy, ge)
        ref = My @ y + (ge / eps) * st.W @ x
        assert np.allclose(g, ref, rtol=0, atol=1e-12 * max(1.0, np.abs(ref).max()))


def check_dynamics_feasible_outputs():
    rng = np.random.default_rng(24)
    fcfg = dynamics.ForgettingConfig(0.99, 0.99, 1e-3)
    for kind in (DomainKind.ANTISPARSE, DomainKind.NONNEG_ANTISPARSE, DomainKind.SIMPLEX):
        dom = DomainSpec(kind, 3)
        st = dynamics.NetworkState.initial(3, 6, by=5.0, be=1000.0, k=2750)
        st.W = rng.standard_normal((3, 6))
        for _ in range(10):
            rec = dynamics.run_dynamics(st, rng.standard_normal(6), dom, fcfg,
                                        dynamics.DynamicsConfig(gamma="steady", floor_y=1e-3, eta_lam=0.05))
            if kind is DomainKind.SIMPLEX:
                assert np.all(rec.y >= -1e-12)
            else:
                assert domains.membership(dom, rec.y, 1e-12), f"{kind.value} output left its domain"


# -- domains ----------------------------------------------------------------


def check_domains_pex_hrep():
    fp = domains.p_ex()
    h = domains.feature_to_hrep(fp)
    assert h.A.shape[0] == 10, f"expected 10 half-spaces, got {h.A.shape[0]}"
    rng = np.random.default_rng(31)
    Y = rng.uniform(-1.2, 1.2, (5, 20000))
    a = domains.membership_mask(DomainSpec.from_feature(fp), Y)
    b = np.all(h.A @ Y <= h.b[:, None], axis=0)
    assert np.array_equal(a, b), f"{np.sum(a != b)} membership disagreements"


def check_domains_soft_threshold():
    rng = np.random.default_rng(32)
    grid = np.linspace(-4, 4, 80001)
    for _ in range(20):
        v, lam = rng.uniform(-3, 3), rng.uniform(0, 2)
        z = grid[np.argmin(0.5 * (grid - v) ** 2 + lam * np.abs(grid))]
        assert abs(domains.soft_threshold(np.array([v]), lam)[0] - z) < 2e-4


def check_domains_projections():
    rng = np.random.default_rng(33)
    for kind in (DomainKind.SPARSE, DomainKind.NONNEG_SPARSE, DomainKind.SIMPLEX, DomainKind.ANTISPARSE):
        dom = DomainSpec(kind, 4)
        cand = datagen.gen_uniform_polytope(dom, 2000, rng)
        for _ in range(10):
            v = rng.uniform(-2, 2, 4)
            p = domains.project(dom, v)
            assert domains.membership(dom, p, 1e-9)
            assert np.linalg.norm(v - p) <= np.min(np.linalg.norm(cand - v[:, None], axis=0)) + 1e-9


# -- datagen ----------------------------------------------------------------


def check_datagen_samplers_feasible():
    rng = np.random.default_rng(41)
    doms = [DomainSpec(k, 4) for k in (DomainKind.ANTISPARSE, DomainKind.NONNEG_ANTISPARSE, DomainKind.SPARSE,
                                       DomainKind.NONNEG_SPARSE, DomainKind.SIMPLEX)]
    doms.append(DomainSpec.from_feature(domains.p_ex()))
    for dom in doms:
        S = datagen.gen_uniform_polytope(dom, 2000, rng)
        assert domains.membership_mask(dom, S, 1e-12).all(), f"{dom.kind.value} sample left its domain"


def check_datagen_snr():
    rng = np.random.default_rng(42)
    X = rng.standard_normal((5, 200000))
    Xn = datagen.add_awgn(X, 20.0, rng)
    snr = 10 * np.log10(np.mean(X**2) / np.mean((Xn - X) ** 2))
    assert abs(snr - 20.0) < 0.05, f"measured SNR {snr:.3f} dB"


def check_datagen_copula_dependence():
    rng = np.random.default_rng(43)
    c = []
    for rho in (0.0, 0.4, 0.8):
        S = datagen.gen_copula_t(3, 20000, rho, 4, "signed", rng)
        c.append(np.corrcoef(S)[0, 1])
    assert c[0] < c[1] < c[2], f"dependence not increasing in rho: {c}"


# -- metrics ----------------------------------------------------------------


def check_metrics_alignment_invariance():
    rng = np.random.default_rng(51)
    S = rng.uniform(-1, 1, (4, 1000))
    Y = S + 0.05 * rng.standard_normal(S.shape)
    P = np.eye(4)[rng.permutation(4)]
    D = np.diag(rng.choice([-1, 1], 4) * rng.uniform(0.5, 2, 4))
    a = metrics.sinr_db(Y, S)[0]
    b = metrics.sinr_db(P @ D @ Y, S)[0]
    assert np.allclose(np.sort(a), np.sort(b), atol=1e-9)


def check_metrics_known_sinr():
    rng = np.random.default_rng(52)
    s = rng.standard_normal(5000)
    w = rng.standard_normal(5000)
    w -= (w @ s) / (s @ s) * s
    w *= np.sqrt(1e-3 * (s @ s) / (w @ w))
    _, mean = metrics.sinr_db((s + w)[None, :], s[None, :])
    assert abs(mean - 30.0) < 1e-9, f"SINR {mean}"


def check_metrics_ser():
    rng = np.random.default_rng(53)
    S = datagen.gen_pam4(2, 50000, rng)
    assert metrics.ser_pam4(S + 0.1 * rng.standard_normal(S.shape), S) == 0.0


CHECKS: dict[str, list[Callable[[], None]]] = {
    "ldmi": [check_ldmi_dual_form, check_ldmi_mmse, check_ldmi_weighted_corr],
    "dynamics": [check_dynamics_gradient_fd, check_dynamics_by_oracle, check_dynamics_two_layer,
                 check_dynamics_feasible_outputs],
    "domains": [check_domains_pex_hrep, check_domains_soft_threshold, check_domains_projections],
    "datagen": [check_datagen_samplers_feasible, check_datagen_snr, check_datagen_copula_dependence],
    "metrics": [check_metrics_alignment_invariance, check_metrics_known_sinr, check_metrics_ser],
}


def run_suite(suite: str, out=None) -> tuple[bool, str | None]:
    """Run one suite (or ``"all"``); returns ``(all_passed, first_failure_message)``."""
    out = out or sys.stdout
    names = SUITES if suite == "all" else (suite,)
    first = None
    for name in names:
        for fn in CHECKS[name]:
            label = f"{name}.{fn.__name__.removeprefix('check_' + name + '_')}"
            try:
                fn()
            except AssertionError as err:
                print(f"FAIL {label}: {err}", file=out)
                first = first or f"{label}: {err}"
                continue
            print(f"PASS {label}", file=out)
    return first is None, first
