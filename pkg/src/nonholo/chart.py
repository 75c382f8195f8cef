"""Generic stochastic Lagrange-d'Alembert systems in local coordinates.

Works for quadratic Lagrangians L = q_dot^T M(q) q_dot / 2 - V(q) in a chart
q = (r, s) where the constraint reads

    type I    s_dot^a + A^a_alpha(r, s) u^alpha = N^a      (affine level N)
    type II   s_dot^a + A~^a_alpha(r, s, N) u^alpha = 0    (noise in the coefficients)

with u = r_dot and dN = F dt + Sigma o dW.  Substituting the constraint into
L gives the constrained Lagrangian; expanding its u-gradient with the chain
rule turns the equations of motion into an explicit linear solve for du per
evaluation.  Coordinate derivatives of M, V and the constraint coefficients
are taken by central finite differences with step h = FD_BASE (1 + |x|).

State layout: x = (r, s, u, N), so dim = 2(n - m) ... wait; see ``type1_field``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from typing import Callable, Optional

import numpy as np

from .sde import StratonovichField


class HessianSingular(RuntimeError):
    """The u-Hessian of the constrained Lagrangian is not invertible."""


class ChartDomain(ValueError):
    """Evaluation point left the declared chart domain."""


FD_BASE = 1e-6


@dataclass(frozen=True)
class ChartSystem:
    """Chart-level data of a constrained quadratic-Lagrangian system.

    ``n`` coordinates split as q = (r, s) with len(s) = m.  ``mass_matrix``
    maps q (n,) to an SPD (n, n) matrix and ``potential`` to a scalar.
    ``coeffs(r, s)`` returns the (m, n-m) type I constraint matrix A;
    ``coeffs_tilde(r, s, nvec)`` the type II matrix A~.  ``noise_drift`` and
    ``noise_diffusion`` are closures (r, s, u, w, nvec) -> (noise_dim,)
    evaluated at the constrained velocity w.  ``domain`` may reject states
    outside the chart.
    """

    n: int
    m: int
    mass_matrix: Callable
    potential: Callable
    coeffs: Optional[Callable] = None
    coeffs_tilde: Optional[Callable] = None
    noise_drift: Optional[Callable] = None
    noise_diffusion: Optional[Callable] = None
    noise_dim: Optional[int] = None
    domain: Optional[Callable] = None
    fd_step: float = FD_BASE

    @property
    def nm(self) -> int:
        return self.n - self.m

    def n_noise(self, type2: bool) -> int:
        if self.noise_dim is not None:
            return self.noise_dim
        return self.m

    def check_domain(self, r, s):
        if self.domain is not None and not self.domain(r, s):
            raise ChartDomain("state (r=%s, s=%s) outside chart domain" % (r, s))


def _steps(x, base):
    return base * (1.0 + np.abs(x))


def _a_matrix(sys: ChartSystem, r, s, nvec=None):
    if nvec is None:
        return np.asarray(sys.coeffs(r, s), dtype=float).reshape(sys.m, sys.nm)
    return np.asarray(sys.coeffs_tilde(r, s, nvec), dtype=float).reshape(sys.m, sys.nm)


def b_coefficients(sys: ChartSystem, r, s, nvec=None):
    """Curvature-like coefficients B^b_{alpha beta} of the constraint.

        B^b_ab = dA^b_a/dr^b - dA^b_b/dr^a + A^c_a dA^b_b/ds^c - A^c_b dA^b_a/ds^c

    (antisymmetrized in the lower index pair).  ``nvec`` switches to the
    type II coefficients A~(r, s, N).  Partials by central differences.
    """
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    nm, m = sys.nm, sys.m
    a0 = _a_matrix(sys, r, s, nvec)
    da_dr = np.empty((nm, m, nm))
    hr = _steps(r, sys.fd_step)
    for beta in range(nm):
        e = np.zeros(nm)
        e[beta] = hr[beta]
        da_dr[beta] = (_a_matrix(sys, r + e, s, nvec) - _a_matrix(sys, r - e, s, nvec)) / (2 * hr[beta])
    da_ds = np.empty((m, m, nm))
    hs = _steps(s, sys.fd_step)
    for a in range(m):
        e = np.zeros(m)
        e[a] = hs[a]
        da_ds[a] = (_a_matrix(sys, r, s + e, nvec) - _a_matrix(sys, r, s - e, nvec)) / (2 * hs[a])
    b = np.empty((m, nm, nm))
    for al in range(nm):
        for be in range(nm):
            term = da_dr[be][:, al] - da_dr[al][:, be]
            for c in range(m):
                term = term + a0[c, al] * da_ds[c][:, be] - a0[c, be] * da_ds[c][:, al]
            b[:, al, be] = term
    return b


def _da_ds(sys: ChartSystem, r, s, nvec=None):
    m, nm = sys.m, sys.nm
    da = np.empty((m, m, nm))
    hs = _steps(np.asarray(s, dtype=float), sys.fd_step)
    for a in range(m):
        e = np.zeros(m)
        e[a] = hs[a]
        da[a] = (_a_matrix(sys, r, s + e, nvec) - _a_matrix(sys, r, s - e, nvec)) / (2 * hs[a])
    return da


def _mass_blocks(sys: ChartSystem, r, s):
    q = np.concatenate([r, s])
    mm = np.asarray(sys.mass_matrix(q), dtype=float).reshape(sys.n, sys.n)
    nm = sys.nm
    return mm[:nm, :nm], mm[:nm, nm:], mm[nm:, nm:]


def _grad_u(sys: ChartSystem, r, s, u, nvec, type2: bool):
    """Analytic u-gradient of the constrained Lagrangian at (r, s, u, N)."""
    a = _a_matrix(sys, r, s, nvec if type2 else None)
    w = -a @ u if type2 else nvec - a @ u
    mrr, mrs, mss = _mass_blocks(sys, r, s)
    return (mrr - a.T @ mrs.T) @ u + (mrs - a.T @ mss) @ w


def _lc_value(sys: ChartSystem, r, s, u, nvec, type2: bool):
    a = _a_matrix(sys, r, s, nvec if type2 else None)
    w = -a @ u if type2 else nvec - a @ u
    q = np.concatenate([r, s])
    v = np.concatenate([u, w])
    mm = np.asarray(sys.mass_matrix(q), dtype=float).reshape(sys.n, sys.n)
    return 0.5 * float(v @ mm @ v) - float(sys.potential(q))


def _assemble(sys: ChartSystem, r, s, u, nvec, type2: bool):
    """Common core: returns (H, rhs_drift_without_noise, noise_matrix, w).

    The du equation is  H du = rhs dt - noise_matrix (F dt + Sigma o dW),
    so drift(u) = H^-1 (rhs - noise_matrix F) and
    diffusion(u) = -H^-1 noise_matrix Sigma.
    """
    sys.check_domain(r, s)
    nm, m = sys.nm, sys.m
    a = _a_matrix(sys, r, s, nvec if type2 else None)
    w = -a @ u if type2 else nvec - a @ u
    mrr, mrs, mss = _mass_blocks(sys, r, s)
    hess = mrr - a.T @ mrs.T - mrs @ a + a.T @ mss @ a
    cond = np.linalg.cond(hess)
    if not np.isfinite(cond) or cond > 1e12:
        raise HessianSingular(
            "u-Hessian condition %.3g at r=%s, s=%s" % (cond, r, s)
        )
    pw = mrs.T @ u + mss @ w

    # coordinate gradients of the constrained Lagrangian by central FD
    lc_r = np.empty(nm)
    hr = _steps(r, sys.fd_step)
    for i in range(nm):
        e = np.zeros(nm)
        e[i] = hr[i]
        lc_r[i] = (_lc_value(sys, r + e, s, u, nvec, type2)
                   - _lc_value(sys, r - e, s, u, nvec, type2)) / (2 * hr[i])
    lc_s = np.empty(m)
    hs = _steps(s, sys.fd_step)
    for i in range(m):
        e = np.zeros(m)
        e[i] = hs[i]
        lc_s[i] = (_lc_value(sys, r, s + e, u, nvec, type2)
                   - _lc_value(sys, r, s - e, u, nvec, type2)) / (2 * hs[i])

    # mixed second derivatives of LC via FD of the analytic u-gradient
    c_r = np.empty((nm, nm))
    for i in range(nm):
        e = np.zeros(nm)
        e[i] = hr[i]
        c_r[:, i] = (_grad_u(sys, r + e, s, u, nvec, type2)
                     - _grad_u(sys, r - e, s, u, nvec, type2)) / (2 * hr[i])
    c_s = np.empty((nm, m))
    for i in range(m):
        e = np.zeros(m)
        e[i] = hs[i]
        c_s[:, i] = (_grad_u(sys, r, s + e, u, nvec, type2)
                     - _grad_u(sys, r, s - e, u, nvec, type2)) / (2 * hs[i])

    bco = b_coefficients(sys, r, s, nvec if type2 else None)
    extra = np.einsum("b,bae,e->a", pw, bco, u)
    if type2:
        p = len(nvec)
        da_dn = np.empty((p, m, nm))
        hn = _steps(nvec, sys.fd_step)
        for j in range(p):
            e = np.zeros(p)
            e[j] = hn[j]
            da_dn[j] = (_a_matrix(sys, r, s, nvec + e) - _a_matrix(sys, r, s, nvec - e)) / (2 * hn[j])
        c_n = np.empty((nm, p))
        for j in range(p):
            e = np.zeros(p)
            e[j] = hn[j]
            c_n[:, j] = (_grad_u(sys, r, s, u, nvec + e, True)
                         - _grad_u(sys, r, s, u, nvec - e, True)) / (2 * hn[j])
        noise_mat = c_n + np.einsum("b,jba->aj", pw, da_dn)
    else:
        da_ds = _da_ds(sys, r, s, None)
        extra = extra + np.einsum("b,cba,c->a", pw, da_ds, nvec)
        noise_mat = mrs - a.T @ mss  # d2 LC / du dN

    rhs = lc_r - a.T @ lc_s - extra - c_r @ u - c_s @ w
    return hess, rhs, noise_mat, w


def type1_field(sys: ChartSystem) -> StratonovichField:
    """Affine stochastic constraint in chart coordinates, state (r, s, u, N)."""
    nm, m = sys.nm, sys.m
    dim = nm + m + nm + m

    def split(x):
        return (x[0:nm], x[nm:nm + m], x[nm + m:nm + m + nm], x[nm + m + nm:])

    def drift(x):
        r, s, u, nvec = split(np.asarray(x, dtype=float))
        hess, rhs, noise_mat, w = _assemble(sys, r, s, u, nvec, type2=False)
        f = np.asarray(sys.noise_drift(r, s, u, w, nvec), dtype=float)
        du = np.linalg.solve(hess, rhs - noise_mat @ f)
        return np.concatenate([u, w, du, f])

    def diffusion(x):
        r, s, u, nvec = split(np.asarray(x, dtype=float))
        hess, rhs, noise_mat, w = _assemble(sys, r, s, u, nvec, type2=False)
        sig = np.asarray(sys.noise_diffusion(r, s, u, w, nvec), dtype=float)
        du = -np.linalg.solve(hess, noise_mat @ sig)
        return np.concatenate([np.zeros(nm), np.zeros(m), du, sig])

    return StratonovichField(dim=dim, drift=drift, diffusion=diffusion, tag="chart_type1")


def type2_field(sys: ChartSystem) -> StratonovichField:
    """Ideal stochastic constraint in chart coordinates, state (r, s, u, N)."""
    nm, m = sys.nm, sys.m
    p = sys.n_noise(type2=True)
    dim = nm + m + nm + p

    def split(x):
        return (x[0:nm], x[nm:nm + m], x[nm + m:nm + m + nm], x[nm + m + nm:])

    def drift(x):
        r, s, u, nvec = split(np.asarray(x, dtype=float))
        hess, rhs, noise_mat, w = _assemble(sys, r, s, u, nvec, type2=True)
        f = np.asarray(sys.noise_drift(r, s, u, w, nvec), dtype=float)
        du = np.linalg.solve(hess, rhs - noise_mat @ f)
        return np.concatenate([u, w, du, f])

    def diffusion(x):
        r, s, u, nvec = split(np.asarray(x, dtype=float))
        hess, rhs, noise_mat, w = _assemble(sys, r, s, u, nvec, type2=True)
        sig = np.asarray(sys.noise_diffusion(r, s, u, w, nvec), dtype=float)
        du = -np.linalg.solve(hess, noise_mat @ sig)
        return np.concatenate([np.zeros(nm), np.zeros(m), du, sig])

    return StratonovichField(dim=dim, drift=drift, diffusion=diffusion, tag="chart_type2")


def chart_energy(sys: ChartSystem, x, type2: bool = False):
    """Energy <dL/dv, v> - L = v^T M v / 2 + V at a chart state (r, s, u, N)."""
    nm, m = sys.nm, sys.m
    x = np.asarray(x, dtype=float)
    r, s, u, nvec = x[0:nm], x[nm:nm + m], x[nm + m:nm + m + nm], x[nm + m + nm:]
    a = _a_matrix(sys, r, s, nvec if type2 else None)
    w = -a @ u if type2 else nvec - a @ u
    q = np.concatenate([r, s])
    v = np.concatenate([u, w])
    mm = np.asarray(sys.mass_matrix(q), dtype=float).reshape(sys.n, sys.n)
    return 0.5 * float(v @ mm @ v) + float(sys.potential(q))


def _ds_dt(sys: ChartSystem, x, type2: bool):
    nm, m = sys.nm, sys.m
    r, s, u, nvec = x[0:nm], x[nm:nm + m], x[nm + m:nm + m + nm], x[nm + m + nm:]
    a = _a_matrix(sys, r, s, nvec if type2 else None)
    return -a @ u if type2 else nvec - a @ u


def constraint_residual(sys: ChartSystem, states, type2: bool = False):
    """Algebraic residual omega . v - N (type I) or omega~ . v (type II).

    In the chart normal form the constrained velocity w is eliminated, so
    this residual is zero by construction up to arithmetic roundoff; it is a
    consistency check, not an accuracy measure (see
    ``discrete_constraint_residual`` for the latter).
    """
    nm, m = sys.nm, sys.m
    states = np.atleast_2d(np.asarray(states, dtype=float))
    out = np.empty((states.shape[0], m))
    for i, x in enumerate(states):
        r, s, u, nvec = x[0:nm], x[nm:nm + m], x[nm + m:nm + m + nm], x[nm + m + nm:]
        a = _a_matrix(sys, r, s, nvec if type2 else None)
        w = _ds_dt(sys, x, type2)
        out[i] = (w + a @ u) if type2 else (w + a @ u - nvec)
    return out.squeeze()


def discrete_constraint_residual(sys: ChartSystem, traj, type2: bool = False):
    """Per-step residual (s_{k+1} - s_k) - dt * midpoint(ds/dt) along a path.

    Measures how well the recorded s-coordinates track the constraint-implied
    velocity; O(dt^2) per step for the Heun scheme on smooth paths.
    """
    nm, m = sys.nm, sys.m
    states = traj.states
    dt = float(traj.times[1] - traj.times[0])
    w = np.array([_ds_dt(sys, x, type2) for x in states])
    ds = states[1:, nm:nm + m] - states[:-1, nm:nm + m]
    return ds - 0.5 * dt * (w[1:] + w[:-1])


# Built-in demo system --------------------------------------------------------

def free_particle_system(noise_drift=None, noise_diffusion=None) -> ChartSystem:
    """Nonholonomic free particle: L = |q_dot|^2 / 2, constraint z_dot = y x_dot.

    Chart: r = (x, y), s = (z,), A = (-y, 0).  The classical benchmark with a
    one-dimensional constraint level N.
    """
    zero = lambda r, s, u, w, n: np.zeros(1)
    return ChartSystem(
        n=3,
        m=1,
        mass_matrix=lambda q: np.eye(3),
        potential=lambda q: 0.0,
        coeffs=lambda r, s: np.array([[-r[1], 0.0]]),
        coeffs_tilde=lambda r, s, n: np.array([[-r[1] - n[0], 0.0]]),
        noise_drift=noise_drift or zero,
        noise_diffusion=noise_diffusion or zero,
    )
