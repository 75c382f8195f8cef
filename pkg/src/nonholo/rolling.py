"""Rolling-ball-type reduced systems on se(3) x S^2.

The reduced Lagrangian is fixed to the physical quadratic form

    l(Omega, Y, Gamma) = Omega . I Omega / 2 + m |Y|^2 / 2 - U(Gamma),

so dl/dOmega = I Omega, dl/dY = m Y, dl/dGamma = -dU/dGamma exactly.  The
velocity constraint couples the center-of-mass velocity to the angular
velocity through a Gamma-dependent linear map:

    deterministic   Y = alpha(Gamma) Omega
    type I          Y = alpha(Gamma) Omega + N,     dN = f dt + sigma o dW
    type II         Y = alpha~(Gamma, Nu) Omega,    dNu = f dt + sigma o dW

Eliminating Y yields dynamics for (Omega, Gamma) driven through the SPD
effective mass matrix I + m alpha^T alpha.  Directional derivatives of the
alpha closures are taken by central finite differences (step 1e-6), so users
supply only the map itself.

State layouts: type I x = (Omega, Gamma, N) with dim 9; type II
x = (Omega, Gamma, Nu) with dim 6 + p for p noise parameters.  Field
evaluation is written for a single state; batches are handled row by row
(the per-row arithmetic is identical, so batch results match path-by-path
integration bit for bit).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from typing import Callable, Optional

import numpy as np

from .algebra import InertiaTensor, cross, dot, hat
from .sde import StratonovichField, Trajectory


class EffectiveMassSingular(RuntimeError):
    """I + m alpha^T alpha could not be inverted (non-SPD input data)."""


FD_STEP = 1e-6


def constant_alpha(radius: float) -> Callable:
    """alpha(Gamma) = r Id: body velocity locked to r Omega."""
    mat = float(radius) * np.eye(3)

    def alpha(gamma):
        return mat

    return alpha


def skew_alpha(radius: float) -> Callable:
    """alpha(Gamma) = r hat(Gamma): velocity r Gamma x Omega (contact-normal form)."""
    r = float(radius)

    def alpha(gamma):
        return r * hat(gamma)

    return alpha


@dataclass(frozen=True)
class RollingParams:
    """Inertia, mass, constraint map and potential of a rolling-type system.

    ``alpha`` maps Gamma (3,) to a 3x3 matrix; ``alpha_tilde`` maps
    (Gamma, Nu) to a 3x3 matrix for the type II constraint.  The potential
    closures take Gamma (3,) and return a scalar / gradient vector.
    """

    inertia: InertiaTensor
    mass: float
    alpha: Optional[Callable] = None
    alpha_tilde: Optional[Callable] = None
    potential_value: Callable = dataclass_field(default_factory=lambda: (lambda gamma: 0.0))
    potential_grad: Callable = dataclass_field(
        default_factory=lambda: (lambda gamma: np.zeros(3))
    )

    def __post_init__(self):
        if self.mass <= 0.0 or not np.isfinite(self.mass):
            raise ValueError("mass must be positive")

    def energy(self, omega, y, gamma):
        omega = np.asarray(omega, dtype=float)
        y = np.asarray(y, dtype=float)
        u = self.potential_value(np.asarray(gamma, dtype=float))
        return (0.5 * dot(self.inertia.apply(omega), omega)
                + 0.5 * self.mass * dot(y, y) + u)


def _solve_eff(params, al, rhs):
    eff = params.inertia.matrix + params.mass * (al.T @ al)
    try:
        return np.linalg.solve(eff, rhs)
    except np.linalg.LinAlgError as err:
        raise EffectiveMassSingular("effective mass matrix is singular") from err


def _alpha_directional(alpha, gamma, direction, step=FD_STEP):
    """Central-difference directional derivative D alpha(Gamma)[direction]."""
    return (alpha(gamma + step * direction) - alpha(gamma - step * direction)) / (2.0 * step)


def _alpha_dnu(alpha_tilde, gamma, nu, j, step=FD_STEP):
    """Central difference of alpha~ in the j-th noise parameter."""
    e = np.zeros(len(nu))
    e[j] = step
    return (alpha_tilde(gamma, nu + e) - alpha_tilde(gamma, nu - e)) / (2.0 * step)


def _rowwise(fn, x):
    """Evaluate a single-state function over a possibly batched state array."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return fn(x)
    flat = x.reshape(-1, x.shape[-1])
    out = np.empty_like(flat)
    for i in range(flat.shape[0]):
        out[i] = fn(flat[i])
    return out.reshape(x.shape)


# Deterministic reduced system ------------------------------------------------

def det_rhs(params: RollingParams, omega, gamma):
    """(dOmega/dt, dGamma/dt) with Y = alpha(Gamma) Omega eliminated."""
    omega = np.asarray(omega, dtype=float).reshape(3)
    gamma = np.asarray(gamma, dtype=float).reshape(3)
    al = params.alpha(gamma)
    y = al @ omega
    dgamma = -cross(omega, gamma)
    dal = _alpha_directional(params.alpha, gamma, dgamma)
    rhs = (-cross(omega, params.inertia.apply(omega))
           + cross(gamma, params.potential_grad(gamma))
           - params.mass * al.T @ (dal @ omega + cross(omega, y)))
    return _solve_eff(params, al, rhs), dgamma


def det_field(params: RollingParams) -> StratonovichField:
    def one(x):
        domega, dgamma = det_rhs(params, x[0:3], x[3:6])
        return np.concatenate([domega, dgamma])

    def drift(x):
        return _rowwise(one, x)

    def diffusion(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    return StratonovichField(dim=6, drift=drift, diffusion=diffusion,
                             deterministic=True, tag="rolling_det")


# Stochastic fields -----------------------------------------------------------

def type1_field(params: RollingParams, noise_f, noise_sigma) -> StratonovichField:
    """Affine constraint Y = alpha(Gamma) Omega + N over the state (Omega, Gamma, N).

    ``noise_f`` and ``noise_sigma`` are closures (omega, y, gamma, n) -> (3,)
    driving dN = f dt + sigma o dW with a single Wiener channel.
    """

    def drift_one(x):
        omega, gamma, n = x[0:3], x[3:6], x[6:9]
        al = params.alpha(gamma)
        y = al @ omega + n
        dgamma = -cross(omega, gamma)
        dal = _alpha_directional(params.alpha, gamma, dgamma)
        f = noise_f(omega, y, gamma, n)
        rhs = (-cross(omega, params.inertia.apply(omega))
               + cross(gamma, params.potential_grad(gamma))
               - params.mass * al.T @ (dal @ omega + cross(omega, y) + f))
        return np.concatenate([_solve_eff(params, al, rhs), dgamma, f])

    def diffusion_one(x):
        omega, gamma, n = x[0:3], x[3:6], x[6:9]
        al = params.alpha(gamma)
        y = al @ omega + n
        sig = noise_sigma(omega, y, gamma, n)
        domega = _solve_eff(params, al, -params.mass * al.T @ sig)
        return np.concatenate([domega, np.zeros(3), sig])

    return StratonovichField(
        dim=9,
        drift=lambda x: _rowwise(drift_one, x),
        diffusion=lambda x: _rowwise(diffusion_one, x),
        tag="rolling_type1",
    )


def type2_field(params: RollingParams, noise_f, noise_sigma, n_params: int = 1) -> StratonovichField:
    """Ideal constraint Y = alpha~(Gamma, Nu) Omega over the state (Omega, Gamma, Nu).

    ``noise_f``/``noise_sigma`` are closures (omega, y, gamma, nu) -> (p,).
    Energy is conserved pathwise in continuous time; the discrete drift is
    O(dt) per unit time under the Heun scheme.
    """
    p = int(n_params)

    def _noise_push(gamma, nu, omega, weights):
        """sum_j (d alpha~/d nu_j) Omega * weights_j."""
        acc = np.zeros(3)
        for j in range(p):
            acc = acc + (_alpha_dnu(params.alpha_tilde, gamma, nu, j) @ omega) * weights[j]
        return acc

    def drift_one(x):
        omega, gamma, nu = x[0:3], x[3:6], x[6:6 + p]
        al = params.alpha_tilde(gamma, nu)
        y = al @ omega
        dgamma = -cross(omega, gamma)
        dal = _alpha_directional(lambda g: params.alpha_tilde(g, nu), gamma, dgamma)
        f = np.atleast_1d(noise_f(omega, y, gamma, nu))
        rhs = (-cross(omega, params.inertia.apply(omega))
               + cross(gamma, params.potential_grad(gamma))
               - params.mass * al.T @ (dal @ omega + cross(omega, y)
                                       + _noise_push(gamma, nu, omega, f)))
        return np.concatenate([_solve_eff(params, al, rhs), dgamma, f])

    def diffusion_one(x):
        omega, gamma, nu = x[0:3], x[3:6], x[6:6 + p]
        al = params.alpha_tilde(gamma, nu)
        y = al @ omega
        sig = np.atleast_1d(noise_sigma(omega, y, gamma, nu))
        domega = _solve_eff(
            params, al, -params.mass * al.T @ _noise_push(gamma, nu, omega, sig)
        )
        return np.concatenate([domega, np.zeros(3), sig])

    return StratonovichField(
        dim=6 + p,
        drift=lambda x: _rowwise(drift_one, x),
        diffusion=lambda x: _rowwise(diffusion_one, x),
        tag="rolling_type2",
    )


# States, energy, and the energy-drift identity --------------------------------

def _unit_gamma(gamma):
    gamma = np.asarray(gamma, dtype=float).reshape(3)
    if abs(float(gamma @ gamma) - 1.0) > 1e-9:
        raise ValueError("|Gamma| must be 1 at construction")
    return gamma


def state_type1(params: RollingParams, omega, gamma, n):
    omega = np.asarray(omega, dtype=float).reshape(3)
    n = np.asarray(n, dtype=float).reshape(3)
    return np.concatenate([omega, _unit_gamma(gamma), n])


def state_type2(params: RollingParams, omega, gamma, nu):
    omega = np.asarray(omega, dtype=float).reshape(3)
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    return np.concatenate([omega, _unit_gamma(gamma), nu])


def energy(params: RollingParams, omega, y, gamma):
    return params.energy(omega, y, gamma)


def energy_drift_increment(params: RollingParams, omega, y, n, dy, dt):
    """Type I pathwise energy production (m dY + Omega x m Y dt) . N."""
    return dot(params.mass * np.asarray(dy, dtype=float)
               + cross(omega, params.mass * np.asarray(y, dtype=float)) * dt,
               np.asarray(n, dtype=float))


def reconstruct_y_type1(params: RollingParams, states):
    """Y = alpha(Gamma) Omega + N along recorded type I states."""
    states = np.asarray(states, dtype=float)
    flat = states.reshape(-1, states.shape[-1])
    out = np.empty((flat.shape[0], 3))
    for i, row in enumerate(flat):
        out[i] = params.alpha(row[3:6]) @ row[0:3] + row[6:9]
    return out.reshape(states.shape[:-1] + (3,))


def reconstruct_y_type2(params: RollingParams, states, n_params: int = 1):
    """Y = alpha~(Gamma, Nu) Omega along recorded type II states."""
    states = np.asarray(states, dtype=float)
    flat = states.reshape(-1, states.shape[-1])
    out = np.empty((flat.shape[0], 3))
    for i, row in enumerate(flat):
        out[i] = params.alpha_tilde(row[3:6], row[6:6 + n_params]) @ row[0:3]
    return out.reshape(states.shape[:-1] + (3,))


def type1_energy_series(params: RollingParams, traj: Trajectory):
    """Energy along a type I trajectory (Y reconstructed from the constraint)."""
    y = reconstruct_y_type1(params, traj.states)
    omega = traj.states[:, 0:3]
    u = np.array([params.potential_value(g) for g in traj.states[:, 3:6]])
    return (0.5 * dot(params.inertia.apply(omega), omega)
            + 0.5 * params.mass * dot(y, y) + u)


def type2_energy_series(params: RollingParams, traj: Trajectory, n_params: int = 1):
    y = reconstruct_y_type2(params, traj.states, n_params)
    omega = traj.states[:, 0:3]
    u = np.array([params.potential_value(g) for g in traj.states[:, 3:6]])
    return (0.5 * dot(params.inertia.apply(omega), omega)
            + 0.5 * params.mass * dot(y, y) + u)


def type1_energy_drift_series(params: RollingParams, traj: Trajectory):
    """Cumulative path integral of the type I energy-drift identity.

    Midpoint (Stratonovich-consistent) evaluation on consecutive recorded
    states; accurate when the trajectory is recorded every step.
    """
    y = reconstruct_y_type1(params, traj.states)
    omega = traj.states[:, 0:3]
    n = traj.states[:, 6:9]
    dt = float(traj.times[1] - traj.times[0])
    dy = y[1:] - y[:-1]
    omega_m = 0.5 * (omega[1:] + omega[:-1])
    y_m = 0.5 * (y[1:] + y[:-1])
    n_m = 0.5 * (n[1:] + n[:-1])
    inc = energy_drift_increment(params, omega_m, y_m, n_m, dy, dt)
    return np.concatenate([[0.0], np.cumsum(inc)])
