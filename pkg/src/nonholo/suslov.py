"""Suslov rigid body with a fixed point under deterministic and stochastic
angular-velocity constraints.

The deterministic system constrains the body angular velocity to a body-fixed
plane, a . Omega = 0, and supports a potential U(Gamma) driven by the advected
vertical Gamma.  Two stochastic deformations are provided:

* type I (affine):  a . Omega = N with dN = f dt + sigma o dW.  The scalar
  process N shifts the constraint level; energy is generally not conserved.
* type II (ideal):  N . Omega = 0 with a vector process N replacing the fixed
  axis; the constraint stays linear and homogeneous and the energy
  E = Omega . I Omega / 2 + U(Gamma) is conserved pathwise.

State layouts (flat vectors, batched on leading axes):

    type I   x = (Omega, Gamma, N)        dim 7
    type II  x = (Omega, Gamma, Nvec)     dim 9

All drift/diffusion callables accept batches, shape (..., dim).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from typing import Callable, Optional, Union

import numpy as np

from .algebra import InertiaTensor, cross, dot
from .sde import StratonovichField, Trajectory


class ConstraintViolated(ValueError):
    """State does not satisfy the active nonholonomic constraint."""


class NoiseSingular(RuntimeError):
    """Type II constraint direction |N| fell below the admissible floor."""


E3 = np.array([0.0, 0.0, 1.0])


# Potentials -----------------------------------------------------------------

@dataclass(frozen=True)
class ZeroPotential:
    kind = "zero"

    def value(self, gamma, inertia=None):
        return np.zeros(np.asarray(gamma).shape[:-1])

    def grad(self, gamma, inertia=None):
        return np.zeros_like(np.asarray(gamma, dtype=float))


@dataclass(frozen=True)
class LinearPotential:
    """U(Gamma) = chi . Gamma (uniform force along the body vector chi)."""

    chi: np.ndarray
    kind = "linear"

    def __post_init__(self):
        object.__setattr__(self, "chi", np.asarray(self.chi, dtype=float).reshape(3))

    def value(self, gamma, inertia=None):
        return dot(np.asarray(gamma, dtype=float), self.chi)

    def grad(self, gamma, inertia=None):
        gamma = np.asarray(gamma, dtype=float)
        return np.broadcast_to(self.chi, gamma.shape)  # read-only view


@dataclass(frozen=True)
class QuadraticCTPotential:
    """U(Gamma) = (epsilon/2) I Gamma . Gamma, the Clebsch-Tisserand family."""

    epsilon: float
    kind = "quadratic_ct"

    def value(self, gamma, inertia=None):
        gamma = np.asarray(gamma, dtype=float)
        return 0.5 * self.epsilon * dot(inertia.apply(gamma), gamma)

    def grad(self, gamma, inertia=None):
        return self.epsilon * inertia.apply(np.asarray(gamma, dtype=float))


Potential = Union[ZeroPotential, LinearPotential, QuadraticCTPotential]


@dataclass(frozen=True)
class SuslovParams:
    """Inertia, constraint axis and potential of the generalized Suslov body."""

    inertia: InertiaTensor
    axis: np.ndarray = dataclass_field(default_factory=lambda: E3.copy())
    potential: Potential = dataclass_field(default_factory=ZeroPotential)

    def __post_init__(self):
        a = np.asarray(self.axis, dtype=float).reshape(3)
        if not np.all(np.isfinite(a)) or float(a @ a) == 0.0:
            raise ValueError("constraint axis must be a finite nonzero vector")
        object.__setattr__(self, "axis", a)
        object.__setattr__(self, "_inv_axis", self.inertia.solve(a))
        object.__setattr__(self, "_axis_quad", float(a @ self.inertia.solve(a)))

    @property
    def inv_axis(self):
        """I^-1 a, cached."""
        return self._inv_axis

    @property
    def axis_quad(self):
        """a . I^-1 a, cached (positive since I is SPD)."""
        return self._axis_quad

    def potential_value(self, gamma):
        return self.potential.value(gamma, self.inertia)

    def potential_grad(self, gamma):
        return self.potential.grad(gamma, self.inertia)

    def ct_matrix(self):
        """A = epsilon det(I) I^-1 entering the Clebsch-Tisserand integral."""
        if not isinstance(self.potential, QuadraticCTPotential):
            raise ValueError("ct_matrix requires the quadratic_ct potential")
        return self.potential.epsilon * self.inertia.det * self.inertia.inverse

    def energy(self, omega, gamma):
        omega = np.asarray(omega, dtype=float)
        return 0.5 * dot(self.inertia.apply(omega), omega) + self.potential_value(gamma)


# Noise models ---------------------------------------------------------------

def _as_state_fn(value, dim):
    """Wrap a constant into a state-function; pass callables through."""
    if callable(value):
        return value
    arr = np.asarray(value, dtype=float)

    if dim == 0:
        const = float(arr)

        def scalar_fn(omega, gamma, n):
            return np.full(np.asarray(omega).shape[:-1], const)

        return scalar_fn

    arr = arr.reshape(dim)

    def vector_fn(omega, gamma, n):
        shape = np.asarray(omega).shape[:-1] + (dim,)
        return np.broadcast_to(arr, shape).copy()

    return vector_fn


@dataclass(frozen=True)
class ConstantNoise:
    """f = sigma = 0: the constraint process N keeps its initial value.

    With type I and N = c this is the inhomogeneous Suslov body; with
    type II and N = a it freezes the classical constraint axis.
    """

    def build(self, params):
        def zero_scalar(omega, gamma, n):
            return np.zeros(np.asarray(omega).shape[:-1])

        return zero_scalar, zero_scalar

    def build_vector(self, params):
        def zero_vec(omega, gamma, n):
            return np.zeros_like(np.asarray(n, dtype=float))

        return zero_vec, zero_vec


@dataclass(frozen=True)
class OrnsteinUhlenbeck:
    """dN = -theta N dt + sigma0 o dW, the default benchmark forcing."""

    theta: float = 1.0
    sigma0: float = 0.5

    def build(self, params):
        theta, sigma0 = self.theta, self.sigma0

        def f(omega, gamma, n):
            return -theta * np.asarray(n, dtype=float)

        def sigma(omega, gamma, n):
            n = np.asarray(n, dtype=float)
            return np.full_like(n, sigma0)

        return f, sigma

    build_vector = build


@dataclass(frozen=True)
class GenericNoise:
    """Arbitrary closures f(omega, gamma, n), sigma(omega, gamma, n)."""

    f: Callable
    sigma: Callable

    def build(self, params):
        return self.f, self.sigma

    build_vector = build


@dataclass(frozen=True)
class CrossNoise:
    """Type II noise dN = (g x c) dt + (eta x c) o dW for a designated c.

    ``kind`` selects c: 'chi' (the fixed potential vector), 'gamma' (the
    advected vertical), 'momentum' (the angular momentum I Omega).  Both
    emitted functions are orthogonal to c pointwise, so d(N . c) carries no
    dN contribution.

    For the moving targets c = Gamma and c = I Omega, ``corotate=True`` adds
    the body-frame transport term N x Omega to the drift.  This is the dN one
    obtains by differentiating N = R^-1 n for a spatially constructed noise n
    and is required for N . Gamma to stay zero along the flow (the advected
    c rotates; a drift orthogonal to c alone cannot track it).
    """

    kind: str
    g: Union[np.ndarray, Callable]
    eta: Union[np.ndarray, Callable]
    chi: Optional[np.ndarray] = None
    corotate: bool = False

    def __post_init__(self):
        if self.kind not in ("chi", "gamma", "momentum"):
            raise ValueError("cross noise kind must be chi|gamma|momentum")
        if self.kind == "chi" and self.chi is None:
            raise ValueError("kind='chi' requires the chi vector")

    def _target(self, params):
        if self.kind == "chi":
            chi = np.asarray(self.chi, dtype=float).reshape(3)
            return lambda omega, gamma, n: np.broadcast_to(chi, np.asarray(omega).shape).copy()
        if self.kind == "gamma":
            return lambda omega, gamma, n: gamma
        return lambda omega, gamma, n: params.inertia.apply(omega)

    def build_vector(self, params):
        g_fn = _as_state_fn(self.g, 3)
        eta_fn = _as_state_fn(self.eta, 3)
        target = self._target(params)
        corotate = self.corotate and self.kind != "chi"

        def f(omega, gamma, n):
            c = target(omega, gamma, n)
            out = cross(g_fn(omega, gamma, n), c)
            if corotate:
                out = out + cross(n, omega)
            return out

        def sigma(omega, gamma, n):
            return cross(eta_fn(omega, gamma, n), target(omega, gamma, n))

        return f, sigma


def cross_noise(kind, g, eta, chi=None, corotate=False) -> CrossNoise:
    return CrossNoise(kind=kind, g=g, eta=eta, chi=chi, corotate=corotate)


# State constructors ---------------------------------------------------------

def _check_gamma(gamma):
    gamma = np.asarray(gamma, dtype=float).reshape(3)
    if abs(float(gamma @ gamma) - 1.0) > 1e-9:
        raise ValueError("|Gamma| must be 1 at construction, got |Gamma|^2=%.12g"
                         % float(gamma @ gamma))
    return gamma


def state_type1(params: SuslovParams, omega, gamma, n: Optional[float] = None):
    """Validated flat type I state (Omega, Gamma, N), with N = a . Omega."""
    omega = np.asarray(omega, dtype=float).reshape(3)
    gamma = _check_gamma(gamma)
    level = float(params.axis @ omega)
    if n is None:
        n = level
    elif abs(level - float(n)) > 1e-12 * max(1.0, abs(level)):
        raise ConstraintViolated(
            "a . Omega = %.12g does not match N = %.12g" % (level, float(n))
        )
    return np.concatenate([omega, gamma, [float(n)]])


def noise_floor(n0) -> float:
    """Admissible lower bound on |N| for type II: 1e-8 (1 + |N(0)|)."""
    n0 = np.asarray(n0, dtype=float)
    return 1e-8 * (1.0 + float(np.sqrt((n0 * n0).sum())))


def state_type2(params: SuslovParams, omega, gamma, n_vec):
    """Validated flat type II state (Omega, Gamma, N vector)."""
    omega = np.asarray(omega, dtype=float).reshape(3)
    gamma = _check_gamma(gamma)
    n_vec = np.asarray(n_vec, dtype=float).reshape(3)
    if abs(float(n_vec @ omega)) > 1e-9 * max(1.0, float(np.abs(omega).max())):
        raise ConstraintViolated("N . Omega must vanish at construction")
    if float(np.sqrt(n_vec @ n_vec)) < noise_floor(n_vec):
        raise NoiseSingular("|N(0)| below the admissible floor")
    return np.concatenate([omega, gamma, n_vec])


# Deterministic system -------------------------------------------------------

def lambda_det(params: SuslovParams, omega, gamma):
    """Constraint multiplier of the deterministic generalized Suslov system."""
    omega = np.asarray(omega, dtype=float)
    c = cross(omega, params.inertia.apply(omega))
    gu = params.potential_grad(gamma)
    num = dot(c + cross(gu, np.asarray(gamma, dtype=float)), params.inv_axis)
    return num / params.axis_quad


def det_rhs(params: SuslovParams, omega, gamma):
    """Right-hand side (dOmega/dt, dGamma/dt) on the constraint a . Omega = 0."""
    omega = np.asarray(omega, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    residual = dot(np.broadcast_to(params.axis, omega.shape), omega)
    if np.any(np.abs(residual) > 1e-9):
        raise ConstraintViolated("a . Omega = %g exceeds 1e-9" % float(np.max(np.abs(residual))))
    c = cross(omega, params.inertia.apply(omega))
    gu = params.potential_grad(gamma)
    lam = dot(c + cross(gu, gamma), np.broadcast_to(params.inv_axis, omega.shape)) / params.axis_quad
    domega = params.inertia.solve(-c + cross(gamma, gu) + lam[..., None] * params.axis)
    dgamma = cross(gamma, omega)
    return domega, dgamma


def det_field(params: SuslovParams) -> StratonovichField:
    """Deterministic Suslov flow as a 6-dimensional zero-diffusion field."""

    def drift(x):
        domega, dgamma = det_rhs(params, x[..., 0:3], x[..., 3:6])
        return np.concatenate([domega, dgamma], axis=-1)

    def diffusion(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    return StratonovichField(dim=6, drift=drift, diffusion=diffusion,
                             deterministic=True, tag="suslov_det")


def state_det(params: SuslovParams, omega, gamma):
    omega = np.asarray(omega, dtype=float).reshape(3)
    if abs(float(params.axis @ omega)) > 1e-9:
        raise ConstraintViolated("a . Omega must vanish for the deterministic system")
    return np.concatenate([omega, _check_gamma(gamma)])


# Stochastic fields ----------------------------------------------------------

def type1_field(params: SuslovParams, noise) -> StratonovichField:
    """Affine stochastic constraint a . Omega = N over the state (Omega, Gamma, N).

    The multiplier substitution makes d(a . Omega - N) = 0 an identity of the
    field, so the Heun scheme preserves the constraint to roundoff.
    """
    f_fn, sigma_fn = noise.build(params)
    a = params.axis
    ia = params.inv_axis
    aia = params.axis_quad

    def drift(x):
        omega, gamma, n = x[..., 0:3], x[..., 3:6], x[..., 6]
        c = cross(omega, params.inertia.apply(omega))
        gu = params.potential_grad(gamma)
        torque = cross(gamma, gu)
        lam = dot(c + cross(gu, gamma), np.broadcast_to(ia, omega.shape)) / aia
        f = f_fn(omega, gamma, n)
        force = -c + torque + (lam + f / aia)[..., None] * a
        domega = params.inertia.solve(force)
        dgamma = cross(gamma, omega)
        return np.concatenate([domega, dgamma, f[..., None]], axis=-1)

    def diffusion(x):
        omega, gamma, n = x[..., 0:3], x[..., 3:6], x[..., 6]
        sig = sigma_fn(omega, gamma, n)
        domega = (sig / aia)[..., None] * np.broadcast_to(ia, omega.shape)
        out = np.zeros_like(np.asarray(x, dtype=float))
        out[..., 0:3] = domega
        out[..., 6] = sig
        return out

    return StratonovichField(dim=7, drift=drift, diffusion=diffusion, tag="suslov_type1")


def type2_field(params: SuslovParams, noise, eps_n: float = 1e-8) -> StratonovichField:
    """Ideal stochastic constraint N . Omega = 0 over the state (Omega, Gamma, N).

    Raises NoiseSingular during evaluation when |N| drops below ``eps_n``
    (the multiplier divides by N . I^-1 N; the degeneration is not
    regularized).  Use ``noise_floor(n0)`` for the documented floor.
    """
    f_fn, sigma_fn = noise.build_vector(params)

    def _split(x):
        return x[..., 0:3], x[..., 3:6], x[..., 6:9]

    def _guard(nvec):
        norm2 = dot(nvec, nvec)
        if np.any(norm2 < eps_n * eps_n):
            raise NoiseSingular("|N| = %.3g below floor %.3g"
                                % (float(np.sqrt(norm2.min())), eps_n))
        return norm2

    def drift(x):
        omega, gamma, nvec = _split(x)
        _guard(nvec)
        c = cross(omega, params.inertia.apply(omega))
        gu = params.potential_grad(gamma)
        inv_n = params.inertia.solve(nvec)
        quad = dot(nvec, inv_n)
        f = f_fn(omega, gamma, nvec)
        lam = (dot(c + cross(gu, gamma), inv_n) - dot(omega, f)) / quad
        domega = params.inertia.solve(-c + cross(gamma, gu) + lam[..., None] * nvec)
        dgamma = cross(gamma, omega)
        return np.concatenate([domega, dgamma, f], axis=-1)

    def diffusion(x):
        omega, gamma, nvec = _split(x)
        _guard(nvec)
        inv_n = params.inertia.solve(nvec)
        quad = dot(nvec, inv_n)
        sig = sigma_fn(omega, gamma, nvec)
        domega = -inv_n * (dot(omega, sig) / quad)[..., None]
        out = np.zeros_like(np.asarray(x, dtype=float))
        out[..., 0:3] = domega
        out[..., 6:9] = sig
        return out

    return StratonovichField(dim=9, drift=drift, diffusion=diffusion, tag="suslov_type2")


# Invariants -----------------------------------------------------------------

def invariants_report(params: SuslovParams, state, kind: str = "type1") -> dict:
    """Evaluate all applicable integrals at a state (or batch of states).

    Keys: energy, gamma_norm, constraint, lagrange, plus kharlamova for the
    linear potential and clebsch_tisserand for the quadratic one.
    ``constraint`` is a . Omega - N (type I), N . Omega (type II) or
    a . Omega (deterministic 6-dim states).
    """
    state = np.asarray(state, dtype=float)
    omega, gamma = state[..., 0:3], state[..., 3:6]
    report = {
        "energy": params.energy(omega, gamma),
        "gamma_norm": dot(gamma, gamma),
        "lagrange": dot(params.inertia.apply(omega), gamma),
    }
    if kind == "type1":
        report["constraint"] = dot(np.broadcast_to(params.axis, omega.shape), omega) - state[..., 6]
    elif kind == "type2":
        report["constraint"] = dot(state[..., 6:9], omega)
    elif kind == "det":
        report["constraint"] = dot(np.broadcast_to(params.axis, omega.shape), omega)
    else:
        raise ValueError("kind must be type1|type2|det")
    if isinstance(params.potential, LinearPotential):
        report["kharlamova"] = dot(params.inertia.apply(omega), params.potential.chi)
    if isinstance(params.potential, QuadraticCTPotential):
        m_omega = params.inertia.apply(omega)
        from .algebra import mat_apply

        a_gamma = mat_apply(params.ct_matrix(), gamma)
        report["clebsch_tisserand"] = 0.5 * dot(m_omega, m_omega) - 0.5 * dot(a_gamma, gamma)
    # momentum-squared quantity, an integral when U = 0 and a is an eigenvector
    m_omega = params.inertia.apply(omega)
    report["momentum_sq"] = 0.5 * dot(m_omega, m_omega)
    return report


def make_functional(params: SuslovParams, name: str, kind: str = "type1"):
    """Named invariant as a batched state functional (for ensemble statistics)."""

    def fn(states):
        return invariants_report(params, states, kind)[name]

    fn.__name__ = name
    return fn


# Closed forms and oracles ---------------------------------------------------

def analytic_isotropic(omega0, axis, n_values):
    """Isotropic type I closed form Omega(t) = Omega0 + a/|a|^2 (N(t) - N(0)).

    ``n_values`` is the sampled N(t) series; returns the matching Omega
    samples, shape (len(n_values), 3).
    """
    omega0 = np.asarray(omega0, dtype=float).reshape(3)
    axis = np.asarray(axis, dtype=float).reshape(3)
    n_values = np.atleast_1d(np.asarray(n_values, dtype=float))
    direction = axis / float(axis @ axis)
    return omega0 + np.multiply.outer(n_values - n_values[0], direction)


def kharlamova_rate(params: SuslovParams, chi, omega, n):
    """Type I rate d(I Omega . chi)/dt = chi1 (I2-I3) Omega2 N + chi2 (I3-I1) Omega1 N.

    Valid for a = e3 being an inertia eigenvector, diagonal inertia and the
    linear potential with chi . a = 0.
    """
    if not params.inertia.is_diagonal():
        raise ValueError("kharlamova_rate requires a diagonal inertia")
    if not np.allclose(params.axis, E3):
        raise ValueError("kharlamova_rate requires the axis e3")
    i1, i2, i3 = params.inertia.principal
    chi = np.asarray(chi, dtype=float).reshape(3)
    omega = np.asarray(omega, dtype=float)
    n = np.asarray(n, dtype=float)
    return chi[0] * (i2 - i3) * omega[..., 1] * n + chi[1] * (i3 - i1) * omega[..., 0] * n


def kharlamova_rate_vanishes(inertia: InertiaTensor, chi) -> bool:
    """True when the Kharlamova rate expression is identically zero.

    The rate vanishes for chi = e1 iff I2 = I3, for chi = e2 iff I1 = I3,
    and always for an isotropic inertia (this mapping follows the displayed
    differential; see the tests exercising the condition table).
    """
    i1, i2, i3 = inertia.principal
    chi = np.asarray(chi, dtype=float).reshape(3)
    return bool(np.isclose(chi[0] * (i2 - i3), 0.0) and np.isclose(chi[1] * (i3 - i1), 0.0))


def type1_energy_drift_series(params: SuslovParams, traj: Trajectory):
    """Path-integrated type I energy production, dE = N lambda dt.

    Uses midpoint (Stratonovich-consistent) evaluation on consecutive
    recorded states; returns the cumulative series aligned with traj.times.
    """
    states = traj.states
    omega_m = 0.5 * (states[:-1, 0:3] + states[1:, 0:3])
    gamma_m = 0.5 * (states[:-1, 3:6] + states[1:, 3:6])
    n_m = 0.5 * (states[:-1, 6] + states[1:, 6])
    dn = states[1:, 6] - states[:-1, 6]
    dt = float(traj.times[1] - traj.times[0])
    c = cross(omega_m, params.inertia.apply(omega_m))
    gu = params.potential_grad(gamma_m)
    det_part = dot(c + cross(gu, gamma_m), np.broadcast_to(params.inv_axis, omega_m.shape))
    lam_dt = (det_part * dt + dn) / params.axis_quad
    increments = n_m * lam_dt
    return np.concatenate([[0.0], np.cumsum(increments)])


# Reduced 3-dimensional type I system (U = 0, a = e3, diagonal inertia) ------

def reduced_type1_field(params: SuslovParams, noise) -> StratonovichField:
    """Type I dynamics reduced to (Omega1, Omega2, N).

    Requires U = 0, axis e3 and a diagonal inertia so the Gamma variable
    decouples; then Omega3 = N and

        dOmega1 = -J1 Omega2 N dt,   J1 = (I3 - I2)/I1
        dOmega2 = -J2 Omega1 N dt,   J2 = (I1 - I3)/I2
        dN      = f dt + sigma o dW.
    """
    if not isinstance(params.potential, ZeroPotential):
        raise ValueError("reduction requires U = 0 (Gamma cannot be discarded)")
    if not params.inertia.is_diagonal() or not np.allclose(params.axis, E3):
        raise ValueError("reduction requires diagonal inertia and axis e3")
    i1, i2, i3 = params.inertia.principal
    j1 = (i3 - i2) / i1
    j2 = (i1 - i3) / i2
    f_fn, sigma_fn = noise.build(params)

    # With a = e3 the reduced state (Omega1, Omega2, N) IS the body angular
    # velocity (Omega3 = N), so noise closures receive x itself as Omega.

    def drift(x):
        x = np.asarray(x, dtype=float)
        n = x[..., 2]
        gamma = np.broadcast_to(E3, x.shape)
        out = np.empty_like(x)
        out[..., 0] = -j1 * x[..., 1] * n
        out[..., 1] = -j2 * x[..., 0] * n
        out[..., 2] = f_fn(x, gamma, n)
        return out

    def diffusion(x):
        x = np.asarray(x, dtype=float)
        n = x[..., 2]
        gamma = np.broadcast_to(E3, x.shape)
        out = np.zeros_like(x)
        out[..., 2] = sigma_fn(x, gamma, n)
        return out

    return StratonovichField(dim=3, drift=drift, diffusion=diffusion, tag="suslov_reduced")
