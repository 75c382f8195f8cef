"""Chart-level Lagrange-d'Alembert assembly.

The nonholonomic free particle (constraint z_dot = y x_dot) doubles as the
reference system: its multiplier-form DAE has the closed multiplier
lambda = vx vy / (1 + y^2), integrated independently as the oracle.
"""

import numpy as np
import pytest

from nonholo import chart
from nonholo.sde import heun_step, integrate, integrate_deterministic, wiener_path


def _unit_mass(q):
    return np.eye(3)


def test_b_coefficients_constant_a_vanish():
    sys = chart.ChartSystem(n=3, m=1, mass_matrix=_unit_mass, potential=lambda q: 0.0,
                            coeffs=lambda r, s: np.array([[0.3, -0.7]]))
    b = chart.b_coefficients(sys, np.array([0.1, 0.2]), np.array([0.3]))
    assert np.max(np.abs(b)) <= 1e-9


def test_b_coefficients_s_dependent_example():
    # A11 = s1, A12 = 0: B112 = A11 dA12/ds - A12 dA11/ds = 0
    sys = chart.ChartSystem(n=3, m=1, mass_matrix=_unit_mass, potential=lambda q: 0.0,
                            coeffs=lambda r, s: np.array([[s[0], 0.0]]))
    b = chart.b_coefficients(sys, np.array([0.1, 0.2]), np.array([0.3]))
    assert np.max(np.abs(b)) <= 1e-9


def test_b_coefficients_r_dependent_example():
    # A11 = r2^2: B112 = dA11/dr2 - dA12/dr1 = 2 r2
    sys = chart.ChartSystem(n=3, m=1, mass_matrix=_unit_mass, potential=lambda q: 0.0,
                            coeffs=lambda r, s: np.array([[r[1] ** 2, 0.0]]))
    b = chart.b_coefficients(sys, np.array([0.1, 0.5]), np.array([0.3]))
    assert np.isclose(b[0, 0, 1], 1.0, atol=1e-8)
    assert np.isclose(b[0, 1, 0], -1.0, atol=1e-8)


def test_b_coefficients_antisymmetric_on_random_smooth_a():
    rng = np.random.default_rng(3)
    coef = rng.standard_normal((1, 2, 6))

    def coeffs(r, s):
        feats = np.array([1.0, r[0], r[1], s[0], r[0] * s[0], np.sin(r[1])])
        return coef @ feats

    sys = chart.ChartSystem(n=3, m=1, mass_matrix=_unit_mass, potential=lambda q: 0.0,
                            coeffs=coeffs)
    for _ in range(10):
        r = rng.standard_normal(2)
        s = rng.standard_normal(1)
        b = chart.b_coefficients(sys, r, s)
        assert np.max(np.abs(b + np.swapaxes(b, 1, 2))) <= 1e-8


ZERO1 = lambda r, s, u, w, n: np.zeros(1)


def test_type1_zero_constraint_reduces_to_euler_lagrange():
    # A = 0, N = 0: the r-block obeys the unconstrained oscillator, s frozen
    sys = chart.ChartSystem(n=3, m=1, mass_matrix=_unit_mass,
                            potential=lambda q: 0.5 * float(q @ q),
                            coeffs=lambda r, s: np.zeros((1, 2)),
                            noise_drift=ZERO1, noise_diffusion=ZERO1)
    field = chart.type1_field(sys)
    x0 = np.array([1.0, 0.5, 0.25, 0.0, 0.0, 0.0])
    traj = integrate_deterministic(field, x0, 1e-3, 2000)
    assert abs(traj.states[-1, 0] - np.cos(2.0)) <= 1e-5
    assert abs(traj.states[-1, 1] - 0.5 * np.cos(2.0)) <= 1e-5
    assert abs(traj.states[-1, 2] - 0.25) <= 1e-12  # s held by the constraint


def _dae_oracle(state, dt, n):
    """Multiplier-form reference for the free particle, deterministic Heun."""

    def rhs(y):
        x, yy, z, vx, vy, vz = y
        lam = vx * vy / (1.0 + yy * yy)
        return np.array([vx, vy, vz, -lam * yy, 0.0, lam])

    y = state.copy()
    for _ in range(n):
        k1 = rhs(y)
        k2 = rhs(y + dt * k1)
        y = y + 0.5 * dt * (k1 + k2)
    return y


def test_particle_matches_multiplier_dae_oracle():
    sys = chart.free_particle_system()
    field = chart.type1_field(sys)
    x0 = np.array([0.0, 1.0, 0.0, 1.0, 0.5, 0.0])  # (x, y, z, u1, u2, N)
    dt, t_final = 1e-4, 1.0
    n = int(round(t_final / dt))
    traj = integrate_deterministic(field, x0, dt, n, stride=n)
    ref0 = np.array([0.0, 1.0, 0.0, 1.0, 0.5, 1.0])  # vz = y vx
    ref = _dae_oracle(ref0, dt, n)
    got = traj.states[-1]
    w = got[5] + (-got[1]) * got[3]  # z_dot = N - A u
    assert np.max(np.abs(got[0:3] - ref[0:3])) <= 1e-6
    assert np.max(np.abs([got[3] - ref[3], got[4] - ref[4], w - ref[5]])) <= 1e-6


def test_particle_with_noise_keeps_algebraic_residual():
    sys = chart.free_particle_system(noise_drift=ZERO1,
                                     noise_diffusion=lambda r, s, u, w, n: np.ones(1))
    field = chart.type1_field(sys)
    x0 = np.array([0.0, 1.0, 0.0, 1.0, 0.5, 0.0])
    traj = integrate(field, x0, wiener_path(31, 1000, 1e-3), stride=10)
    res = chart.constraint_residual(sys, traj.states)
    assert np.max(np.abs(res)) <= 1e-10
    # the discrete path residual converges at second order instead
    disc = chart.discrete_constraint_residual(sys, traj)
    assert np.max(np.abs(disc)) <= 1e-3


def test_type2_n_independent_matches_type1():
    sys = chart.free_particle_system(ZERO1, ZERO1)
    sys2 = chart.ChartSystem(n=3, m=1, mass_matrix=_unit_mass, potential=lambda q: 0.0,
                             coeffs=sys.coeffs,
                             coeffs_tilde=lambda r, s, n: sys.coeffs(r, s),
                             noise_drift=ZERO1, noise_diffusion=ZERO1)
    f1 = chart.type1_field(sys)
    f2 = chart.type2_field(sys2)
    x = np.array([0.2, 0.8, -0.1, 0.9, 0.4, 0.0])
    assert np.allclose(f1.drift(x), f2.drift(x), atol=1e-9)


def test_type2_particle_energy_conserved_and_residual_small():
    sys = chart.free_particle_system(
        ZERO1, lambda r, s, u, w, n: np.full(1, 0.3))
    field = chart.type2_field(sys)   # A~ = (-y - N, 0)
    x0 = np.array([0.0, 1.0, 0.0, 1.0, 0.5, 0.0])
    devs = {}
    for dt in (1e-3, 5e-4):
        n = int(round(1.0 / dt))
        traj = integrate(field, x0, wiener_path(33, n, dt), stride=max(1, n // 200))
        res = chart.constraint_residual(sys, traj.states, type2=True)
        assert np.max(np.abs(res)) <= 1e-10
        e = np.array([chart.chart_energy(sys, row, type2=True) for row in traj.states])
        devs[dt] = float(np.max(np.abs(e - e[0])))
    assert devs[1e-3] <= 1e-2
    assert devs[1e-3] / devs[5e-4] >= 1.5


def test_type1_energy_not_conserved_witness():
    sys = chart.free_particle_system(
        ZERO1, lambda r, s, u, w, n: np.ones(1))
    field = chart.type1_field(sys)
    x0 = np.array([0.0, 1.0, 0.0, 1.0, 0.5, 0.0])
    devs = {}
    for dt in (1e-3, 5e-4):
        n = int(round(1.0 / dt))
        traj = integrate(field, x0, wiener_path(35, n, dt), stride=max(1, n // 200))
        e = np.array([chart.chart_energy(sys, row) for row in traj.states])
        devs[dt] = float(np.max(np.abs(e - e[0])))
    assert devs[1e-3] > 0.05              # O(1) energy motion, not O(dt)
    assert devs[1e-3] / devs[5e-4] < 1.5  # and no halving under refinement


def test_hessian_guard():
    singular = np.diag([1.0, 1.0, 1e-15])

    def coeffs(r, s):
        return np.zeros((1, 2))

    sys = chart.ChartSystem(n=3, m=1, mass_matrix=lambda q: singular,
                            potential=lambda q: 0.0, coeffs=coeffs,
                            noise_drift=ZERO1, noise_diffusion=ZERO1)
    field = chart.type1_field(sys)
    with pytest.raises(chart.HessianSingular):
        field.drift(np.array([0.0, 0.0, 0.0, 1.0, 1.0, 0.0]))


def test_chart_domain_guard():
    sys = chart.ChartSystem(n=3, m=1, mass_matrix=_unit_mass, potential=lambda q: 0.0,
                            coeffs=lambda r, s: np.zeros((1, 2)),
                            noise_drift=ZERO1, noise_diffusion=ZERO1,
                            domain=lambda r, s: bool(abs(r[0]) < 1.0))
    field = chart.type1_field(sys)
    with pytest.raises(chart.ChartDomain):
        field.drift(np.array([2.0, 0.0, 0.0, 1.0, 0.0, 0.0]))
