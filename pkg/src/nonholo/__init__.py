"""Nonholonomic mechanics with stochastic constraints.

Subpackages cover exact small-size algebra, the Stratonovich Heun integrator,
generic chart-level constrained systems, the Suslov rigid body, rolling-type
systems on se(3) x S^2, Monte Carlo ensembles, and a finite-difference
Fokker-Planck solver with Monte Carlo cross-validation.
"""

from .algebra import (
    InertiaTensor,
    NotAntisymmetric,
    SingularInertia,
    cross,
    dot,
    hat,
    unhat,
)
from .sde import (
    InvalidStep,
    StratonovichField,
    Trajectory,
    WienerPath,
    derive_seed,
    estimate_strong_order,
    heun_step,
    integrate,
    wiener_path,
)

__all__ = [
    "InertiaTensor",
    "NotAntisymmetric",
    "SingularInertia",
    "cross",
    "dot",
    "hat",
    "unhat",
    "InvalidStep",
    "StratonovichField",
    "Trajectory",
    "WienerPath",
    "derive_seed",
    "estimate_strong_order",
    "heun_step",
    "integrate",
    "wiener_path",
]
