"""Small fixed-size linear algebra for body-frame mechanics.

Everything here works on plain numpy arrays with the vector living on the
*last* axis, so the same code path serves a single state ``(3,)`` and a
Monte Carlo batch ``(n_paths, 3)``.  Matrix components follow row-major
semantics throughout the package.

All operations are written as explicit component formulas (no BLAS calls),
which keeps results bit-identical regardless of batch shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class NotAntisymmetric(ValueError):
    """Matrix handed to ``unhat`` has a non-negligible symmetric part."""


class SingularInertia(ValueError):
    """Inertia tensor is not symmetric positive definite."""


def hat(v):
    """Map a 3-vector to the antisymmetric matrix with hat(v) @ w == v x w.

    Component rule: hat(v)[i, j] = -eps_ijk v[k].
    """
    x, y, z = np.broadcast_arrays(*np.moveaxis(np.asarray(v, dtype=float), -1, 0))
    zero = np.zeros_like(x)
    rows = [
        np.stack([zero, -z, y], axis=-1),
        np.stack([z, zero, -x], axis=-1),
        np.stack([-y, x, zero], axis=-1),
    ]
    return np.stack(rows, axis=-2)


def unhat(m, tol=1e-12):
    """Inverse of ``hat``. Requires the symmetric part of ``m`` to be negligible.

    Raises NotAntisymmetric when ||m + m^T||_F exceeds ``tol`` relative to
    max(1, ||m||_F).
    """
    m = np.asarray(m, dtype=float)
    sym = 0.5 * (m + np.swapaxes(m, -1, -2))
    scale = max(1.0, float(np.sqrt((m * m).sum())))
    if float(np.sqrt((sym * sym).sum())) > tol * scale:
        raise NotAntisymmetric(
            "matrix is not antisymmetric within tolerance %g" % tol
        )
    return np.stack([m[..., 2, 1], m[..., 0, 2], m[..., 1, 0]], axis=-1)


def cross(a, b):
    """Cross product on the last axis, broadcasting over leading axes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2]
    b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2]
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    out[..., 0] = a2 * b3 - a3 * b2
    out[..., 1] = a3 * b1 - a1 * b3
    out[..., 2] = a1 * b2 - a2 * b1
    return out


def dot(a, b):
    """Inner product on the last axis."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return (a * b).sum(axis=-1)


def _mat3_det(m):
    return (
        m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
        - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
        + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
    )


def mat3_inverse(m):
    """Explicit adjugate/determinant inverse of a 3x3 matrix."""
    m = np.asarray(m, dtype=float)
    det = _mat3_det(m)
    if det == 0.0:
        raise SingularInertia("3x3 matrix is singular")
    adj = np.empty((3, 3))
    adj[0, 0] = m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1]
    adj[0, 1] = m[0, 2] * m[2, 1] - m[0, 1] * m[2, 2]
    adj[0, 2] = m[0, 1] * m[1, 2] - m[0, 2] * m[1, 1]
    adj[1, 0] = m[1, 2] * m[2, 0] - m[1, 0] * m[2, 2]
    adj[1, 1] = m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0]
    adj[1, 2] = m[0, 2] * m[1, 0] - m[0, 0] * m[1, 2]
    adj[2, 0] = m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0]
    adj[2, 1] = m[0, 1] * m[2, 0] - m[0, 0] * m[2, 1]
    adj[2, 2] = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    return adj / det


def mat_apply(m, v):
    """Apply a fixed 3x3 matrix to vectors on the last axis (broadcasting)."""
    v = np.asarray(v, dtype=float)
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    out = np.empty_like(v)
    out[..., 0] = m[0, 0] * x + m[0, 1] * y + m[0, 2] * z
    out[..., 1] = m[1, 0] * x + m[1, 1] * y + m[1, 2] * z
    out[..., 2] = m[2, 0] * x + m[2, 1] * y + m[2, 2] * z
    return out


@dataclass(frozen=True)
class InertiaTensor:
    """Symmetric positive-definite 3x3 inertia with a precomputed exact inverse.

    Construct with ``InertiaTensor(matrix)`` or ``InertiaTensor.diagonal(i1, i2, i3)``.
    ``apply`` computes I v, ``solve`` computes I^-1 v; both broadcast over
    leading axes of ``v``.
    """

    matrix: np.ndarray
    inverse: np.ndarray = field(init=False, repr=False, compare=False)
    det: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise SingularInertia("inertia must be a 3x3 matrix")
        if not np.all(np.isfinite(m)):
            raise SingularInertia("inertia has non-finite entries")
        scale = max(1.0, float(np.abs(m).max()))
        if float(np.abs(m - m.T).max()) > 1e-12 * scale:
            raise SingularInertia("inertia is not symmetric")
        m = 0.5 * (m + m.T)
        # Sylvester's criterion keeps the SPD check decomposition-free.
        lead1 = m[0, 0]
        lead2 = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        lead3 = _mat3_det(m)
        if not (lead1 > 0.0 and lead2 > 0.0 and lead3 > 0.0):
            raise SingularInertia("inertia is not positive definite")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "inverse", mat3_inverse(m))
        object.__setattr__(self, "det", float(lead3))

    @classmethod
    def diagonal(cls, i1, i2, i3):
        return cls(np.diag([float(i1), float(i2), float(i3)]))

    @property
    def principal(self):
        """Diagonal entries (principal moments when the matrix is diagonal)."""
        return np.diagonal(self.matrix).copy()

    def is_diagonal(self, tol=1e-14):
        off = self.matrix - np.diag(np.diagonal(self.matrix))
        return float(np.abs(off).max()) <= tol * max(1.0, float(np.abs(self.matrix).max()))

    def apply(self, v):
        return mat_apply(self.matrix, v)

    def solve(self, v):
        return mat_apply(self.inverse, v)


def apply_inertia(inertia: InertiaTensor, v):
    return inertia.apply(v)


def solve_inertia(inertia: InertiaTensor, v):
    return inertia.solve(v)
