"""Hat map, cross products and inertia handling.

Expected values are either forced by the epsilon-tensor definition or
computed against an independent oracle (hand cross products, numpy's
general-purpose inverse).
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonholo.algebra import (
    InertiaTensor,
    NotAntisymmetric,
    SingularInertia,
    cross,
    dot,
    hat,
    mat3_inverse,
    unhat,
)

RNG = np.random.default_rng(7)

finite_vec = st.lists(
    st.floats(min_value=-1e3, max_value=1e3, allow_nan=False), min_size=3, max_size=3
)


def test_hat_e3():
    expected = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    assert np.array_equal(hat([0.0, 0.0, 1.0]), expected)


def test_hat_zero():
    assert np.array_equal(hat(np.zeros(3)), np.zeros((3, 3)))


def test_hat_cross_example():
    # (1,2,3) x (4,5,6) = (-3, 6, -3), by hand
    assert np.allclose(hat([1.0, 2.0, 3.0]) @ [4.0, 5.0, 6.0], [-3.0, 6.0, -3.0])


def test_hat_matches_cross_product_on_random_pairs():
    a = RNG.standard_normal((1000, 3))
    b = RNG.standard_normal((1000, 3))
    via_hat = np.einsum("nij,nj->ni", hat(a), b)
    assert np.max(np.abs(via_hat - cross(a, b))) <= 1e-14 * np.max(np.abs(via_hat) + 1)


def test_hat_commutator_is_hat_of_cross():
    a = RNG.standard_normal((200, 3))
    b = RNG.standard_normal((200, 3))
    ha, hb = hat(a), hat(b)
    comm = np.einsum("nij,njk->nik", ha, hb) - np.einsum("nij,njk->nik", hb, ha)
    assert np.max(np.abs(comm - hat(cross(a, b)))) <= 1e-13 * (1 + np.max(np.abs(comm)))


@given(finite_vec)
@settings(max_examples=200, deadline=None)
def test_hat_exactly_antisymmetric(v):
    m = hat(v)
    assert np.array_equal(m + m.T, np.zeros((3, 3)))


def test_unhat_round_trip():
    v = np.array([1.0, 2.0, 3.0])
    assert np.array_equal(unhat(hat(v)), v)


def test_unhat_zero():
    assert np.array_equal(unhat(np.zeros((3, 3))), np.zeros(3))


def test_unhat_rejects_symmetric():
    with pytest.raises(NotAntisymmetric):
        unhat(np.eye(3))


def test_batched_hat_shapes():
    v = RNG.standard_normal((4, 5, 3))
    assert hat(v).shape == (4, 5, 3, 3)
    assert np.allclose(unhat(hat(v)), v)


def test_apply_inertia_diagonal():
    inertia = InertiaTensor.diagonal(1.0, 2.0, 3.0)
    assert np.array_equal(inertia.apply([1.0, 1.0, 1.0]), [1.0, 2.0, 3.0])
    assert np.allclose(inertia.solve([0.0, 0.0, 1.0]), [0.0, 0.0, 1.0 / 3.0])


def test_full_inertia_round_trip_against_general_inverse():
    base = RNG.standard_normal((3, 3))
    spd = base @ base.T + 4.0 * np.eye(3)
    inertia = InertiaTensor(spd)
    v = RNG.standard_normal((64, 3))
    round_trip = inertia.solve(inertia.apply(v))
    assert np.max(np.abs(round_trip - v)) <= 1e-12 * np.max(np.abs(v))
    # adjugate inverse agrees with the general-purpose oracle
    assert np.allclose(mat3_inverse(spd), np.linalg.inv(spd), atol=1e-12)


@pytest.mark.parametrize("bad", [
    np.diag([1.0, -2.0, 3.0]),
    np.diag([1.0, 0.0, 3.0]),
    np.array([[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]),  # asymmetric
])
def test_inertia_rejects_non_spd(bad):
    with pytest.raises(SingularInertia):
        InertiaTensor(bad)


def test_dot_broadcasts():
    a = RNG.standard_normal((10, 3))
    assert np.allclose(dot(a, a), (a * a).sum(axis=1))
