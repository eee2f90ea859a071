import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adersolid import model
from adersolid.errors import (DegenerateCellError, InadmissibleStateError,
                              ResonanceError, StateError)
from adersolid.model import EosParams, IDEAL_GAS

STIFF = EosParams(gamma=2.0, pi=1.0)


@pytest.mark.parametrize("V, Q", [
    ([1, 1, 0, 0, 1, 0, 0], [1, 1, 0, 0, 2.5, 0, 0]),
    ([0.5, 1, 0, 0, 1, 0, 0], [0.5, 0.5, 0, 0, 1.25, 0, 0]),
    ([1, 1.4, 3, 0, 1, 0, 0], [1, 1.4, 4.2, 0, 8.8, 0, 0]),
])
def test_prim_to_cons_examples(V, Q):
    np.testing.assert_allclose(model.prim_to_cons(V), Q, rtol=1e-14, atol=1e-14)


@pytest.mark.parametrize("Q, V", [
    ([1, 1, 0, 0, 2.5, 0, 0], [1, 1, 0, 0, 1, 0, 0]),
    ([0.5, 0.5, 0, 0, 1.25, 0, 0], [0.5, 1, 0, 0, 1, 0, 0]),
    ([1, 1, 1, 0, 3.0, 1, 0], [1, 1, 1, 0, 1.0, 1, 0]),
])
def test_cons_to_prim_examples(Q, V):
    np.testing.assert_allclose(model.cons_to_prim(Q), V, rtol=1e-14, atol=1e-14)


def test_cons_to_prim_errors():
    with pytest.raises(DegenerateCellError):
        model.cons_to_prim([0.0, 1, 0, 1, 0])
    with pytest.raises(InadmissibleStateError):
        model.cons_to_prim([1.0, -1, 0, 1, 0])
    with pytest.raises(InadmissibleStateError):
        model.cons_to_prim([1.0, 1, 0, -1, 0])
    with pytest.raises(StateError):
        model.prim_to_cons([1.0, np.nan, 0, 1, 0])


@pytest.mark.parametrize("rho, p, eos, a", [
    (1.0, 1.0, IDEAL_GAS, np.sqrt(1.4)),
    (1.4, 1.0, IDEAL_GAS, 1.0),
    (1.0, 1.0, STIFF, 2.0),
])
def test_sound_speed(rho, p, eos, a):
    V = np.array([1.0, rho, 0.0, p, 0.0])
    assert model.sound_speed(V, eos) == pytest.approx(a, rel=1e-14)


def test_sound_speed_negative_radicand():
    with pytest.raises(InadmissibleStateError):
        model.sound_speed(np.array([1.0, 1.0, 0.0, -2.0, 0.0]), STIFF)


def test_eos_validation():
    with pytest.raises(ValueError):
        EosParams(gamma=1.0)
    with pytest.raises(ValueError):
        EosParams(pi=-1.0)


admissible = st.tuples(
    st.floats(0.05, 1.0), st.floats(0.1, 10.0), st.floats(-3, 3), st.floats(-3, 3),
    st.floats(0.1, 10.0), st.floats(-3, 3), st.floats(-3, 3))


@settings(max_examples=200, deadline=None)
@given(admissible)
def test_prim_cons_round_trip(v):
    V = np.array(v)
    for eos in (IDEAL_GAS, STIFF):
        back = model.cons_to_prim(model.prim_to_cons(V, eos), eos)
        np.testing.assert_allclose(back, V, rtol=1e-12, atol=1e-12)


def test_flux_1d_uniform():
    Q = model.prim_to_cons(np.array([0.5, 2.0, 1.5, 3.0, 0.0]))
    F = model.physical_flux(Q)[0]
    rho, u, p, a = 2.0, 1.5, 3.0, 0.5
    E = Q[3]
    np.testing.assert_allclose(F, [0.0, a * rho * u, a * rho * u * u + a * p,
                                   (E + a * p) * u, 0.0], rtol=1e-14)


def test_noncons_matrix_only_alpha_column():
    Q = model.prim_to_cons(np.array([0.7, 1.0, 0.3, -0.2, 2.0, 0.5, 0.1]))
    for axis in (0, 1):
        B = model.noncons_matrix(Q, axis=axis)
        assert np.all(B[:, 1:] == 0.0)
        us = Q[5 + axis]
        assert B[0, 0] == us
        assert B[2 + axis, 0] == -2.0
        assert B[4, 0] == pytest.approx(-2.0 * us)


def _numeric_jacobian(Q, eos, n, h=1e-7):
    d = model.ndim_of(Q.shape[0])

    def fn(q):
        F = model.physical_flux(q, eos)
        return np.tensordot(n, F, axes=1)

    J = np.zeros((Q.size, Q.size))
    for k in range(Q.size):
        e = np.zeros(Q.size)
        e[k] = h * max(1.0, abs(Q[k]))
        J[:, k] = (fn(Q + e) - fn(Q - e)) / (2 * e[k])
    B = sum(n[a] * model.noncons_matrix(Q, eos, a) for a in range(d))
    return J + B


@pytest.mark.parametrize("eos", [IDEAL_GAS, STIFF])
def test_quasilinear_matches_finite_differences(eos):
    rng = np.random.default_rng(3)
    for _ in range(5):
        V = np.array([rng.uniform(0.2, 1), rng.uniform(0.5, 2), rng.normal(), rng.normal(),
                      rng.uniform(0.5, 2), rng.normal(), rng.normal()])
        th = rng.uniform(0, 2 * np.pi)
        n = np.array([np.cos(th), np.sin(th)])
        Q = model.prim_to_cons(V, eos)
        np.testing.assert_allclose(model.quasilinear_matrix(Q, eos, n),
                                   _numeric_jacobian(Q, eos, n), atol=1e-6)


def test_eigenvalues_example():
    Q = model.prim_to_cons(np.array([1.0, 1.0, 0.0, 1.0, 0.0]))
    a = np.sqrt(1.4)
    np.testing.assert_allclose(model.eigenvalues(Q), sorted([0, -a, 0, a, 0]), atol=1e-15)


def test_eigenvectors_diagonalise():
    V = np.array([0.6, 1.2, 0.4, -0.3, 1.5, 1.1, 0.2])
    Q = model.prim_to_cons(V)
    n = np.array([0.6, 0.8])
    R, lam = model.right_eigenvectors(Q, n=n)
    RQ = model.dq_dv(V) @ R
    A = model.quasilinear_matrix(Q, n=n)
    assert np.abs(A @ RQ - RQ * lam).max() < 1e-11
    np.testing.assert_allclose(np.sort(lam), model.eigenvalues(Q, n=n), atol=1e-13)


def test_eigenvectors_resonance_rejected():
    a = np.sqrt(1.4)
    Q = model.prim_to_cons(np.array([0.5, 1.0, a, 1.0, 0.0]))
    with pytest.raises(ResonanceError):
        model.right_eigenvectors(Q)


def test_direction_must_be_unit():
    Q = model.prim_to_cons(np.array([0.5, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0]))
    with pytest.raises(ValueError):
        model.eigenvalues(Q, n=[1.0, 1.0])


@settings(max_examples=50, deadline=None)
@given(admissible, st.floats(0, 2 * np.pi))
def test_rotation_round_trip_and_invariance(v, th):
    Q = model.prim_to_cons(np.array(v))
    n = np.array([np.cos(th), np.sin(th)])
    R = model.rotate_state(Q, n)
    np.testing.assert_allclose(model.unrotate_state(R, n), Q, atol=1e-12)
    # rotational invariance: A_n in the rotated frame equals A_x
    np.testing.assert_allclose(model.eigenvalues(Q, n=n), model.eigenvalues(R), atol=1e-10)
