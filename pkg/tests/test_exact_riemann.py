import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adersolid import exact_riemann as er, model
from adersolid.errors import InadmissibleStateError, UnsupportedCaseError
from adersolid.exact_riemann import EulerState, PistonProblem
from adersolid.model import EosParams

SOD = (EulerState(1.0, 0.0, 1.0), EulerState(0.125, 0.0, 0.1))


def _bisect_star(left, right, eos=model.IDEAL_GAS):
    """Independent oracle: plain bisection on the pressure function."""
    def f(P):
        return er._wave_function(P, left, eos)[0] + er._wave_function(P, right, eos)[0] + right.u - left.u
    lo, hi = 1e-10, 1e3
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if f(mid) < 0 else (lo, mid)
    return 0.5 * (lo + hi)


def test_sod_star_state():
    p, u = er.star_state(*SOD)
    assert p == pytest.approx(0.30313, abs=1e-5)
    assert u == pytest.approx(0.92745, abs=1e-5)
    assert p == pytest.approx(_bisect_star(*SOD), rel=1e-10)


def test_sod_sample_regions():
    left, right = SOD
    s = er.euler_exact_sample(left, right, xi=np.array([-2.0, 0.5, 1.2, 2.0]))
    np.testing.assert_allclose(s.rho[[0, 3]], [1.0, 0.125])
    assert s.p[1] == pytest.approx(0.30313, abs=1e-5)
    assert s.p[2] == pytest.approx(0.30313, abs=1e-5)
    assert s.rho[1] > s.rho[2]


def test_vacuum_rejected():
    with pytest.raises(UnsupportedCaseError):
        er.star_state(EulerState(1.0, -10.0, 1.0), EulerState(1.0, 10.0, 1.0))


def test_inadmissible_state():
    with pytest.raises(InadmissibleStateError):
        er.star_state(EulerState(-1.0, 0.0, 1.0), EulerState(1.0, 0.0, 1.0))


@pytest.mark.parametrize("gas, us, p_star, rho_star", [
    (EulerState(1.0, 0.0, 1.0), 1.0, 2.92665, 2.0792),
    (EulerState(1.0, 0.0, 1.0), -1.0, 0.273586, None),
    (EulerState(1.0, -1.0, 1.0), 3.0, 21.3033, 4.7181),
])
def test_piston_star_state(gas, us, p_star, rho_star):
    star = er.piston_star_state(PistonProblem(gas, us))
    assert star.u == us
    assert star.p == pytest.approx(p_star, rel=1e-5)
    if rho_star is not None:
        assert star.rho == pytest.approx(rho_star, rel=1e-4)


def test_piston_rarefaction_closed_form():
    g = 1.4
    a = np.sqrt(g)
    star = er.piston_star_state(PistonProblem(EulerState(1.0, 0.0, 1.0), -1.0))
    assert star.p == pytest.approx((1 - 0.5 * (g - 1) / a) ** (2 * g / (g - 1)), rel=1e-12)


def test_piston_matches_mirrored_riemann_problem():
    prob = PistonProblem(EulerState(1.0, -1.0, 1.0), 3.0)
    p, u = er.star_state(*er.mirrored_problem(prob))
    assert u == pytest.approx(3.0, abs=1e-10)
    assert p == pytest.approx(er.piston_star_state(prob).p, rel=1e-10)


def test_piston_side_symmetry():
    left = er.piston_star_state(PistonProblem(EulerState(1.0, 0.5, 1.0), 1.0, "left"))
    right = er.piston_star_state(PistonProblem(EulerState(1.0, -0.5, 1.0), -1.0, "right"))
    assert left.p == pytest.approx(right.p, rel=1e-12)
    assert left.rho == pytest.approx(right.rho, rel=1e-12)


def test_piston_vacuum_limit():
    with pytest.raises(UnsupportedCaseError):
        er.piston_star_state(PistonProblem(EulerState(1.0, 0.0, 1.0), -20.0))


def test_piston_solution_solid_is_nan():
    prob = PistonProblem(EulerState(1.0, 0.0, 1.0), 1.0)
    sol = er.piston_solution(prob, x=np.array([0.1, 0.6, 5.0]), t=0.4)
    assert np.isnan(sol.rho[0])
    assert sol.u[1] == pytest.approx(1.0)
    assert sol.rho[2] == 1.0


def test_piston_waves_shock_speed():
    kind, (S,) = er.piston_waves(PistonProblem(EulerState(1.0, -1.0, 1.0), 3.0))
    assert kind == "shock"
    assert S == pytest.approx(4.0758, abs=1e-4)


def test_stiffened_gas_shift():
    # with the shifted pressure a stiffened gas behaves like an ideal gas
    eos = EosParams(gamma=1.4, pi=2.0)
    left, right = EulerState(1.0, 0.0, 1.0), EulerState(0.125, 0.0, 0.1)
    p, u = er.star_state(left, right, eos)
    ps, us = er.star_state(EulerState(1.0, 0.0, 3.0), EulerState(0.125, 0.0, 2.1))
    assert p + 2.0 == pytest.approx(ps, rel=1e-10)
    assert u == pytest.approx(us, rel=1e-10)


def _contact_pair(rho, p, us):
    Qm = np.array([0.0, 0.0, 0.0, 0.0, us])
    Qp = model.prim_to_cons(np.array([1.0, rho, us, p, us]))
    return Qm, Qp


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(-3, 3))
def test_grh_residual_contact_family(rho, p, us):
    Qm, Qp = _contact_pair(rho, p, us)
    assert np.abs(er.grh_path_residual(Qm, Qp, us)).max() < 1e-10


def test_grh_residual_detects_perturbation():
    Qm, Qp = _contact_pair(1.0, 1.0, 1.0)
    bad = model.prim_to_cons(np.array([1.0, 1.0, 1.1, 1.0, 1.0]))
    assert np.abs(er.grh_path_residual(Qm, bad, 1.0)).max() > 1e-4


def test_riemann_invariant_check():
    Q = model.prim_to_cons(np.array([1.0, 1.0, 0.995, 1.0, 1.0]))
    ok, dev = er.riemann_invariant_check(Q)
    assert ok and dev == pytest.approx(0.005)
    Q = model.prim_to_cons(np.array([1.0, 1.0, 0.9, 1.0, 1.0]))
    assert not er.riemann_invariant_check(Q)[0]
