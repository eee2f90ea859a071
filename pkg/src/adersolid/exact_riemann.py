"""Exact solutions used as oracles.

* the exact Riemann solver of the (stiffened-gas) Euler equations,
* star states of a gas pushed or pulled by a rigid piston, obtained from a
  mirrored Riemann problem,
* numerical checks of the interface conditions of the reduced model: the
  contact Riemann invariant and the generalized Rankine-Hugoniot relation
  along the straight-line path.

Everything works with the shifted pressure ``P = p + pi``, in terms of which
the stiffened gas behaves like an ideal gas.
"""
from dataclasses import dataclass

import numpy as np

from . import model
from .errors import ConvergenceError, InadmissibleStateError, UnsupportedCaseError
from .model import IDEAL_GAS

TOL = 1e-12
MAX_ITER = 100


@dataclass(frozen=True)
class EulerState:
    rho: float
    u: float
    p: float

    def check(self, eos):
        if not (np.all(np.asarray(self.rho) > 0) and np.all(np.asarray(self.p) + eos.pi > 0)):
            raise InadmissibleStateError(f"inadmissible Euler state {self}")
        return self

    def sound_speed(self, eos=IDEAL_GAS):
        return np.sqrt(eos.gamma * (self.p + eos.pi) / self.rho)


@dataclass(frozen=True)
class PistonProblem:
    """Uniform gas next to a rigid piston moving at ``u_s``.

    ``side`` names the half-line occupied by the solid: ``"left"`` means the
    solid fills ``x <= x_interface`` and the gas lies to its right.
    """

    gas: EulerState
    u_s: float
    side: str = "left"


def _wave_function(P, state, eos):
    """Toro's ``f_K(p)`` and its derivative, in shifted pressure."""
    g = eos.gamma
    PK = state.p + eos.pi
    a = state.sound_speed(eos)
    if P > PK:
        A = 2.0 / ((g + 1.0) * state.rho)
        B = (g - 1.0) / (g + 1.0) * PK
        sq = np.sqrt(A / (P + B))
        f = (P - PK) * sq
        df = sq * (1.0 - 0.5 * (P - PK) / (P + B))
    else:
        r = P / PK
        f = 2.0 * a / (g - 1.0) * (r ** ((g - 1.0) / (2.0 * g)) - 1.0)
        df = r ** (-(g + 1.0) / (2.0 * g)) / (state.rho * a)
    return f, df


def _solve_bracketed(func, lo, hi, guess):
    """Newton iteration safeguarded by a sign-change bracket.

    ``func`` returns ``(value, derivative)`` and must be increasing.
    """
    x = min(max(guess, lo), hi)
    flo = func(lo)[0]
    if flo > 0:
        return lo
    for _ in range(MAX_ITER):
        f, df = func(x)
        if abs(f) < TOL:
            return x
        if f > 0:
            hi = x
        else:
            lo = x
        step = x - f / df if df > 0 else np.nan
        if not (lo < step < hi):
            step = 0.5 * (lo + hi)
        if abs(step - x) <= 1e-15 * max(1.0, abs(x)):
            return step
        x = step
    f = func(x)[0]
    if abs(f) < 1e-10:
        return x
    raise ConvergenceError(f"star pressure did not converge (residual {f})")


def star_state(left, right, eos=IDEAL_GAS):
    """Star-region pressure and velocity ``(p*, u*)``."""
    left.check(eos)
    right.check(eos)
    g = eos.gamma
    aL, aR = left.sound_speed(eos), right.sound_speed(eos)
    du = right.u - left.u
    if 2.0 * (aL + aR) / (g - 1.0) <= du:
        raise UnsupportedCaseError("initial data generate vacuum")

    def func(P):
        fL, dL = _wave_function(P, left, eos)
        fR, dR = _wave_function(P, right, eos)
        return fL + fR + du, dL + dR

    PL, PR = left.p + eos.pi, right.p + eos.pi
    # two-rarefaction guess
    z = (g - 1.0) / (2.0 * g)
    guess = ((aL + aR - 0.5 * (g - 1.0) * du) / (aL / PL ** z + aR / PR ** z)) ** (1.0 / z)
    lo = 1e-14 * min(PL, PR)
    hi = max(PL, PR, guess)
    while func(hi)[0] < 0:
        hi *= 2.0
    P = _solve_bracketed(func, lo, hi, guess)
    fL, _ = _wave_function(P, left, eos)
    fR, _ = _wave_function(P, right, eos)
    u = 0.5 * (left.u + right.u) + 0.5 * (fR - fL)
    return P - eos.pi, u


def _sample_side(state, p_star, u_star, xi, eos, sign):
    """Sample the left (sign=+1) or mirrored right (sign=-1) wave fan."""
    g = eos.gamma
    PK = state.p + eos.pi
    Pst = p_star + eos.pi
    a = state.sound_speed(eos)
    # mirror the right side onto a left-side problem
    u, us, x = sign * state.u, sign * u_star, sign * xi
    rho = np.full_like(x, state.rho)
    vel = np.full_like(x, u)
    P = np.full_like(x, PK)
    gr = (g - 1.0) / (g + 1.0)
    if Pst > PK:
        S = u - a * np.sqrt((g + 1.0) / (2.0 * g) * Pst / PK + (g - 1.0) / (2.0 * g))
        behind = x > S
        rho = np.where(behind, state.rho * (Pst / PK + gr) / (gr * Pst / PK + 1.0), rho)
        vel = np.where(behind, us, vel)
        P = np.where(behind, Pst, P)
    else:
        a_star = a * (Pst / PK) ** ((g - 1.0) / (2.0 * g))
        head, tail = u - a, us - a_star
        fan = (x > head) & (x < tail)
        star = x >= tail
        c = 2.0 / (g + 1.0) * (a + 0.5 * (g - 1.0) * (u - x))
        rho_fan = state.rho * np.abs(c / a) ** (2.0 / (g - 1.0))
        rho = np.where(fan, rho_fan, rho)
        vel = np.where(fan, 2.0 / (g + 1.0) * (a + 0.5 * (g - 1.0) * u + x), vel)
        P = np.where(fan, PK * np.abs(c / a) ** (2.0 * g / (g - 1.0)), P)
        rho = np.where(star, state.rho * (Pst / PK) ** (1.0 / g), rho)
        vel = np.where(star, us, vel)
        P = np.where(star, Pst, P)
    return rho, sign * vel, P - eos.pi


def euler_exact_sample(left, right, eos=IDEAL_GAS, xi=0.0):
    """Self-similar exact solution at ``xi = x / t`` (scalar or array)."""
    p_star, u_star = star_state(left, right, eos)
    x = np.atleast_1d(np.asarray(xi, dtype=float))
    rl, ul, pl = _sample_side(left, p_star, u_star, x, eos, +1.0)
    rr, ur, pr = _sample_side(right, p_star, u_star, x, eos, -1.0)
    on_left = x <= u_star
    rho = np.where(on_left, rl, rr)
    u = np.where(on_left, ul, ur)
    p = np.where(on_left, pl, pr)
    if np.ndim(xi) == 0:
        return EulerState(float(rho[0]), float(u[0]), float(p[0]))
    return EulerState(rho, u, p)


def mirrored_problem(prob):
    """Left and right states of the equivalent Euler Riemann problem."""
    gas = prob.gas
    ghost = EulerState(gas.rho, 2.0 * prob.u_s - gas.u, gas.p)
    if prob.side == "left":
        return ghost, gas
    if prob.side == "right":
        return gas, ghost
    raise ValueError(f"side must be 'left' or 'right', got {prob.side!r}")


def piston_star_state(prob, eos=IDEAL_GAS):
    """State adjacent to the piston: velocity ``u_s``, pressure from the
    single shock or rarefaction running into the gas."""
    gas = prob.gas.check(eos)
    g = eos.gamma
    a = gas.sound_speed(eos)
    # speed at which the piston moves into the gas
    push = prob.u_s - gas.u if prob.side == "left" else gas.u - prob.u_s
    if push <= -2.0 * a / (g - 1.0):
        raise UnsupportedCaseError("piston recedes faster than the vacuum limit")
    PK = gas.p + eos.pi

    def func(P):
        f, df = _wave_function(P, gas, eos)
        return f - push, df

    if push == 0.0:
        P = PK
    else:
        hi = 2.0 * PK
        while func(hi)[0] < 0:
            hi *= 2.0
        P = _solve_bracketed(func, 1e-14 * PK, hi, PK)
    g_ratio = (g - 1.0) / (g + 1.0)
    if P > PK:
        rho = gas.rho * (P / PK + g_ratio) / (g_ratio * P / PK + 1.0)
    else:
        rho = gas.rho * (P / PK) ** (1.0 / g)
    return EulerState(rho, prob.u_s, P - eos.pi)


def piston_solution(prob, eos=IDEAL_GAS, x=0.0, t=1.0, x0=0.0):
    """Gas state at ``(x, t)`` for a piston starting at ``x0`` when t = 0.

    Points inside the solid get NaN.
    """
    left, right = mirrored_problem(prob)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    sol = euler_exact_sample(left, right, eos, (x - x0) / t)
    interface = x0 + prob.u_s * t
    solid = x <= interface if prob.side == "left" else x >= interface
    return EulerState(*(np.where(solid, np.nan, f) for f in (sol.rho, sol.u, sol.p)))


def piston_waves(prob, eos=IDEAL_GAS):
    """Speeds of the wave running into the gas.

    Returns ``("shock", (S,))`` or ``("rarefaction", (head, tail))`` for a
    solid on the left (mirror the speeds for ``side="right"``).
    """
    gas = prob.gas
    star = piston_star_state(prob, eos)
    g = eos.gamma
    a = gas.sound_speed(eos)
    PK, Pst = gas.p + eos.pi, star.p + eos.pi
    sgn = 1.0 if prob.side == "left" else -1.0
    if Pst > PK:
        S = gas.u + sgn * a * np.sqrt((g + 1.0) / (2.0 * g) * Pst / PK + (g - 1.0) / (2.0 * g))
        return "shock", (S,)
    a_star = star.sound_speed(eos)
    if Pst == PK:
        return "none", ()
    return "rarefaction", (gas.u + sgn * a, prob.u_s + sgn * a_star)


def _gauss01(npts):
    x, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * (x + 1.0), 0.5 * w


def grh_path_residual(Q_minus, Q_plus, S, eos=IDEAL_GAS, npts=10):
    """``S [[Q]] - int_0^1 A(Psi) dPsi/dtau dtau`` on the straight path.

    The path integral is computed with ``npts``-point Gauss-Legendre; the
    end point ``tau = 0`` (possibly a pure-solid state with ``alpha = 0``)
    is never evaluated.
    """
    Qm = np.asarray(Q_minus, dtype=float)
    Qp = np.asarray(Q_plus, dtype=float)
    d = model.ndim_of(Qm.shape[0])
    n = np.eye(d)[0]
    dQ = Qp - Qm
    taus, w = _gauss01(npts)
    integral = np.zeros_like(dQ)
    for tau, wt in zip(taus, w):
        A = model.quasilinear_matrix((1.0 - tau) * Qm + tau * Qp, eos, n)
        integral += wt * (A @ dQ)
    return S * dQ - integral


def riemann_invariant_check(Q_plus, tol=1e-2):
    """Compare the gas velocity ``q3/q2`` with the solid velocity slot.

    Returns ``(passed, |u - u_s|)``.
    """
    Q = np.asarray(Q_plus, dtype=float)
    d = model.ndim_of(Q.shape[0])
    u = Q[2] / Q[model.IR]
    us = Q[3 + d]
    dev = abs(u - us)
    return bool(dev <= tol), float(dev)
