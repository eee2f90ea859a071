"""Reduced Baer-Nunziato system for a gas flowing around rigid solids.

State layout (variables on the first axis, any trailing shape)::

    Q = (alpha, alpha*rho, alpha*rho*v[0..d-1], alpha*rho*E, v_s[0..d-1])
    V = (alpha, rho, v[0..d-1], p, v_s[0..d-1])

so ``nvar = 3 + 2*d`` (5 in 1D, 7 in 2D).  The gas obeys a stiffened-gas
law ``e = (p + gamma*pi) / (rho*(gamma - 1))``.

The system reads ``Q_t + div F(Q) + B(Q) . grad Q = 0`` where the only
non-conservative coupling goes through ``grad alpha``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateCellError, InadmissibleStateError,
                     ResonanceError, StateError)

#: floor on alpha when dividing by it to recover primitives
EPS_DIV = 1e-8

#: refuse eigenvectors this close to the sonic resonance
RESONANCE_TOL = 1e-10

IA = 0    # volume fraction
IR = 1    # partial density / density


@dataclass(frozen=True)
class EosParams:
    """Stiffened-gas constants of the gas phase."""

    gamma: float = 1.4
    pi: float = 0.0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if not self.pi >= 0.0:
            raise ValueError(f"pi must be non-negative, got {self.pi}")


IDEAL_GAS = EosParams()


def ndim_of(nvar):
    d, rem = divmod(nvar - 3, 2)
    if rem or d not in (1, 2, 3):
        raise ValueError(f"not a state vector length: {nvar}")
    return d


def imom(d):
    return slice(2, 2 + d)


def iener(d):
    return 2 + d


def isol(d):
    return slice(3 + d, 3 + 2 * d)


def _asarray(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        raise StateError("state must be a vector")
    return x


def prim_to_cons(V, eos=IDEAL_GAS, check=True):
    """Primitive ``(alpha, rho, v, p, v_s)`` to conserved variables."""
    V = _asarray(V)
    d = ndim_of(V.shape[0])
    if check and not np.all(np.isfinite(V)):
        raise StateError("non-finite primitive state")
    alpha, rho, vel, p = V[IA], V[IR], V[imom(d)], V[iener(d)]
    g, pi = eos.gamma, eos.pi
    Q = np.empty_like(V)
    Q[IA] = alpha
    Q[IR] = alpha * rho
    Q[imom(d)] = alpha * rho * vel
    kinetic = 0.5 * rho * np.sum(vel * vel, axis=0)
    Q[iener(d)] = alpha * ((p + g * pi) / (g - 1.0) + kinetic)
    Q[isol(d)] = V[isol(d)]
    return Q


def cons_to_prim(Q, eos=IDEAL_GAS, check=True):
    """Conserved to primitive variables.

    With ``check=False`` no validation is done and degenerate input simply
    yields non-finite or inadmissible numbers; the solver relies on that
    and judges admissibility afterwards.
    """
    Q = _asarray(Q)
    d = ndim_of(Q.shape[0])
    if check:
        if not np.all(np.isfinite(Q)):
            raise StateError("non-finite conserved state")
        if np.any(Q[IA] < EPS_DIV):
            raise DegenerateCellError(
                f"alpha below {EPS_DIV}: min {np.min(Q[IA])}")
        if np.any(Q[IR] <= 0.0):
            raise InadmissibleStateError("non-positive partial density")
    g, pi = eos.gamma, eos.pi
    alpha = Q[IA]
    V = np.empty_like(Q)
    V[IA] = alpha
    rho = Q[IR] / alpha
    V[IR] = rho
    vel = Q[imom(d)] / Q[IR]
    V[imom(d)] = vel
    rhoe = Q[iener(d)] / alpha - 0.5 * rho * np.sum(vel * vel, axis=0)
    V[iener(d)] = (g - 1.0) * rhoe - g * pi
    V[isol(d)] = Q[isol(d)]
    if check and np.any(V[iener(d)] + pi <= 0.0):
        raise InadmissibleStateError("p + pi <= 0")
    return V


def sound_speed(V, eos=IDEAL_GAS, check=True):
    """``a = sqrt(gamma (p + pi) / rho)`` from a primitive state."""
    V = _asarray(V)
    d = ndim_of(V.shape[0])
    return sound_speed_rp(V[IR], V[iener(d)], eos, check=check)


def sound_speed_rp(rho, p, eos=IDEAL_GAS, check=True):
    rad = eos.gamma * (p + eos.pi) / rho
    if check and np.any(~(rad > 0.0)):
        raise InadmissibleStateError("negative sound-speed radicand")
    with np.errstate(invalid="ignore"):
        return np.sqrt(rad)


def _flux_no_energy(V, axis):
    d = ndim_of(V.shape[0])
    alpha, rho, p = V[IA], V[IR], V[iener(d)]
    vel = V[imom(d)]
    un = vel[axis]
    F = np.zeros_like(V)
    arho_un = alpha * rho * un
    F[IR] = arho_un
    F[imom(d)] = arho_un * vel
    F[2 + axis] += alpha * p
    return F


def flux(Q, eos=IDEAL_GAS, axis=0, V=None):
    """Flux column along one coordinate axis."""
    Q = _asarray(Q)
    if V is None:
        V = cons_to_prim(Q, eos, check=False)
    F = _flux_no_energy(V, axis)
    d = ndim_of(Q.shape[0])
    F[iener(d)] = (Q[iener(d)] + Q[IA] * V[iener(d)]) * V[2 + axis]
    return F


def physical_flux(Q, eos=IDEAL_GAS, check=True):
    """Full flux tensor, shape ``(d, nvar, ...)``."""
    Q = _asarray(Q)
    d = ndim_of(Q.shape[0])
    V = cons_to_prim(Q, eos, check=check)
    return np.stack([flux(Q, eos, a, V) for a in range(d)])


def noncons_matrix(Q, eos=IDEAL_GAS, axis=0):
    """``B_axis`` for a single state; only the alpha column is non-zero."""
    Q = _asarray(Q)
    d = ndim_of(Q.shape[0])
    V = cons_to_prim(Q, eos)
    B = np.zeros((Q.shape[0], Q.shape[0]))
    p = V[iener(d)]
    us = V[3 + d + axis]
    B[IA, IA] = us
    B[2 + axis, IA] = -p
    B[iener(d), IA] = -p * us
    return B


def ncp(V, dalpha, axis):
    """Non-conservative product ``B_axis(Q) dQ`` given ``dQ``'s alpha entry.

    ``V`` are primitives (vectorised); ``dalpha`` broadcasts against them.
    """
    d = ndim_of(V.shape[0])
    p = V[iener(d)]
    us = V[3 + d + axis]
    shape = np.broadcast_shapes(V.shape[1:], np.shape(dalpha))
    out = np.zeros((V.shape[0],) + shape)
    out[IA] = us * dalpha
    out[2 + axis] = -p * dalpha
    out[iener(d)] = -p * us * dalpha
    return out


def _unit(n, d):
    n = np.asarray(n, dtype=float).reshape(-1)
    if n.shape[0] != d:
        raise ValueError(f"direction must have {d} components")
    if abs(np.linalg.norm(n) - 1.0) > 1e-14:
        raise ValueError("direction vector must have unit length")
    return n


def eigenvalues(Q, eos=IDEAL_GAS, n=None):
    """Sorted eigenvalues of ``A_n``; ``alpha`` plays no role."""
    Q = _asarray(Q)
    d = ndim_of(Q.shape[0])
    n = _unit(np.eye(d)[0] if n is None else n, d)
    V = cons_to_prim(Q, eos)
    a = sound_speed(V, eos)
    vn = V[imom(d)] @ n
    usn = V[isol(d)] @ n
    lam = [usn, vn - a] + [vn] * d + [vn + a] + [0.0] * d
    return np.sort(np.array(lam))


def spectral_radius(V, eos, axis):
    """Vectorised ``max |lambda|`` of ``A`` along a coordinate axis."""
    d = ndim_of(V.shape[0])
    a = sound_speed_rp(V[IR], V[iener(d)], eos, check=False)
    return np.maximum(np.abs(V[2 + axis]) + a, np.abs(V[3 + d + axis]))


def pressure_derivatives(Q, eos=IDEAL_GAS):
    """Gradient of ``p(Q)`` with respect to the conserved variables."""
    Q = _asarray(Q)
    d = ndim_of(Q.shape[0])
    V = cons_to_prim(Q, eos)
    alpha, vel, p = V[IA], V[imom(d)], V[iener(d)]
    gm1 = eos.gamma - 1.0
    dp = np.zeros_like(Q)
    dp[IA] = -(p + eos.gamma * eos.pi) / alpha
    dp[IR] = 0.5 * gm1 * np.sum(vel * vel, axis=0) / alpha
    dp[imom(d)] = -gm1 * vel / alpha
    dp[iener(d)] = gm1 / alpha
    return dp


def quasilinear_matrix(Q, eos=IDEAL_GAS, n=None):
    """Analytic ``A_n = (dF/dQ + B) . n`` for a single state."""
    Q = _asarray(Q)
    d = ndim_of(Q.shape[0])
    n = _unit(np.eye(d)[0] if n is None else n, d)
    m = Q.shape[0]
    V = cons_to_prim(Q, eos)
    alpha, vel, p, vs = V[IA], V[imom(d)], V[iener(d)], V[isol(d)]
    qE = Q[iener(d)]
    q1 = Q[IR]
    vn = vel @ n
    vsn = vs @ n
    dp = pressure_derivatives(Q, eos)
    # d(alpha p)/dQ
    dap = alpha * dp
    dap[IA] += p
    mom = list(range(2, 2 + d))
    E = iener(d)

    A = np.zeros((m, m))
    A[IA, IA] = vsn
    A[IR, mom] = n
    for b in range(d):
        row = 2 + b
        A[row, IR] = -vel[b] * vn
        A[row, mom] = vel[b] * n
        A[row, 2 + b] += vn
        A[row, :] += n[b] * dap
        A[row, IA] += -p * n[b]          # B contribution
    # energy: (qE + alpha p) vn
    H = qE + alpha * p
    A[E, :] = vn * dap
    A[E, E] += vn
    A[E, IR] += -H * vn / q1
    A[E, mom] += H * n / q1
    A[E, IA] += -p * vsn                 # B contribution
    return A


def primitive_matrix(V, eos=IDEAL_GAS, n=None):
    """Quasilinear matrix ``C_n`` of the primitive form ``V_t + C_n V_n = 0``."""
    V = _asarray(V)
    d = ndim_of(V.shape[0])
    n = _unit(np.eye(d)[0] if n is None else n, d)
    alpha, rho, vel, vs = V[IA], V[IR], V[imom(d)], V[isol(d)]
    a2 = sound_speed(V, eos) ** 2
    vn = vel @ n
    w = (vel - vs) @ n
    m = V.shape[0]
    mom = list(range(2, 2 + d))
    P = iener(d)
    C = np.zeros((m, m))
    C[IA, IA] = vs @ n
    C[IR, IA] = rho / alpha * w
    C[IR, IR] = vn
    C[IR, mom] = rho * n
    for b in range(d):
        C[2 + b, 2 + b] = vn
        C[2 + b, P] = n[b] / rho
    C[P, IA] = rho * a2 / alpha * w
    C[P, mom] = rho * a2 * n
    C[P, P] = vn
    return C


def dq_dv(V, eos=IDEAL_GAS):
    """Jacobian of ``prim_to_cons`` at ``V``."""
    V = _asarray(V)
    d = ndim_of(V.shape[0])
    alpha, rho, vel, p = V[IA], V[IR], V[imom(d)], V[iener(d)]
    g, pi = eos.gamma, eos.pi
    m = V.shape[0]
    mom = list(range(2, 2 + d))
    E = iener(d)
    J = np.zeros((m, m))
    J[IA, IA] = 1.0
    J[IR, IA] = rho
    J[IR, IR] = alpha
    for b in range(d):
        J[2 + b, IA] = rho * vel[b]
        J[2 + b, IR] = alpha * vel[b]
        J[2 + b, 2 + b] = alpha * rho
    J[E, IA] = (p + g * pi) / (g - 1.0) + 0.5 * rho * vel @ vel
    J[E, IR] = 0.5 * alpha * vel @ vel
    J[E, mom] = alpha * rho * vel
    J[E, E] = alpha / (g - 1.0)
    for b in range(d):
        J[3 + d + b, 3 + d + b] = 1.0
    return J


def right_eigenvectors(Q, eos=IDEAL_GAS, n=None):
    """Right eigenvectors of ``C_n`` in primitive variables.

    Returns ``(R, lam)`` with columns ordered as
    ``(contact at v_s.n, v.n - a, v.n [x d], v.n + a, 0 [x d])``.
    Multiply by :func:`dq_dv` for the conserved-variable form.
    """
    Q = _asarray(Q)
    d = ndim_of(Q.shape[0])
    n = _unit(np.eye(d)[0] if n is None else n, d)
    V = cons_to_prim(Q, eos)
    alpha, rho, vel, vs = V[IA], V[IR], V[imom(d)], V[isol(d)]
    a = sound_speed(V, eos)
    a2 = a * a
    w = (vel - vs) @ n
    if abs(abs(w) - a) <= RESONANCE_TOL:
        raise ResonanceError(
            f"|(v - v_s).n| = {abs(w)} is resonant with a = {a}")
    m = Q.shape[0]
    P = iener(d)
    mom = slice(2, 2 + d)
    vn = vel @ n
    R = np.zeros((m, m))
    lam = np.zeros(m)
    denom = alpha * (w * w - a2)
    # material contact, carries the jump in alpha
    R[IA, 0] = 1.0
    R[IR, 0] = -rho * w * w / denom
    R[mom, 0] = a2 * w / denom * n
    R[P, 0] = -rho * a2 * w * w / denom
    lam[0] = vs @ n
    # acoustic and entropy/shear waves
    R[IR, 1] = 1.0
    R[mom, 1] = -a / rho * n
    R[P, 1] = a2
    lam[1] = vn - a
    R[IR, 2] = 1.0
    lam[2] = vn
    if d == 2:
        R[mom, 3] = [-n[1], n[0]]
        lam[3] = vn
    col = 2 + d
    R[IR, col] = 1.0
    R[mom, col] = a / rho * n
    R[P, col] = a2
    lam[col] = vn + a
    for b in range(d):
        R[3 + d + b, 3 + d + b] = 1.0
        lam[3 + d + b] = 0.0
    return R, lam


def _frame(n):
    n = np.asarray(n, dtype=float).reshape(-1)
    if n.shape[0] == 1:
        return np.array([[n[0]]])
    if n.shape[0] != 2:
        raise ValueError("rotation only for d in {1, 2}")
    return np.array([[n[0], n[1]], [-n[1], n[0]]])


def rotate_state(Q, n):
    """Express fluid and solid velocities in the ``(n, t)`` frame."""
    Q = _asarray(Q)
    d = ndim_of(Q.shape[0])
    T = _frame(_unit(n, d))
    out = Q.copy()
    out[imom(d)] = np.tensordot(T, Q[imom(d)], axes=1)
    out[isol(d)] = np.tensordot(T, Q[isol(d)], axes=1)
    return out


def unrotate_state(Q, n):
    """Inverse of :func:`rotate_state`."""
    Q = _asarray(Q)
    d = ndim_of(Q.shape[0])
    T = _frame(_unit(n, d)).T
    out = Q.copy()
    out[imom(d)] = np.tensordot(T, Q[imom(d)], axes=1)
    out[isol(d)] = np.tensordot(T, Q[isol(d)], axes=1)
    return out
