"""Unlimited ADER-DG scheme on Cartesian meshes.

Array layout
------------
DG coefficients are nodal values at tensor Gauss-Legendre points and are
stored variables first: ``u[var, i, (j,) l1, (l2)]`` with element indices
followed by one node axis per space dimension. Space-time predictors carry
an extra time-node axis right after the variable axis:
``q[var, t, i, (j,) l1, (l2)]``.

The element update reads

    u_new = u + dt * sum_t w_t V(q_t) - dt * sum_a (faces along a) / h_a

with the weak-form flux divergence and the strong-form non-conservative
product in ``V`` and path-conservative Rusanov fluctuations on the faces.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import model
from .boundary import ghost_trace
from .errors import SolverAbort
from .grid import lagrange_values, nodal_basis

PICARD_TOL = 1e-11
BLOCK = 40  # target number of elements per work block (cache sized)
PATH_NODES, PATH_WEIGHTS = np.polynomial.legendre.leggauss(3)
PATH_NODES = 0.5 * (PATH_NODES + 1.0)
PATH_WEIGHTS = 0.5 * PATH_WEIGHTS


@dataclass
class DGField:
    """Nodal DG solution plus the limiter state carried between steps.

    ``subcell`` holds FV subcell averages ``(nvar, *counts, *(2N+1,)*d)``;
    they are meaningful where ``sub_valid`` is set, i.e. for elements that
    were evolved by the subcell scheme in the last step.
    """

    u: np.ndarray
    t: float
    mesh: object
    N: int
    eos: model.EosParams = model.IDEAL_GAS
    status: np.ndarray = None
    subcell: np.ndarray = None
    sub_valid: np.ndarray = None
    bc_states: dict = field(default_factory=dict)

    def __post_init__(self):
        counts = self.mesh.counts
        n_sub = 2 * self.N + 1
        if self.status is None:
            self.status = np.zeros(counts, dtype=np.int8)
        if self.sub_valid is None:
            self.sub_valid = np.zeros(counts, dtype=bool)
        if self.subcell is None:
            self.subcell = np.zeros((self.u.shape[0],) + tuple(counts) + (n_sub,) * self.mesh.ndim)

    @property
    def ndim(self):
        return self.mesh.ndim

    @property
    def basis(self):
        return nodal_basis(self.N)

    def copy(self):
        return replace(self, u=self.u.copy(), status=self.status.copy(),
                       subcell=self.subcell.copy(), sub_valid=self.sub_valid.copy())


class DGOperators:
    """Reference-element matrices for degree ``N`` in ``d`` dimensions."""

    def __init__(self, N, d):
        b = nodal_basis(N)
        self.N, self.d, self.n = N, d, b.size
        self.basis = b
        self.w = b.weights
        self.dmat = b.dmat
        # time: K1[k, l] = psi_k(1) psi_l(1) - w_l psi_k'(tau_l)
        K1 = np.outer(b.right, b.right) - (b.dmat * b.weights[:, None]).T
        self.time_mat = np.linalg.solve(K1, np.diag(b.weights))
        # weak-form stiffness Kxi[k, m] = w_m phi_k'(xi_m) / w_k
        self.kxi = (b.dmat * b.weights[:, None]).T / b.weights[:, None]
        self.lift_right = b.right / b.weights
        self.lift_left = b.left / b.weights


@lru_cache(maxsize=None)
def dg_operators(N, d):
    return DGOperators(N, d)


@lru_cache(maxsize=64)
def _node_matrix(key, n, axis, d):
    M = np.frombuffer(key).reshape(n, n)
    eye = np.eye(n)
    mats = [M if a == axis else eye for a in range(d)]
    K = mats[0]
    for m in mats[1:]:
        K = np.kron(K, m)
    return np.ascontiguousarray(K.T)


def apply_nodes(X, M, axis, d):
    """Apply ``M`` along spatial node axis ``axis`` (nodes are trailing).

    The node axes are flattened and hit with one Kronecker-expanded matrix,
    a single large product instead of many tiny ones.
    """
    n = M.shape[0]
    K = _node_matrix(np.ascontiguousarray(M, dtype=float).tobytes(), n, axis, d)
    return (X.reshape(-1, n ** d) @ K).reshape(X.shape)


def trace(X, vec, axis, d):
    """Contract node axis ``axis`` with ``vec`` (drops that axis)."""
    if axis == d - 1:
        return X @ vec
    return np.tensordot(X, vec, axes=([X.ndim - 2], [0]))


def _time_apply(M, S):
    shape = S.shape
    return (M @ S.reshape(shape[0], shape[1], -1)).reshape(shape)


def _elem_axes(d):
    return tuple(range(-d, 0))


def space_operator(q, eos, inv_h, d, dmat):
    """``-sum_a (dF_a/dx_a + B_a dq/dx_a)`` at the nodes, strong form."""
    V = model.cons_to_prim(q, eos, check=False)
    S = np.zeros_like(q)
    for a in range(d):
        F = model.flux(q, eos, a, V)
        dal = apply_nodes(q[model.IA], dmat, a, d)
        S -= inv_h[a] * (apply_nodes(F, dmat, a, d) + model.ncp(V, dal, a))
    return S


def _predict_block(u, dt, ops, eos, inv_h):
    d, N = ops.d, ops.N
    nt = ops.n
    el_shape = u.shape[1:1 + d]
    nel = int(np.prod(el_shape, dtype=int))
    # elements flattened to one axis; each sweep only touches active ones
    u = u.reshape((u.shape[0], nel) + u.shape[1 + d:])
    q0 = np.broadcast_to(u[:, None], (u.shape[0], nt) + u.shape[1:])
    q = np.array(q0)
    idx = np.arange(nel)
    res = np.full(nel, np.inf)
    first = None
    node_axes = (0, 1) + tuple(range(3, 3 + d))
    with np.errstate(all="ignore"):
        for _ in range(N + 2):
            qa = q[:, :, idx]
            S = space_operator(qa, eos, inv_h, d, ops.dmat)
            qn = q0[:, :, idx] + dt * _time_apply(ops.time_mat, S)
            change = np.max(np.abs(qn - qa), axis=node_axes)
            change = np.where(np.isfinite(change), change, np.inf)
            q[:, :, idx] = qn
            res[idx] = change
            if first is None:
                first = change
            idx = idx[~(change < PICARD_TOL)]
            if idx.size == 0:
                break
        finite = np.all(np.isfinite(q), axis=node_axes)
    failed = ~finite | (res > np.maximum(first, PICARD_TOL))
    q = q.reshape(q.shape[:2] + el_shape + q.shape[3:])
    return q, failed.reshape(el_shape)


def _blocks(counts):
    """Slices along x holding about ``BLOCK`` elements each."""
    nx = counts[0]
    step = max(1, BLOCK // int(np.prod(counts[1:], dtype=int)))
    return [slice(s, min(s + step, nx)) for s in range(0, nx, step)]


def _map_blocks(fn, counts, workers):
    blocks = _blocks(counts)
    if workers is None or workers <= 1 or len(blocks) == 1:
        return [fn(b) for b in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, blocks))


def local_predictor(u, dt, eos, mesh, N, workers=1):
    """Space-time predictor for every element.

    Returns ``(q, failed)``; ``failed`` marks elements whose Picard iteration
    produced non-finite values or diverged. Each element's result depends
    only on its own data, whatever the block split or worker count.
    """
    d = mesh.ndim
    ops = dg_operators(N, d)
    inv_h = [1.0 / h for h in mesh.spacing]
    out = _map_blocks(lambda b: _predict_block(u[:, b], dt, ops, eos, inv_h),
                      mesh.counts, workers)
    q = np.concatenate([o[0] for o in out], axis=2)
    failed = np.concatenate([o[1] for o in out], axis=0)
    return q, failed


def path_terms(qm, qp, axis, eos):
    """Rusanov flux and path term for faces with normal ``+e_axis``.

    Returns ``(Fhat, P)`` with ``Fhat = (F(qm) + F(qp))/2 - s (qp - qm)/2``
    and ``P = (int_0^1 B(Psi) ds) (qp - qm) / 2`` on the segment path. The
    two one-sided fluctuations are ``Fhat + P`` (minus side) and
    ``-Fhat + P`` (plus side).
    """
    d = model.ndim_of(qm.shape[0])
    with np.errstate(all="ignore"):
        Vm = model.cons_to_prim(qm, eos, check=False)
        Vp = model.cons_to_prim(qp, eos, check=False)
        s = np.maximum(model.spectral_radius(Vm, eos, axis),
                       model.spectral_radius(Vp, eos, axis))
        dq = qp - qm
        Fhat = 0.5 * (model.flux(qm, eos, axis, Vm) + model.flux(qp, eos, axis, Vp)) - 0.5 * s * dq
        pbar = np.zeros_like(qm[0])
        pus = np.zeros_like(qm[0])
        for sn, sw in zip(PATH_NODES, PATH_WEIGHTS):
            Vs = model.cons_to_prim(qm + sn * dq, eos, check=False)
            p = Vs[model.iener(d)]
            pbar += sw * p
            pus += sw * p * Vs[3 + d + axis]
        usbar = 0.5 * (qm[3 + d + axis] + qp[3 + d + axis])
        P = np.zeros_like(qm)
        dal = 0.5 * dq[model.IA]
        P[model.IA] = usbar * dal
        P[2 + axis] = -pbar * dal
        P[model.iener(d)] = -pus * dal
    return Fhat, P


def pc_rusanov_jump(q_minus, q_plus, n, eos=model.IDEAL_GAS):
    """One-sided fluctuation ``D(q-, q+) . n`` for an arbitrary unit normal."""
    qm = np.asarray(q_minus, dtype=float)
    qp = np.asarray(q_plus, dtype=float)
    d = model.ndim_of(qm.shape[0])
    n = model._unit(n, d)
    Vm = model.cons_to_prim(qm, eos)
    Vp = model.cons_to_prim(qp, eos)

    def radius(V):
        a = model.sound_speed(V, eos)
        return max(abs(V[model.imom(d)] @ n) + a, abs(V[model.isol(d)] @ n))

    s = max(radius(Vm), radius(Vp))
    Fm = model.physical_flux(qm, eos)
    Fp = model.physical_flux(qp, eos)
    dq = qp - qm
    Bn = np.zeros(qm.shape[0])
    for sn, sw in zip(PATH_NODES, PATH_WEIGHTS):
        Vs = model.cons_to_prim(qm + sn * dq, eos)
        p = Vs[model.iener(d)]
        usn = Vs[model.isol(d)] @ n
        Bn[model.IA] += sw * usn
        Bn[model.imom(d)] += sw * (-p) * n
        Bn[model.iener(d)] += sw * (-p * usn)
    return 0.5 * np.tensordot(n, Fm + Fp, axes=1) - 0.5 * s * dq + 0.5 * Bn * dq[model.IA]


def face_traces(q, axis, d, ops):
    """Traces of every element on its low and high face along ``axis``."""
    lo = trace(q, ops.basis.left, axis, d)
    hi = trace(q, ops.basis.right, axis, d)
    return lo, hi


def face_states(lo, hi, mesh, axis, bc_states, lead=1):
    """Minus/plus states on all ``counts[axis] + 1`` faces along ``axis``.

    ``lo``/``hi`` have element axes starting at ``lead``.
    """
    ax = lead + axis
    n = lo.shape[ax]
    tags = mesh.bcs[axis]
    first_lo = np.take(lo, [0], axis=ax)
    last_hi = np.take(hi, [n - 1], axis=ax)
    g_lo = ghost_trace(first_lo, last_hi, tags[0], axis, 0, bc_states)
    g_hi = ghost_trace(last_hi, first_lo, tags[1], axis, 1, bc_states)
    qm = np.concatenate([g_lo, hi], axis=ax)
    qp = np.concatenate([lo, g_hi], axis=ax)
    return qm, qp


@dataclass
class CorrectorParts:
    """Pieces of the DG update kept so faces can be patched by the limiter.

    ``dm[a]``/``dp[a]`` are time-averaged one-sided fluctuations on the
    ``counts[a] + 1`` faces along axis ``a``; element ``i`` uses ``dm[a][i+1]``
    on its high face and ``dp[a][i]`` on its low face. ``qm[a]``/``qp[a]``
    are the predictor traces on those faces (time nodes on axis 1) and
    ``wt`` the time quadrature weights.
    """

    base: np.ndarray
    dm: list
    dp: list
    dt: float
    qm: list = None
    qp: list = None
    wt: np.ndarray = None


def _volume_block(q, ops, eos, inv_h):
    d = ops.d
    with np.errstate(all="ignore"):
        V = model.cons_to_prim(q, eos, check=False)
        vol = np.zeros_like(q)
        for a in range(d):
            F = model.flux(q, eos, a, V)
            dal = apply_nodes(q[model.IA], ops.dmat, a, d)
            vol += inv_h[a] * (apply_nodes(F, ops.kxi, a, d) - model.ncp(V, dal, a))
    return np.tensordot(ops.w, vol, axes=([0], [1]))


def corrector_parts(field, q, dt, workers=1):
    """Volume part and face fluctuations of the ADER-DG update."""
    mesh, eos, d = field.mesh, field.eos, field.ndim
    ops = dg_operators(field.N, d)
    inv_h = [1.0 / h for h in mesh.spacing]
    vols = _map_blocks(lambda b: _volume_block(q[:, :, b], ops, eos, inv_h),
                       mesh.counts, workers)
    base = field.u + dt * np.concatenate(vols, axis=1)
    dm, dp, qms, qps = [], [], [], []
    for a in range(d):
        lo, hi = face_traces(q, a, d, ops)
        qm, qp = face_states(lo, hi, mesh, a, field.bc_states, lead=2)
        Fhat, P = path_terms(qm, qp, a, eos)
        Fhat = np.tensordot(ops.w, Fhat, axes=([0], [1]))
        P = np.tensordot(ops.w, P, axes=([0], [1]))
        dm.append(Fhat + P)
        dp.append(P - Fhat)
        qms.append(qm)
        qps.append(qp)
    return CorrectorParts(base, dm, dp, dt, qms, qps, ops.w)


def apply_face_terms(parts, mesh, N):
    """``base - dt * sum_a (lifted face fluctuations) / h_a``."""
    d = mesh.ndim
    ops = dg_operators(N, d)
    out = parts.base.copy()
    for a in range(d):
        n = mesh.counts[a]
        ax = 1 + a
        hi_face = np.take(parts.dm[a], np.arange(1, n + 1), axis=ax)
        lo_face = np.take(parts.dp[a], np.arange(n), axis=ax)
        # insert the node axis for direction a
        node_ax = 1 + d + a
        hi_face = np.expand_dims(hi_face, node_ax)
        lo_face = np.expand_dims(lo_face, node_ax)
        shape = [1] * d
        shape[a] = ops.n
        lr = ops.lift_right.reshape(shape)
        ll = ops.lift_left.reshape(shape)
        out -= parts.dt / mesh.spacing[a] * (lr * hi_face + ll * lo_face)
    return out


def dg_corrector_step(field, q, dt, workers=1):
    """Candidate field after one unlimited ADER-DG step."""
    parts = corrector_parts(field, q, dt, workers)
    cand = field.copy()
    cand.u = apply_face_terms(parts, field.mesh, field.N)
    cand.t = field.t + dt
    return cand


def max_wave_speed(field):
    """Largest nodal spectral radius over all elements and axes.

    Elements that were evolved on subcells in the last step are represented
    by their stored averages, so those give the speed there; the polynomial
    rebuilt from them overshoots at shocks and is ignored. A non-finite speed
    aborts the run.
    """
    d = field.ndim
    with np.errstate(all="ignore"):
        V = model.cons_to_prim(field.u, field.eos, check=False)
        lam = np.max([model.spectral_radius(V, field.eos, a) for a in range(d)], axis=0)
    lam_el = lam.reshape(lam.shape[:d] + (-1,))
    bad = ~np.all(np.isfinite(lam_el), axis=-1)
    lam_el = np.where(np.isfinite(lam_el), lam_el, -np.inf).max(axis=-1)
    if field.sub_valid.any():
        with np.errstate(all="ignore"):
            W = model.cons_to_prim(field.subcell, field.eos, check=False)
            ls = np.max([model.spectral_radius(W, field.eos, a) for a in range(d)], axis=0)
        ls = ls.reshape(ls.shape[:d] + (-1,))
        sub_bad = ~np.all(np.isfinite(ls), axis=-1) & field.sub_valid
        ls = np.where(np.isfinite(ls), ls, -np.inf).max(axis=-1)
        lam_el = np.where(field.sub_valid, ls, lam_el)
        bad = (bad & ~field.sub_valid) | sub_bad
    if bad.any():
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise SolverAbort(f"non-finite wave speed in element {idx}", element=idx,
                          state=field.u[(slice(None),) + idx])
    return float(lam_el.max())


def default_cfl(N):
    """Largest safe default CFL number for degree ``N``.

    A component with zero wave speed (``v_s``, or ``alpha`` next to a
    resting solid) still receives Rusanov dissipation; for it the one-step
    update is a forward-Euler step of the jump penalty, which is stable only
    for ``CFL <= 2 (2N + 1) / ((N + 1) (N + 2))``. The default keeps a 10 %
    margin below that bound and never exceeds 0.9.
    """
    return min(0.9, 0.9 * 2.0 * (2 * N + 1) / ((N + 1) * (N + 2)))


def compute_dt(field, cfl=None):
    """``cfl * h_min / (d (2N + 1) lambda_max)``.

    ``cfl=None`` selects :func:`default_cfl`.
    """
    if cfl is None:
        cfl = default_cfl(field.N)
    lam = max_wave_speed(field)
    if not lam > 0:
        raise SolverAbort("zero wave speed: time step undefined")
    return cfl * field.mesh.h_min / (field.ndim * (2 * field.N + 1) * lam)


def eval_points(field, points_ref):
    """Evaluate all element polynomials at reference points.

    ``points_ref`` is a list with one 1D array of reference coordinates per
    axis; output has shape ``(nvar, *counts, *[len(p) for p in points_ref])``.
    """
    b = field.basis
    out = field.u
    d = field.ndim
    for a in range(d):
        L = lagrange_values(b.nodes, points_ref[a])
        out = np.moveaxis(np.tensordot(out, L, axes=([1 + d + a], [1])), -1, 1 + d + a)
    return out
