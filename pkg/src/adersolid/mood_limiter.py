"""A-posteriori subcell limiting (MOOD) for the ADER-DG candidate.

Each element carries ``N_w = 2N + 1`` subcells per axis. A candidate that
fails the physical checks or the relaxed discrete maximum principle is
discarded and the element is re-evolved from the old time level with a
second-order MUSCL-Hancock scheme on its subcells. Non-troubled elements
sharing a face with a troubled one take that face's fluctuation from the
subcell scheme so the update stays conservative.

Subcell arrays follow the DG layout with subcell axes in place of the node
axes: ``v[var, i, (j,) s1, (s2)]``.
"""
import logging
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache

import numpy as np

from . import model
from .ader_dg import apply_face_terms, path_terms
from .boundary import pad_mask, pad_subcells
from .grid import gl_nodes_weights, lagrange_values, nodal_basis

log = logging.getLogger(__name__)

DMP_DELTA0 = 1e-4
DMP_EPS_REL = 1e-3
P_FLOOR = 1e-12
ALPHA_FLOOR = 1e-12


class Status(IntEnum):
    UNLIMITED = 0
    TROUBLED = 1
    NEIGHBOR = 2


class SubcellOps:
    """Projection and reconstruction matrices between nodes and subcells."""

    def __init__(self, N, d):
        b = nodal_basis(N)
        self.N, self.d = N, d
        self.n_sub = 2 * N + 1
        self.n = b.size
        # 1D projection P1[s, l] = N_w * int_{omega_s} phi_l, exact by GL
        xq, wq = gl_nodes_weights(N + 1)
        P1 = np.zeros((self.n_sub, self.n))
        for s in range(self.n_sub):
            x = (s + xq) / self.n_sub
            P1[s] = wq @ lagrange_values(b.nodes, x)
        self.P1 = P1
        P, W = P1, b.weights
        for _ in range(d - 1):
            P = np.kron(P, P1)
            W = np.kron(W, b.weights)
        self.P = P
        self.W = W
        self.R = self._constrained_lsq(P, W)
        # node values of a piecewise-constant face fluctuation
        self.face_to_nodes = (P1 / (self.n_sub * b.weights[None, :])).T

    @staticmethod
    def _constrained_lsq(P, W):
        """Operator of ``min |P c - v|`` subject to ``W . c = mean(v)``."""
        m, n = P.shape
        K = np.zeros((n + 1, n + 1))
        K[:n, :n] = P.T @ P
        K[:n, n] = W
        K[n, :n] = W
        rhs = np.zeros((n + 1, m))
        rhs[:n] = P.T
        rhs[n] = 1.0 / m
        return np.linalg.solve(K, rhs)[:n]


@lru_cache(maxsize=None)
def subcell_ops(N, d):
    return SubcellOps(N, d)


def _flat_apply(X, M, d, n_in, n_out):
    lead = X.shape[:X.ndim - d]
    Y = X.reshape(lead + (n_in ** d,)) @ M.T
    return Y.reshape(lead + (n_out,) * d)


def project_to_subcells(u, N, d):
    """Exact subcell averages of nodal polynomials (trailing node axes)."""
    ops = subcell_ops(N, d)
    return _flat_apply(u, ops.P, d, ops.n, ops.n_sub)


def reconstruct_from_subcells(v, N, d):
    """Conservative least-squares polynomial from subcell averages."""
    ops = subcell_ops(N, d)
    return _flat_apply(v, ops.R, d, ops.n_sub, ops.n)


def _admissible_points(Q, eos, d):
    """Per-point admissibility of conserved states (variables on axis 0)."""
    with np.errstate(all="ignore"):
        V = model.cons_to_prim(Q, eos, check=False)
        ok = np.all(np.isfinite(Q), axis=0)
        ok &= (Q[model.IA] > 0.0) & (Q[model.IA] < 1.0)
        ok &= Q[model.IR] > 0.0
        ok &= V[model.iener(d)] + eos.pi > 0.0
    return ok


def admissibility_check(u, eos, N, d):
    """Per-element verdict for nodal data ``u[var, *elements, *nodes]``.

    Returns ``(ok, reason)``; the checks cover the GL nodes and the subcell
    averages. ``reason`` is ``""`` where ``ok``, otherwise the first failed
    criterion ("non-finite", "volume fraction", "density", "pressure").
    """
    sub = project_to_subcells(u, N, d)
    el_axes = tuple(range(u.ndim - 1 - d, u.ndim - 1))
    reason = np.full(u.shape[1:u.ndim - d], "", dtype=object)
    ok = np.ones(reason.shape, dtype=bool)
    with np.errstate(all="ignore"):
        for data in (u, sub):
            V = model.cons_to_prim(data, eos, check=False)
            tests = [
                ("non-finite", np.all(np.isfinite(data), axis=0)),
                ("volume fraction", (data[model.IA] > 0.0) & (data[model.IA] < 1.0)),
                ("density", data[model.IR] > 0.0),
                ("pressure", V[model.iener(d)] + eos.pi > 0.0),
            ]
            for name, good in tests:
                good = np.all(good, axis=el_axes)
                newly = ok & ~good
                reason[newly] = name
                ok &= good
    return ok, reason


def field_admissible(field):
    """Per-element admissibility of the current representation.

    Elements held on subcells are judged by their stored averages, all
    others by :func:`admissibility_check` on the polynomial.
    """
    d = field.ndim
    ok, _ = admissibility_check(field.u, field.eos, field.N, d)
    if field.sub_valid.any():
        sub = _admissible_points(field.subcell, field.eos, d)
        sub = np.all(sub, axis=tuple(range(d, 2 * d)))
        ok = np.where(field.sub_valid, sub, ok)
    return ok


def dmp_bounds(prev_sub, mesh, d):
    """Moore-neighbourhood ``(min, max)`` of the monitored components."""
    comps = [model.IA, model.IR, model.iener(d)]
    data = prev_sub[comps]
    sub_axes = tuple(range(1 + d, 1 + 2 * d))
    lo = np.min(data, axis=sub_axes)
    hi = np.max(data, axis=sub_axes)
    for a in range(d):
        ax = 1 + a
        mode = "wrap" if mesh.is_periodic(a) else "edge"
        pad = [(0, 0)] * lo.ndim
        pad[ax] = (1, 1)
        lp = np.pad(lo, pad, mode=mode)
        hp = np.pad(hi, pad, mode=mode)
        n = lo.shape[ax]
        sl = [np.take(lp, np.arange(k, k + n), axis=ax) for k in range(3)]
        sh = [np.take(hp, np.arange(k, k + n), axis=ax) for k in range(3)]
        lo = np.minimum(np.minimum(sl[0], sl[1]), sl[2])
        hi = np.maximum(np.maximum(sh[0], sh[1]), sh[2])
    return lo, hi


def dmp_check(cand_sub, lo, hi, d, delta0=DMP_DELTA0, eps_rel=DMP_EPS_REL):
    """Relaxed maximum principle on candidate subcell averages.

    ``lo``/``hi`` are the neighbourhood bounds of (alpha, alpha rho,
    alpha rho E) from :func:`dmp_bounds`. Returns a per-element boolean.
    """
    comps = [model.IA, model.IR, model.iener(d)]
    v = cand_sub[comps]
    delta = np.maximum(delta0, eps_rel * (hi - lo))
    exp = (Ellipsis,) + (None,) * d
    with np.errstate(invalid="ignore"):
        ok = (v >= (lo - delta)[exp]) & (v <= (hi + delta)[exp])
    sub_axes = (0,) + tuple(range(1 + d, 1 + 2 * d))
    return np.all(ok, axis=sub_axes)


def minmod(a, b):
    return np.where(a * b > 0.0, np.where(np.abs(a) < np.abs(b), a, b), 0.0)


def global_subcells(sub, d):
    """Element-blocked subcells ``(var, i, j, s1, s2)`` to a global grid."""
    if d == 1:
        return sub.reshape(sub.shape[0], -1)
    nv, nx, ny, m, _ = sub.shape
    return sub.transpose(0, 1, 3, 2, 4).reshape(nv, nx * m, ny * m)


def blocked_subcells(G, counts, m):
    """Inverse of :func:`global_subcells`."""
    if len(counts) == 1:
        return G.reshape(G.shape[0], counts[0], m)
    nv = G.shape[0]
    return G.reshape(nv, counts[0], m, counts[1], m).transpose(0, 1, 3, 2, 4)


@dataclass
class FVResult:
    """Subcell evolution of a set of elements.

    ``new`` holds the evolved averages ``(var, k, *(N_w,)*d)`` of the listed
    elements. ``face_dm[a]``/``face_dp[a]`` are the one-sided fluctuations on
    the element's low (index 0) and high (index 1) faces along ``a``, shape
    ``(var, k, 2[, N_w])``; ``face_out[a]`` holds the half-step states on the
    outer side of those faces, same shape.
    """

    new: np.ndarray
    face_dm: list
    face_dp: list
    face_out: list = None


def _patch_indices(elems, m, d, width=2):
    size = m + 2 * width
    idx = []
    for a in range(d):
        start = elems[:, a] * m
        idx.append(start[:, None] + np.arange(size)[None, :])
    if d == 1:
        return (idx[0],)
    return (idx[0][:, :, None], idx[1][:, None, :])


def subcell_fv_step(Gpad, mask_pad, elems, dt, mesh, N, eos):
    """MUSCL-Hancock update of the subcells of ``elems`` (k x d indices).

    ``Gpad`` is the global subcell array with two ghost layers and
    ``mask_pad`` the matching slope mask (0 gives first order). Face
    fluctuations only depend on the two adjacent cells, so neighbouring
    patches see identical values on shared faces.
    """
    d = mesh.ndim
    m = 2 * N + 1
    hs = [h / m for h in mesh.spacing]
    ix = _patch_indices(elems, m, d)
    Q = Gpad[(slice(None),) + ix]           # (var, k, m+4[, m+4])
    mask = mask_pad[ix]
    nvar = Q.shape[0]
    size = m + 4
    with np.errstate(all="ignore"):
        W = model.cons_to_prim(Q, eos, check=False)
        slopes = []
        for a in range(d):
            ax = 2 + a
            lft = np.diff(W, axis=ax)
            sl = minmod(np.take(lft, np.arange(0, size - 2), axis=ax),
                        np.take(lft, np.arange(1, size - 1), axis=ax))
            zero = np.zeros_like(np.take(W, [0], axis=ax))
            sl = np.concatenate([zero, sl, zero], axis=ax) * mask[None]
            slopes.append(sl)
        Qm = [model.prim_to_cons(W - 0.5 * s, eos, check=False) for s in slopes]
        Qp = [model.prim_to_cons(W + 0.5 * s, eos, check=False) for s in slopes]
        dQ = np.zeros_like(Q)
        for a in range(d):
            dF = model.flux(Qp[a], eos, a) - model.flux(Qm[a], eos, a)
            dal = Qp[a][model.IA] - Qm[a][model.IA]
            dQ -= (0.5 * dt / hs[a]) * (dF + model.ncp(W, dal, a))
        Vh = model.cons_to_prim(Q + dQ, eos, check=False)
        upd = np.zeros_like(Q)
        inner = slice(2, 2 + m)
        face_dm, face_dp, face_out = [], [], []
        for a in range(d):
            ax = 2 + a
            qm = np.take(Qp[a] + dQ, np.arange(1, m + 2), axis=ax)
            qp = np.take(Qm[a] + dQ, np.arange(2, m + 3), axis=ax)
            Fhat, P = path_terms(qm, qp, a, eos)
            Dm, Dp = Fhat + P, P - Fhat
            hi_face = np.take(Dm, np.arange(1, m + 1), axis=ax)
            lo_face = np.take(Dp, np.arange(0, m), axis=ax)
            full = [slice(None)] * upd.ndim
            full[ax] = inner
            dal = np.take(Qp[a] - Qm[a], np.arange(2, 2 + m), axis=ax)[model.IA]
            vol = model.ncp(np.take(Vh, np.arange(2, 2 + m), axis=ax), dal, a)
            upd[tuple(full)] -= (dt / hs[a]) * (hi_face + lo_face + vol)
            # element faces, restricted to interior transverse cells
            outer = np.concatenate([np.take(qm, [0], axis=ax), np.take(qp, [m], axis=ax)], axis=ax)
            ends = np.take(Dm, [0, m], axis=ax), np.take(Dp, [0, m], axis=ax), outer
            if d == 2:
                t_ax = 2 + (1 - a)
                ends = tuple(np.take(e, np.arange(2, 2 + m), axis=t_ax) for e in ends)
                ends = tuple(np.moveaxis(e, ax, 2) for e in ends)
            face_dm.append(ends[0])
            face_dp.append(ends[1])
            face_out.append(ends[2])
    sl = (slice(None), slice(None)) + (slice(2, 2 + m),) * d
    new = (Q + upd)[sl]
    return FVResult(new.reshape((nvar, len(elems)) + (m,) * d), face_dm, face_dp, face_out)


def fv_start_data(field):
    """Subcell data at the old time level and where it came from.

    Elements evolved on subcells in the last step start from their stored
    averages; all others from the projection of their polynomial. Returns
    ``(sub, from_store)``.
    """
    d = field.ndim
    sub = project_to_subcells(field.u, field.N, d)
    store = field.sub_valid
    sel = store.reshape(store.shape + (1,) * d)
    sub = np.where(sel[None], field.subcell, sub)
    return sub, store.copy()


def scale_to_mean(sub, eos, d, levels=12):
    """Pull inadmissible subcell data towards the element mean.

    Each element whose subcells fail the physical checks is replaced by
    ``mean + theta (v - mean)`` with the largest ``theta = 2**-k`` that makes
    every subcell admissible. Element means are unchanged, so the repair is
    conservative. Elements whose mean is itself inadmissible are left alone.
    Returns the repaired array and the number of touched elements.
    """
    sub_axes = tuple(range(sub.ndim - d, sub.ndim))
    el_shape = sub.shape[1:sub.ndim - d]

    def verdict(v):
        ok = _admissible_points(v, eos, d)
        return np.all(ok, axis=tuple(a - 1 for a in sub_axes))

    bad = ~verdict(sub)
    if not bad.any():
        return sub, 0
    mean = sub.mean(axis=sub_axes, keepdims=True)
    fix = bad & verdict(mean)
    if not fix.any():
        return sub, 0
    theta = np.zeros(el_shape)
    pending = fix.copy()
    for k in range(levels):
        th = 0.5 ** k
        trial = mean + th * (sub - mean)
        hit = pending & verdict(trial)
        theta[hit] = th
        pending &= ~hit
    th = theta.reshape((1,) + el_shape + (1,) * d)
    repaired = mean + th * (sub - mean)
    sel = fix.reshape((1,) + el_shape + (1,) * d)
    return np.where(sel, repaired, sub), int(fix.sum())


def _face_neighbors(troubled, mesh):
    d = mesh.ndim
    nb = np.zeros_like(troubled)
    for a in range(d):
        for shift in (1, -1):
            rolled = np.roll(troubled, shift, axis=a)
            if not mesh.is_periodic(a):
                edge = [slice(None)] * d
                edge[a] = 0 if shift == 1 else -1
                rolled[tuple(edge)] = False
            nb |= rolled
    return nb & ~troubled


def _trace_jump(q_from, q_to, wt, axis, eos):
    """Time average of ``int B dq`` along the segment between two states.

    One end may carry a time-node axis (axis 1), the other is broadcast.
    """
    shape = np.broadcast_shapes(np.shape(q_from), np.shape(q_to))
    _, P = path_terms(np.broadcast_to(q_from, shape), np.broadcast_to(q_to, shape), axis, eos)
    return 2.0 * np.tensordot(wt, P, axes=([0], [1]))


def _patch_faces(parts, res, elems, troubled, mesh, N, eos):
    """Overwrite DG face slots of non-troubled neighbours with FV values.

    The neighbour keeps the subcell flux, so the update stays conservative,
    and adds the path jump between the subcell face state and its own
    predictor trace. Its weak-form flux and strong-form non-conservative
    product then see one consistent path from the subcell state to its
    trace, which keeps a contact at rest in pressure and velocity.
    """
    d = mesh.ndim
    ops = subcell_ops(N, d)
    for a in range(d):
        n = mesh.counts[a]
        for side in (0, 1):
            nb = elems.copy()
            nb[:, a] += 1 if side else -1
            keep = (nb[:, a] >= 0) & (nb[:, a] < n)
            if mesh.is_periodic(a):
                nb[:, a] %= n
                keep[:] = True
            keep[keep] = ~troubled[tuple(nb[keep].T)]
            if not keep.any():
                continue
            ks, nb = np.flatnonzero(keep), nb[keep]
            outer = res.face_out[a][:, ks, side]
            if side == 0:
                # neighbour below uses dm on its high face
                nb[:, a] += 1
                vals = res.face_dm[a][:, ks, 0]
                target, traces = parts.dm[a], parts.qm[a]
            else:
                vals = res.face_dp[a][:, ks, 1]
                target, traces = parts.dp[a], parts.qp[a]
            if d == 2:
                vals = vals @ ops.face_to_nodes.T
                outer = outer @ ops.face_to_nodes.T
            idx = tuple(nb.T)
            own = traces[(slice(None), slice(None)) + idx]
            outer = outer[:, None]
            if side == 0:
                vals = vals + _trace_jump(own, outer, parts.wt, a, eos)
            else:
                vals = vals + _trace_jump(outer, own, parts.wt, a, eos)
            target[(slice(None),) + idx] = vals


def _fv_admissible(new, eos, d):
    ok = _admissible_points(new, eos, d)
    return np.all(ok.reshape(ok.shape[0], -1), axis=1)


def _clamp_state(new, eos, d):
    """Last-resort repair: pressure floor and volume fraction inside (0, 1).

    Only ``alpha`` and the energy change, so mass and momentum stay
    conserved. Returns the repaired array and the number of touched points.
    """
    with np.errstate(all="ignore"):
        V = model.cons_to_prim(new, eos, check=False)
        ie = model.iener(d)
        bad_p = ~(V[ie] + eos.pi > 0.0)
        a = new[model.IA]
        bad_a = ~((a > 0.0) & (a < 1.0))
        bad = (bad_p | bad_a) & np.all(np.isfinite(new), axis=0)
        if bad.any():
            V[model.IA] = np.clip(a, ALPHA_FLOOR, 1.0 - ALPHA_FLOOR)
            V[model.IR] = new[model.IR] / V[model.IA]
            V[ie] = np.where(bad_p, P_FLOOR - eos.pi, V[ie])
            fixed = model.prim_to_cons(V, eos, check=False)
            new = np.where(bad[None], fixed, new)
    return new, int(bad.sum())


def mood_step(field, cand, parts, dt, pred_failed=None, force_troubled=None,
              delta0=DMP_DELTA0, eps_rel=DMP_EPS_REL, stats=None):
    """Accept or recompute the candidate element by element.

    ``parts`` are the :class:`~adersolid.ader_dg.CorrectorParts` that produced
    ``cand``; their face slots are patched for the mixed DG/FV faces. The
    returned field carries the limiter map in ``status`` and the subcell
    averages of troubled elements in ``subcell``.
    """
    mesh, eos, N, d = field.mesh, field.eos, field.N, field.ndim
    m = 2 * N + 1
    start, _ = fv_start_data(field)
    start, nfix = scale_to_mean(start, eos, d)
    if nfix:
        log.info("start data of %d elements scaled to their mean at t=%.6g", nfix, field.t)
        if stats is not None:
            stats["scaled"] = stats.get("scaled", 0) + nfix
    ok, _ = admissibility_check(cand.u, eos, N, d)
    cand_sub = project_to_subcells(cand.u, N, d)
    lo, hi = dmp_bounds(start, mesh, d)
    ok &= dmp_check(cand_sub, lo, hi, d, delta0, eps_rel)
    troubled = ~ok
    if pred_failed is not None:
        troubled |= pred_failed
    if force_troubled is not None:
        troubled |= force_troubled
    out = cand.copy()
    out.status[...] = Status.UNLIMITED
    out.sub_valid[...] = False
    if not troubled.any():
        return out
    elems = np.argwhere(troubled)
    Gpad = pad_subcells(global_subcells(start, d), mesh, field.bc_states)
    mask = np.ones(Gpad.shape[1:])
    mask_el = np.ones(troubled.shape + (m,) * d)
    res = subcell_fv_step(Gpad, mask, elems, dt, mesh, N, eos)
    good = _fv_admissible(res.new, eos, d)
    if not good.all():
        for e in elems[~good]:
            mask_el[tuple(e)] = 0.0
        mask = pad_mask(global_subcells(mask_el[None], d)[0], mesh)
        res = subcell_fv_step(Gpad, mask, elems, dt, mesh, N, eos)
        good = _fv_admissible(res.new, eos, d)
        if not good.all():
            res.new, count = _clamp_state(res.new, eos, d)
            log.warning("state floor applied to %d subcells at t=%.6g", count, field.t)
            if stats is not None:
                stats["floored"] = stats.get("floored", 0) + count
    neighbors = _face_neighbors(troubled, mesh)
    if neighbors.any():
        _patch_faces(parts, res, elems, troubled, mesh, N, eos)
        redo = apply_face_terms(parts, mesh, N)
        sel = neighbors.reshape(neighbors.shape + (1,) * d)
        out.u = np.where(sel[None], redo, out.u)
    idx = (slice(None),) + tuple(elems.T)
    out.subcell[idx] = res.new
    out.u[idx] = reconstruct_from_subcells(res.new, N, d)
    out.sub_valid[...] = troubled
    if neighbors.any():
        # recomputed neighbours are not re-evolved; an inadmissible one keeps
        # repaired subcell averages as its start data for the next step
        nb_ok, _ = admissibility_check(out.u, eos, N, d)
        weak = neighbors & ~troubled & ~nb_ok
        if weak.any():
            widx = (slice(None),) + tuple(np.argwhere(weak).T)
            fixed, _ = scale_to_mean(project_to_subcells(out.u[widx], N, d), eos, d)
            out.subcell[widx] = fixed
            out.sub_valid[weak] = True
    out.status[neighbors] = Status.NEIGHBOR
    out.status[troubled] = Status.TROUBLED
    return out
