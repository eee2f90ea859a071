"""Ghost states for the outer boundary, for DG face traces and FV subcells."""
import numpy as np

from .errors import ConfigError


def _reflect(Q, axis, d):
    out = Q.copy()
    out[2 + axis] = -out[2 + axis]
    out[3 + d + axis] = -out[3 + d + axis]
    return out


def _inflow_state(bc_states, axis, side, nvar):
    try:
        Q = np.asarray(bc_states[(axis, side)], dtype=float)
    except (KeyError, TypeError):
        raise ConfigError(f"inflow boundary on axis {axis} side {side} has no state") from None
    if Q.shape != (nvar,):
        raise ConfigError(f"inflow state must have {nvar} entries")
    return Q


def ghost_trace(inside, opposite, tag, axis, side, bc_states=None):
    """Exterior trace at a boundary face.

    ``inside`` is the trace of the boundary element on that face and
    ``opposite`` the trace of the element at the other end of the axis
    (used for periodic boundaries). Variables are on axis 0.
    """
    d = (inside.shape[0] - 3) // 2
    if tag == "periodic":
        return opposite.copy()
    if tag == "transmissive":
        return inside.copy()
    if tag == "reflective":
        return _reflect(inside, axis, d)
    if tag == "inflow":
        Q = _inflow_state(bc_states, axis, side, inside.shape[0])
        return np.broadcast_to(Q.reshape((-1,) + (1,) * (inside.ndim - 1)), inside.shape).copy()
    raise ConfigError(f"unknown boundary condition {tag!r}")


def pad_subcells(G, mesh, bc_states=None, width=2):
    """Pad a global subcell array ``(nvar, Mx[, My])`` with ghost layers."""
    d = mesh.ndim
    out = G
    for a in range(d):
        ax = 1 + a
        lo_tag, hi_tag = mesh.bcs[a]
        pad = [(0, 0)] * out.ndim
        if lo_tag == "periodic":
            pad[ax] = (width, width)
            out = np.pad(out, pad, mode="wrap")
            continue
        parts = []
        for side, tag in ((0, lo_tag), (1, hi_tag)):
            n = out.shape[ax]
            if side == 0:
                edge = np.take(out, np.arange(width)[::-1], axis=ax)
                mirror = edge
                first = np.take(out, np.zeros(width, dtype=int), axis=ax)
            else:
                edge = np.take(out, np.arange(n - width, n)[::-1], axis=ax)
                mirror = edge
                first = np.take(out, np.full(width, n - 1), axis=ax)
            if tag == "transmissive":
                ghost = first
            elif tag == "reflective":
                ghost = _reflect(mirror, a, d)
            elif tag == "inflow":
                Q = _inflow_state(bc_states, a, side, out.shape[0])
                shape = list(first.shape)
                ghost = np.broadcast_to(Q.reshape((-1,) + (1,) * (out.ndim - 1)), shape).copy()
            else:
                raise ConfigError(f"unknown boundary condition {tag!r}")
            parts.append(ghost)
        out = np.concatenate([parts[0], out, parts[1]], axis=ax)
    return out


def pad_mask(mask, mesh, width=2):
    """Pad a per-subcell array consistently with :func:`pad_subcells`."""
    out = mask
    for a in range(mesh.ndim):
        pad = [(0, 0)] * out.ndim
        pad[a] = (width, width)
        out = np.pad(out, pad, mode="wrap" if mesh.is_periodic(a) else "edge")
    return out
