"""Uniform Cartesian meshes and the nodal Gauss-Legendre basis on [0, 1]."""
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import ConfigError

BC_TYPES = ("periodic", "transmissive", "reflective", "inflow")


@dataclass(frozen=True)
class CartesianMesh:
    """Tensor-product mesh of ``prod(counts)`` equal elements.

    ``bcs[a] = (lo, hi)`` holds the boundary tag for each side of axis ``a``.
    Element ``(i, j)`` spans ``[x_{i-1/2}, x_{i+1/2}] x [y_{j-1/2}, y_{j+1/2}]``
    with 0-based indices.
    """

    bounds: tuple
    counts: tuple
    bcs: tuple

    @property
    def ndim(self):
        return len(self.counts)

    @cached_property
    def spacing(self):
        return tuple((hi - lo) / n for (lo, hi), n in zip(self.bounds, self.counts))

    @property
    def h_min(self):
        return min(self.spacing)

    @property
    def n_elements(self):
        return int(np.prod(self.counts))

    def edges(self, axis):
        lo, hi = self.bounds[axis]
        return lo + self.spacing[axis] * np.arange(self.counts[axis] + 1)

    def centers(self, axis):
        lo, _ = self.bounds[axis]
        return lo + self.spacing[axis] * (np.arange(self.counts[axis]) + 0.5)

    def element_span(self, index):
        """Physical extent ``((x_lo, x_hi), ...)`` of one element."""
        index = np.atleast_1d(index)
        return tuple((self.bounds[a][0] + self.spacing[a] * index[a],
                      self.bounds[a][0] + self.spacing[a] * (index[a] + 1))
                     for a in range(self.ndim))

    def to_physical(self, axis, index, xi):
        """Map reference coordinate ``xi`` in [0, 1] of element ``index``."""
        return self.bounds[axis][0] + self.spacing[axis] * (np.asarray(index) + np.asarray(xi))

    def locate(self, axis, x):
        """Element index and reference coordinate of point ``x`` on ``axis``.

        Points on an interior face belong to the element on their right.
        """
        lo, hi = self.bounds[axis]
        if np.any(np.asarray(x) < lo - 1e-12) or np.any(np.asarray(x) > hi + 1e-12):
            raise ConfigError(f"coordinate {x} outside [{lo}, {hi}]")
        s = (np.asarray(x, dtype=float) - lo) / self.spacing[axis]
        idx = np.clip(np.floor(s).astype(int), 0, self.counts[axis] - 1)
        return idx, s - idx

    def is_periodic(self, axis):
        return self.bcs[axis][0] == "periodic"


def _normalize_bcs(bcs, ndim):
    if isinstance(bcs, str):
        bcs = [(bcs, bcs)] * ndim
    bcs = list(bcs)
    if len(bcs) != ndim:
        raise ConfigError(f"need boundary conditions for {ndim} axes")
    out = []
    for pair in bcs:
        if isinstance(pair, str):
            pair = (pair, pair)
        lo, hi = pair
        for tag in (lo, hi):
            if tag not in BC_TYPES:
                raise ConfigError(f"unknown boundary condition {tag!r}")
        if (lo == "periodic") != (hi == "periodic"):
            raise ConfigError("periodic boundaries must come in pairs")
        out.append((lo, hi))
    return tuple(out)


def build_mesh(bounds, counts, bcs="transmissive"):
    """Create a :class:`CartesianMesh` after validating its extent."""
    counts = tuple(int(n) for n in np.atleast_1d(counts))
    bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
    if len(bounds) != len(counts) or len(counts) not in (1, 2):
        raise ConfigError("mesh must be 1D or 2D with one bound pair per axis")
    for n in counts:
        if n < 1:
            raise ConfigError(f"element count must be >= 1, got {n}")
    for lo, hi in bounds:
        if not hi > lo:
            raise ConfigError(f"degenerate extent [{lo}, {hi}]")
    return CartesianMesh(bounds, counts, _normalize_bcs(bcs, len(counts)))


def gl_nodes_weights(N):
    """Gauss-Legendre nodes and weights mapped to [0, 1] (``N + 1`` points)."""
    if N < 0:
        raise ValueError("degree must be non-negative")
    x, w = np.polynomial.legendre.leggauss(N + 1)
    return 0.5 * (x + 1.0), 0.5 * w


def lagrange_values(nodes, x):
    """Matrix ``L[k, l] = phi_l(x_k)`` of the Lagrange basis on ``nodes``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = len(nodes)
    L = np.ones((x.size, n))
    for l in range(n):
        for m in range(n):
            if m != l:
                L[:, l] *= (x - nodes[m]) / (nodes[l] - nodes[m])
    return L


def lagrange_derivatives(nodes, x):
    """Matrix ``D[k, l] = phi_l'(x_k)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = len(nodes)
    D = np.zeros((x.size, n))
    for l in range(n):
        for j in range(n):
            if j == l:
                continue
            term = np.full(x.size, 1.0 / (nodes[l] - nodes[j]))
            for m in range(n):
                if m != l and m != j:
                    term *= (x - nodes[m]) / (nodes[l] - nodes[m])
            D[:, l] += term
    return D


class NodalBasis:
    """Lagrange basis of degree ``N`` through the Gauss-Legendre points.

    Attributes
    ----------
    nodes, weights : ndarray
        GL points and weights on [0, 1]; the weights sum to one.
    dmat : ndarray
        ``dmat[m, l] = phi_l'(xi_m)``, the nodal differentiation matrix.
    left, right : ndarray
        ``phi_l(0)`` and ``phi_l(1)``, used to extrapolate face traces.
    """

    def __init__(self, N):
        self.N = int(N)
        self.nodes, self.weights = gl_nodes_weights(self.N)
        self.dmat = lagrange_derivatives(self.nodes, self.nodes)
        self.left = lagrange_values(self.nodes, 0.0)[0]
        self.right = lagrange_values(self.nodes, 1.0)[0]
        self.dleft = lagrange_derivatives(self.nodes, 0.0)[0]
        self.dright = lagrange_derivatives(self.nodes, 1.0)[0]

    @property
    def size(self):
        return self.N + 1

    def values(self, xi):
        return lagrange_values(self.nodes, xi)

    def derivatives(self, xi):
        return lagrange_derivatives(self.nodes, xi)

    def flat_index(self, *ell):
        """Tensor index ``(l1, l2)`` to ``l1 + (N+1) l2``."""
        idx = 0
        for k, l in enumerate(ell):
            idx += l * self.size ** k
        return idx

    def tensor_values(self, *xis):
        """2D basis values ``phi_l(xi, eta)`` with ``l = l1 + (N+1) l2``."""
        vals = [self.values(x)[0] for x in xis]
        out = vals[0]
        for v in vals[1:]:
            out = np.outer(v, out).reshape(-1)
        return out


@lru_cache(maxsize=None)
def nodal_basis(N):
    return NodalBasis(N)


def basis_eval(basis, ell, xi):
    """Value of the 1D basis function ``ell`` at ``xi``."""
    if not 0 <= ell <= basis.N:
        raise IndexError(f"basis index {ell} out of range")
    return basis.values(xi)[:, ell] if np.ndim(xi) else basis.values(xi)[0, ell]


def basis_deriv(basis, ell, xi):
    """Derivative of the 1D basis function ``ell`` at ``xi``."""
    if not 0 <= ell <= basis.N:
        raise IndexError(f"basis index {ell} out of range")
    return basis.derivatives(xi)[:, ell] if np.ndim(xi) else basis.derivatives(xi)[0, ell]
