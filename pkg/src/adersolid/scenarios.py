"""Initial data for the test cases.

A scenario is a :class:`ScenarioSpec`: mesh, degree, end time, the solid
geometry as a list of regions (each with a solid-velocity law), and the
initial fluid state. Solid bodies exist only through the volume fraction,
``alpha = eps`` inside a body and ``1 - eps`` elsewhere, sampled pointwise at
the GL nodes.
"""
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import model
from .ader_dg import DGField
from .errors import ConfigError
from .exact_riemann import EulerState
from .grid import build_mesh, nodal_basis
from .mood_limiter import Status

PISTON_PROBLEMS = {
    # rho, u, p, u_s, t_end
    "rp1": (1.0, 0.0, 1.0, 1.0, 0.4),
    "rp2": (1.0, 0.0, 1.0, -1.0, 0.4),
    "rp3": (1.0, -1.0, 1.0, 3.0, 0.2),
}


# --- geometry -------------------------------------------------------------

@dataclass(frozen=True)
class HalfPlane:
    """Solid where ``normal . x <= offset``."""

    normal: tuple
    offset: float = 0.0

    def contains(self, *coords):
        return sum(n * c for n, c in zip(self.normal, coords)) <= self.offset


@dataclass(frozen=True)
class AngleWedge:
    """Solid below the ray ``y = tan(angle) x`` for ``x >= 0``."""

    angle_deg: float

    def contains(self, x, y):
        return (x >= 0.0) & (y < math.tan(math.radians(self.angle_deg)) * x)


@dataclass(frozen=True)
class Triangle:
    """Isosceles triangle: tip at ``tip``, base at ``tip_x + length``, total
    height ``height``, symmetric about ``y = tip_y``."""

    length: float = 1.0
    height: float = 1.0
    tip: tuple = (0.0, 0.0)

    def contains(self, x, y):
        s = x - self.tip[0]
        half = 0.5 * self.height * s / self.length
        return (s >= 0.0) & (s <= self.length) & (np.abs(y - self.tip[1]) <= half)


@dataclass(frozen=True)
class Circle:
    center: tuple
    radius: float

    def contains(self, x, y):
        return (x - self.center[0]) ** 2 + (y - self.center[1]) ** 2 <= self.radius ** 2


# --- fluid initial data ---------------------------------------------------

@dataclass(frozen=True)
class PiecewiseFluid:
    """Fluid primitives ``(rho, velocity..., p)``: ``left`` where the first
    coordinate is below ``x_split``, ``right`` elsewhere."""

    left: tuple
    right: tuple = None
    x_split: float = -np.inf

    def __call__(self, coords):
        x = coords[0]
        right = self.left if self.right is None else self.right
        out = [np.where(x < self.x_split, lv, rv) for lv, rv in zip(self.left, right)]
        return [np.broadcast_to(o, x.shape).astype(float) for o in out]


@dataclass(frozen=True)
class SmoothAlpha:
    """``alpha = mean + amp sin(2 pi (x - x0) / L)`` (used instead of regions)."""

    mean: float = 0.5
    amp: float = 0.25
    length: float = 1.0
    shift: float = 0.0

    def __call__(self, coords, t=0.0):
        return self.mean + self.amp * np.sin(2.0 * np.pi * (coords[0] - self.shift - t) / self.length)


def uniform_solid_velocity(vs):
    def law(coords):
        return [np.full_like(coords[0], v, dtype=float) for v in vs]
    law.vs = tuple(vs)
    return law


def rotation_velocity(omega_z):
    """``v_s = omega x r`` for ``omega = (0, 0, omega_z)``."""
    def law(coords):
        x, y = coords
        return [-omega_z * y, omega_z * x]
    law.omega_z = omega_z
    return law


@dataclass
class ScenarioSpec:
    name: str
    bounds: tuple
    counts: tuple
    N: int
    t_end: float
    eps: float
    fluid: object
    regions: tuple = ()
    solid_velocity: object = None
    alpha_field: object = None
    eos: model.EosParams = model.IDEAL_GAS
    cfl: float = None
    bcs: object = "transmissive"
    inflow: dict = field(default_factory=dict)
    output_times: tuple = ()
    flag_cut_cells: bool = True

    def __post_init__(self):
        if not 1e-4 <= self.eps <= 1e-1:
            raise ConfigError(f"eps must lie in [1e-4, 1e-1], got {self.eps}")
        if self.N < 0:
            raise ConfigError("degree must be >= 0")
        if self.t_end < 0:
            raise ConfigError("t_end must be >= 0")
        if self.cfl is not None and not 0 < self.cfl <= 1:
            raise ConfigError("cfl must lie in (0, 1]")

    @property
    def ndim(self):
        return len(self.counts)

    def mesh(self):
        return build_mesh(self.bounds, self.counts, self.bcs)

    def alpha(self, coords):
        if self.alpha_field is not None:
            return self.alpha_field(coords)
        solid = np.zeros(coords[0].shape, dtype=bool)
        for reg in self.regions:
            solid |= reg.contains(*coords)
        return np.where(solid, self.eps, 1.0 - self.eps)

    def primitives(self, coords):
        d = self.ndim
        fl = self.fluid(coords)
        vs = (self.solid_velocity or uniform_solid_velocity([0.0] * d))(coords)
        shape = coords[0].shape
        parts = [self.alpha(coords)] + list(fl) + list(vs)
        return np.stack([np.broadcast_to(p, shape).astype(float) for p in parts])

    def inflow_states(self):
        return {k: model.prim_to_cons(np.asarray(v, dtype=float), self.eos)
                for k, v in self.inflow.items()}

    def with_overrides(self, nx=None, ny=None, N=None, t_end=None, cfl=None):
        counts = list(self.counts)
        if nx is not None:
            counts[0] = int(nx)
        if ny is not None:
            if len(counts) < 2:
                raise ConfigError("ny given for a 1D scenario")
            counts[1] = int(ny)
        if any(c < 1 for c in counts):
            raise ConfigError("element counts must be >= 1")
        return replace(self, counts=tuple(counts),
                       N=self.N if N is None else int(N),
                       t_end=self.t_end if t_end is None else float(t_end),
                       cfl=self.cfl if cfl is None else float(cfl))


# --- shock relations ------------------------------------------------------

def post_shock_state(upstream, M_s, eos=model.IDEAL_GAS):
    """Downstream state of a right-moving shock of Mach ``M_s`` relative to
    the upstream gas."""
    if not M_s > 1.0:
        raise ConfigError(f"shock Mach number must exceed 1, got {M_s}")
    g = eos.gamma
    up = upstream.check(eos)
    a = up.sound_speed(eos)
    M2 = M_s * M_s
    rho = up.rho * (g + 1.0) * M2 / ((g - 1.0) * M2 + 2.0)
    P = (up.p + eos.pi) * (2.0 * g * M2 - (g - 1.0)) / (g + 1.0)
    S = up.u + M_s * a
    u = up.u + (S - up.u) * (1.0 - up.rho / rho)
    return EulerState(rho, u, P - eos.pi)


def shock_speed(upstream, M_s, eos=model.IDEAL_GAS):
    return upstream.u + M_s * upstream.sound_speed(eos)


# --- scenario generators --------------------------------------------------

def init_riemann_problem(which):
    key = str(which).lower()
    if key not in PISTON_PROBLEMS:
        raise ConfigError(f"unknown Riemann problem {which!r}")
    rho, u, p, us, t_end = PISTON_PROBLEMS[key]
    return ScenarioSpec(
        name=key, bounds=((-1.0, 1.0), (-0.1, 0.1)), counts=(100, 10), N=3,
        t_end=t_end, eps=1e-3,
        fluid=PiecewiseFluid((rho, u, 0.0, p)),
        regions=(HalfPlane((1.0, 0.0), 0.0),),
        solid_velocity=uniform_solid_velocity((us, 0.0)),
        output_times=(0.0, t_end),
    )


def init_mach_reflection():
    g = model.IDEAL_GAS.gamma
    up = EulerState(1.0, 0.0, 1.0 / g)
    down = post_shock_state(up, 1.7)
    right = (up.rho, up.u, 0.0, up.p)
    left = (down.rho, down.u, 0.0, down.p)
    return ScenarioSpec(
        name="mach_reflection", bounds=((0.0, 3.0), (0.0, 2.0)), counts=(100, 50), N=5,
        t_end=1.2, eps=1e-3,
        fluid=PiecewiseFluid(left, right, 0.0),
        regions=(AngleWedge(25.0),),
        bcs=(("inflow", "transmissive"), ("reflective", "transmissive")),
        inflow={(0, 0): (1.0 - 1e-3,) + left + (0.0, 0.0)},
    )


def init_shock_wedge():
    up = EulerState(1.4, 0.0, 1.0)
    down = post_shock_state(up, 1.3)
    right = (up.rho, up.u, 0.0, up.p)
    left = (down.rho, down.u, 0.0, down.p)
    return ScenarioSpec(
        name="shock_wedge", bounds=((-2.0, 6.0), (-3.0, 3.0)), counts=(200, 150), N=5,
        t_end=4.0, eps=1e-2,
        fluid=PiecewiseFluid(left, right, -1.0),
        regions=(Triangle(1.0, 1.0),),
        bcs=(("inflow", "transmissive"), ("transmissive", "transmissive")),
        inflow={(0, 0): (1.0 - 1e-2,) + left + (0.0, 0.0)},
        output_times=(1.5, 2.0, 2.5, 4.0),
    )


def init_blunt_body():
    state = (1.4, 3.0, 0.0, 1.0)
    return ScenarioSpec(
        name="blunt_body", bounds=((-1.0, 0.0), (-1.0, 1.0)), counts=(100, 200), N=5,
        t_end=1.0, eps=1e-2,
        fluid=PiecewiseFluid(state),
        regions=(Circle((0.0, 0.0), 0.5),),
        bcs=(("inflow", "transmissive"), ("transmissive", "transmissive")),
        inflow={(0, 0): (1.0 - 1e-2,) + state + (0.0, 0.0)},
    )


def rotating_centers(R0=1.0, count=3):
    return [(R0 * math.cos(2.0 * math.pi * i / count), R0 * math.sin(2.0 * math.pi * i / count))
            for i in range(1, count + 1)]


def init_rotating_cylinders():
    return ScenarioSpec(
        name="rotating_cylinders", bounds=((-2.0, 2.0), (-2.0, 2.0)), counts=(100, 100), N=3,
        t_end=2.0, eps=1e-3,
        fluid=PiecewiseFluid((1.4, 0.0, 0.0, 1.0)),
        regions=tuple(Circle(c, 0.2) for c in rotating_centers()),
        solid_velocity=rotation_velocity(-3.0),
        bcs="periodic",
        output_times=(0.35, 2.0),
    )


def init_sod():
    """Sod shock tube in pure fluid (``alpha = 1 - eps`` everywhere)."""
    return ScenarioSpec(
        name="sod", bounds=((0.0, 1.0),), counts=(200,), N=3, t_end=0.2, eps=1e-3,
        fluid=PiecewiseFluid((1.0, 0.0, 1.0), (0.125, 0.0, 0.1), 0.5),
        solid_velocity=uniform_solid_velocity((0.0,)),
    )


def init_advection():
    """Smooth periodic volume fraction carried at ``u = u_s = 1``."""
    return ScenarioSpec(
        name="advection", bounds=((0.0, 1.0),), counts=(32,), N=3, t_end=0.5, eps=1e-3,
        fluid=PiecewiseFluid((1.0, 1.0, 1.0)),
        alpha_field=SmoothAlpha(),
        solid_velocity=uniform_solid_velocity((1.0,)),
        bcs="periodic", flag_cut_cells=False,
    )


def init_uniform():
    return ScenarioSpec(
        name="uniform", bounds=((0.0, 1.0), (0.0, 1.0)), counts=(8, 8), N=3, t_end=0.1,
        eps=1e-3, fluid=PiecewiseFluid((1.0, 0.3, -0.2, 1.0)),
        solid_velocity=uniform_solid_velocity((0.1, 0.4)),
        bcs="periodic",
    )


SCENARIOS = {
    "rp1": lambda: init_riemann_problem("rp1"),
    "rp2": lambda: init_riemann_problem("rp2"),
    "rp3": lambda: init_riemann_problem("rp3"),
    "mach_reflection": init_mach_reflection,
    "shock_wedge": init_shock_wedge,
    "blunt_body": init_blunt_body,
    "rotating_cylinders": init_rotating_cylinders,
    "sod": init_sod,
    "advection": init_advection,
    "uniform": init_uniform,
}


def get_scenario(name, **overrides):
    try:
        spec = SCENARIOS[str(name).lower()]()
    except KeyError:
        raise ConfigError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None
    return spec.with_overrides(**overrides) if overrides else spec


# --- initial field --------------------------------------------------------

def _coords(mesh, ref):
    """Physical coordinates ``(x[, y])`` on ``(*counts, *len(ref))``."""
    d = mesh.ndim
    n = len(ref)
    out = []
    for a in range(d):
        shape = [1] * (2 * d)
        shape[a] = mesh.counts[a]
        lo = mesh.edges(a)[:-1].reshape(shape)
        shape = [1] * (2 * d)
        shape[d + a] = n
        xi = np.asarray(ref).reshape(shape)
        full = tuple(mesh.counts) + (n,) * d
        out.append(np.broadcast_to(lo + mesh.spacing[a] * xi, full))
    return out


def node_coords(mesh, N):
    return _coords(mesh, nodal_basis(N).nodes)


def subcell_centers(mesh, N):
    m = 2 * N + 1
    return _coords(mesh, (np.arange(m) + 0.5) / m)


def initial_field(spec):
    """Sample the scenario at the GL nodes.

    Elements cut by a body (nodal alpha not constant) start on the subcell
    scheme: they are marked troubled and their subcell averages are the
    pointwise values at the subcell centres.
    """
    mesh = spec.mesh()
    d = mesh.ndim
    V = spec.primitives(node_coords(mesh, spec.N))
    u = model.prim_to_cons(V, spec.eos)
    f = DGField(u, 0.0, mesh, spec.N, spec.eos, bc_states=spec.inflow_states())
    if spec.flag_cut_cells and spec.alpha_field is None:
        a = V[model.IA].reshape(tuple(mesh.counts) + (-1,))
        cut = a.max(axis=-1) != a.min(axis=-1)
        if cut.any():
            Vs = spec.primitives(subcell_centers(mesh, spec.N))
            sub = model.prim_to_cons(Vs, spec.eos)
            sel = cut.reshape(cut.shape + (1,) * d)
            f.subcell = np.where(sel[None], sub, f.subcell)
            f.sub_valid = cut
            f.status[cut] = Status.TROUBLED
    return f
