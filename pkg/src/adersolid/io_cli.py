"""Batch front-end: configuration files, the time loop with periodic output,
slice and field writers with matching readers, and error tables.

Config files are ``key = value`` lines grouped under ``[run]``, ``[mesh]``,
``[limiter]`` and ``[output]``; keys before the first header belong to
``[run]``. Recognised keys and their defaults::

    [run]      scenario (required), t_end, cfl, workers = 1, max_steps
    [mesh]     nx, ny, degree          (scenario defaults)
    [limiter]  enabled = true, dmp_delta0 = 1e-4, dmp_eps_rel = 1e-3
    [output]   dir = output, interval (= t_end), slices, fields = true,
               error_report = false

``slices`` is a comma separated list of ``axis[:coordinate]`` items, for
example ``x:0.0, y:0.5``; an x-slice of a 2D run needs the y coordinate.
The default is one x-slice through the middle of the domain.

Exit codes: 0 success, 1 configuration error, 2 solver abort or failed
verification, 3 I/O error.
"""
import argparse
import ast
import configparser
import csv
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__, ader_dg, model, scenarios, solver
from .errors import AdersolidError, ConfigError, SolverAbort
from .exact_riemann import EulerState, PistonProblem, euler_exact_sample, piston_solution
from .grid import nodal_basis
from .mood_limiter import DMP_DELTA0, DMP_EPS_REL, Status

log = logging.getLogger(__name__)

FIELD_FORMAT = "adersolid-field 1"
SLICE_HEADER = ("x", "alpha", "rho", "u", "v", "p", "u_s", "v_s")
SAMPLES_PER_ELEMENT = 8
STATUS_CODE = {Status.UNLIMITED: "U", Status.TROUBLED: "T", Status.NEIGHBOR: "N"}

EXIT_OK, EXIT_CONFIG, EXIT_ABORT, EXIT_IO = 0, 1, 2, 3

_TOP = "__top__"
_KEYS = {
    "run": {"scenario", "t_end", "cfl", "workers", "max_steps"},
    "mesh": {"nx", "ny", "degree"},
    "limiter": {"enabled", "dmp_delta0", "dmp_eps_rel"},
    "output": {"dir", "interval", "slices", "fields", "error_report"},
}


class EmptyRegionError(AdersolidError):
    """An error norm was requested over an empty set of points."""


@dataclass
class RunConfig:
    scenario: str
    nx: int = None
    ny: int = None
    degree: int = None
    cfl: float = None
    t_end: float = None
    workers: int = 1
    max_steps: int = None
    limiter: bool = True
    dmp_delta0: float = DMP_DELTA0
    dmp_eps_rel: float = DMP_EPS_REL
    out_dir: str = "output"
    interval: float = None
    slices: list = field(default_factory=list)
    fields: bool = True
    error_report: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.scenario:
            raise ConfigError("scenario required")
        if self.degree is not None and self.degree < 0:
            raise ConfigError("degree must be >= 0")
        for key in ("nx", "ny"):
            v = getattr(self, key)
            if v is not None and v < 1:
                raise ConfigError(f"{key} must be >= 1")
        if self.cfl is not None and not 0.0 < self.cfl <= 1.0:
            raise ConfigError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.t_end is not None and self.t_end < 0:
            raise ConfigError("t_end must be >= 0")
        if self.interval is not None and not self.interval > 0:
            raise ConfigError("output interval must be > 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.max_steps is not None and self.max_steps < 1:
            raise ConfigError("max_steps must be >= 1")
        if not (self.dmp_delta0 > 0 and self.dmp_eps_rel >= 0):
            raise ConfigError("DMP tolerances must be positive")
        return self

    def scenario_spec(self):
        return scenarios.get_scenario(self.scenario, nx=self.nx, ny=self.ny, N=self.degree,
                                      t_end=self.t_end, cfl=self.cfl)


# --- configuration ----------------------------------------------------------

def _convert(section, key, raw):
    raw = raw.strip()
    ints = {"workers", "max_steps", "nx", "ny", "degree"}
    floats = {"t_end", "cfl", "dmp_delta0", "dmp_eps_rel", "interval"}
    bools = {"enabled", "fields", "error_report"}
    try:
        if key in ints:
            return int(raw)
        if key in floats:
            return float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot read {raw!r} as a number") from None
    if key in bools:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"[{section}] {key}: expected a boolean, got {raw!r}")
    if key == "slices":
        return parse_slices(raw)
    return raw


def parse_slices(text):
    """``"x:0.0, y"`` -> ``[(0, 0.0), (1, None)]``."""
    out = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        name, _, coord = item.partition(":")
        name = name.strip().lower()
        if name not in ("x", "y"):
            raise ConfigError(f"slice axis must be x or y, got {name!r}")
        try:
            value = float(coord) if coord.strip() else None
        except ValueError:
            raise ConfigError(f"bad slice coordinate in {item!r}") from None
        out.append(("xy".index(name), value))
    return out


def parse_config(text):
    """Parse config text into a :class:`RunConfig`."""
    cp = configparser.ConfigParser(interpolation=None, strict=True,
                                   comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(f"[{_TOP}]\n" + text)
    except configparser.ParsingError as exc:
        line, content = exc.errors[0]
        content = ast.literal_eval(content).strip()
        raise ConfigError(f"syntax error on line {line - 1}: expected 'key = value' "
                          f"or '[section]', got {content!r}") from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        what = f"key {exc.option!r}" if hasattr(exc, "option") else f"section [{exc.section}]"
        raise ConfigError(f"syntax error on line {exc.lineno - 1}: {what} given twice") from None
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        where = f" on line {line - 1}" if line else ""
        raise ConfigError(f"syntax error{where}: {exc.message.splitlines()[0]}") from None
    values = {}
    for section in cp.sections():
        name = "run" if section == _TOP else section
        if name not in _KEYS:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in _KEYS[name]:
                raise ConfigError(f"unknown key {key!r} in [{name}]")
            target = {"enabled": "limiter", "dir": "out_dir"}.get(key, key)
            if target in values:
                raise ConfigError(f"key {key!r} given twice")
            values[target] = _convert(name, key, raw)
    if "scenario" not in values:
        raise ConfigError("scenario required")
    return RunConfig(**values)


def load_config(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError:
        raise ConfigError(f"{path}: not UTF-8 text") from None
    return parse_config(text)


# --- sampling ---------------------------------------------------------------

def _slice_geometry(mesh, axis, coordinate):
    d = mesh.ndim
    if axis >= d:
        raise ConfigError(f"slice axis {'xy'[axis]} does not exist in a {d}D run")
    if d == 1:
        return None
    other = 1 - axis
    if coordinate is None:
        lo, hi = mesh.bounds[other]
        coordinate = 0.5 * (lo + hi)
    idx, ref = mesh.locate(other, coordinate)
    return other, int(idx), float(ref)


def slice_samples(fld, axis=0, coordinate=None):
    """Primitive samples along a mesh line, ``SAMPLES_PER_ELEMENT`` per element.

    Returns ``(x, V)`` with ``V[var, k]``. Elements evolved on subcells in
    the last step are sampled from their subcell averages.
    """
    mesh, N, d = fld.mesh, fld.N, fld.ndim
    geo = _slice_geometry(mesh, axis, coordinate)
    ns = SAMPLES_PER_ELEMENT
    ref = (np.arange(ns) + 0.5) / ns
    m = 2 * N + 1
    if d == 1:
        U = ader_dg.eval_points(fld, [ref])
        S = fld.subcell[:, :, np.minimum((ref * m).astype(int), m - 1)]
        use_sub = fld.sub_valid
    else:
        other, j, r = geo
        pts = [None, None]
        pts[axis] = ref
        pts[other] = np.array([r])
        U = ader_dg.eval_points(fld, pts)
        sidx = [None, None]
        sidx[axis] = np.minimum((ref * m).astype(int), m - 1)
        sidx[other] = np.array([min(int(r * m), m - 1)])
        S = fld.subcell[:, :, :, sidx[0][:, None], sidx[1][None, :]]
        take = [slice(None)] * 4
        take[1 + other] = slice(j, j + 1)
        U = U[tuple(take)]
        S = S[tuple(take)]
        U = U.reshape(U.shape[0], mesh.counts[axis], ns)
        S = S.reshape(S.shape[0], mesh.counts[axis], ns)
        use_sub = np.take(fld.sub_valid, [j], axis=other).reshape(-1)
    Q = np.where(use_sub[None, :, None], S, U)
    with np.errstate(all="ignore"):
        V = model.cons_to_prim(Q, fld.eos, check=False)
    lo = mesh.bounds[axis][0]
    h = mesh.spacing[axis]
    x = lo + h * (np.arange(mesh.counts[axis])[:, None] + ref[None, :])
    return x.reshape(-1), V.reshape(V.shape[0], -1)


def _slice_columns(V, d):
    """Primitive rows in ``SLICE_HEADER`` order (``v``, ``v_s`` = 0 in 1D)."""
    zero = np.zeros_like(V[0])
    if d == 1:
        return [V[0], V[1], V[2], zero, V[3], V[4], zero]
    return [V[0], V[1], V[2], V[3], V[4], V[5], V[6]]


def write_slice_csv(fld, axis, coordinate, path):
    x, V = slice_samples(fld, axis, coordinate)
    cols = [x] + _slice_columns(V, fld.ndim)
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        np.savetxt(fh, np.column_stack(cols), fmt="%.17g", delimiter=",",
                   header=",".join(SLICE_HEADER), comments="")
    return path


def read_slice_csv(path):
    with open(path, encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != SLICE_HEADER:
            raise ValueError(f"{path}: unexpected slice header {header}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return {name: data[:, k] for k, name in enumerate(header)}


def cell_averages(fld):
    """Element means of the conserved variables, ``(nvar, *counts)``."""
    d = fld.ndim
    w = nodal_basis(fld.N).weights
    U = fld.u
    for _ in range(d):
        U = U @ w
    if fld.sub_valid.any():
        S = fld.subcell.mean(axis=tuple(range(1 + d, 1 + 2 * d)))
        U = np.where(fld.sub_valid[None], S, U)
    return U


def write_field(fld, path):
    """Element averages of ``(alpha, rho, u, v, p)`` and the limiter status.

    The file starts with ``# adersolid-field 1`` and ``key = value`` header
    lines (time, ndim, counts, bounds, degree, columns) closed by a line
    ``# data``; each following row is one element, x index fastest.
    """
    mesh, d = fld.mesh, fld.ndim
    with np.errstate(all="ignore"):
        V = model.cons_to_prim(cell_averages(fld), fld.eos, check=False)
    centers = np.meshgrid(*[mesh.centers(a) for a in range(d)], indexing="ij")
    vel = [V[2 + a] for a in range(d)] + [np.zeros_like(V[0])] * (2 - d)
    cols = [V[0], V[1], vel[0], vel[1], V[2 + d]]
    names = ["i", "j"][:d] + ["x", "y"][:d] + ["alpha", "rho", "u", "v", "p", "status"]
    lines = [f"# {FIELD_FORMAT}",
             f"time = {fld.t:.17g}",
             f"ndim = {d}",
             "counts = " + " ".join(str(c) for c in mesh.counts),
             "bounds = " + " ".join(f"{v:.17g}" for b in mesh.bounds for v in b),
             f"degree = {fld.N}",
             "columns = " + " ".join(names),
             "# data"]
    order = np.array(list(np.ndindex(*mesh.counts[::-1])))[:, ::-1]
    for idx in map(tuple, order):
        row = [str(i) for i in idx] + [f"{c[idx]:.17g}" for c in centers]
        row += [f"{c[idx]:.17g}" for c in cols]
        row.append(STATUS_CODE[Status(int(fld.status[idx]))])
        lines.append(" ".join(row))
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_field(path):
    """Inverse of :func:`write_field`: ``(meta, columns)``."""
    meta = {}
    with open(path, encoding="ascii") as fh:
        first = fh.readline().strip()
        if first != f"# {FIELD_FORMAT}":
            raise ValueError(f"{path}: not an {FIELD_FORMAT} file")
        for line in fh:
            line = line.strip()
            if line == "# data":
                break
            key, _, value = line.partition("=")
            meta[key.strip()] = value.strip()
        rows = [line.split() for line in fh if line.strip()]
    names = meta["columns"].split()
    meta = {"time": float(meta["time"]), "ndim": int(meta["ndim"]),
            "counts": tuple(int(v) for v in meta["counts"].split()),
            "bounds": tuple(float(v) for v in meta["bounds"].split()),
            "degree": int(meta["degree"]), "columns": names}
    cols = {}
    for k, name in enumerate(names):
        raw = [r[k] for r in rows]
        if name == "status":
            cols[name] = np.array(raw)
        elif name in ("i", "j"):
            cols[name] = np.array(raw, dtype=int)
        else:
            cols[name] = np.array(raw, dtype=float)
    return meta, cols


# --- oracles and error tables -----------------------------------------------

def oracle_for(spec):
    """Exact solution ``f(x, t) -> {"rho", "u", "p"}`` along x, or None."""
    name = spec.name
    if name in scenarios.PISTON_PROBLEMS:
        rho, u, p, us, _ = scenarios.PISTON_PROBLEMS[name]
        prob = PistonProblem(EulerState(rho, u, p), us, side="left")

        def piston(x, t):
            s = piston_solution(prob, spec.eos, x, t) if t > 0 else None
            if s is None:
                gas = np.where(x > 0.0, 1.0, np.nan)
                return {"rho": rho * gas, "u": u * gas, "p": p * gas}
            return {"rho": s.rho, "u": s.u, "p": s.p}
        return piston
    if name == "sod":
        left, right = EulerState(1.0, 0.0, 1.0), EulerState(0.125, 0.0, 0.1)

        def sod(x, t):
            if t == 0:
                on_left = x < 0.5
                return {"rho": np.where(on_left, 1.0, 0.125), "u": np.zeros_like(x),
                        "p": np.where(on_left, 1.0, 0.1)}
            s = euler_exact_sample(left, right, spec.eos, (np.asarray(x) - 0.5) / t)
            return {"rho": s.rho, "u": s.u, "p": s.p}
        return sod
    if name == "advection":
        law = spec.alpha_field

        def advect(x, t):
            one = np.ones_like(np.asarray(x, dtype=float))
            return {"alpha": law((x,), t), "rho": one, "u": one, "p": one}
        return advect
    return None


def error_norms(numeric, exact, mask, weight):
    """L1, L2 and max norms of ``numeric - exact`` over ``mask``.

    ``weight`` is the length (or area) carried by each sample. Returns
    ``{variable: (L1, L2, Linf)}``.
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise EmptyRegionError("error region is empty")
    w = np.broadcast_to(np.asarray(weight, dtype=float), mask.shape)[mask]
    out = {}
    for name in exact:
        e = np.abs(np.asarray(numeric[name])[mask] - np.asarray(exact[name])[mask])
        out[name] = (float(np.sum(w * e)), float(np.sqrt(np.sum(w * e * e))), float(e.max()))
    return out


def error_report(fld, oracle, mask=None, coordinate=None, path=None):
    """Error norms of an x-slice against ``oracle(x, t)``.

    The default region is the fluid, ``alpha > 0.5``, restricted to points
    where the oracle is defined. With ``path`` the table is written as CSV.
    """
    x, V = slice_samples(fld, 0, coordinate)
    d = fld.ndim
    numeric = {"alpha": V[0], "rho": V[1], "u": V[2], "p": V[2 + d]}
    exact = oracle(x, fld.t)
    defined = np.all([np.isfinite(exact[k]) for k in exact], axis=0)
    if mask is None:
        mask = numeric["alpha"] > 0.5
    mask = np.asarray(mask, dtype=bool) & defined
    weight = fld.mesh.spacing[0] / SAMPLES_PER_ELEMENT
    norms = error_norms(numeric, exact, mask, weight)
    if path is not None:
        with open(path, "w", newline="\n", encoding="ascii") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["variable", "L1", "L2", "Linf"])
            for name, vals in norms.items():
                out.writerow([name] + [f"{v:.17g}" for v in vals])
    return norms


def read_error_report(path):
    with open(path, encoding="ascii") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["variable", "L1", "L2", "Linf"]:
        raise ValueError(f"{path}: unexpected error-report header")
    return {r[0]: tuple(float(v) for v in r[1:]) for r in rows[1:]}


# --- run ----------------------------------------------------------------------

def output_times(config, spec):
    t_end = spec.t_end
    if config.interval is not None:
        n = int(np.floor(t_end / config.interval + 1e-9))
        times = [k * config.interval for k in range(n + 1)]
    else:
        times = [0.0] + [t for t in spec.output_times if 0 < t < t_end]
    if t_end > times[-1] + 1e-12 * max(1.0, t_end):
        times.append(t_end)
    return times


def _write_frame(fld, config, out, frame, slices):
    written = []
    for k, (axis, coord) in enumerate(slices):
        p = out / f"slice{k}_{'xy'[axis]}_{frame:04d}.csv"
        written.append(write_slice_csv(fld, axis, coord, p))
    if config.fields:
        written.append(write_field(fld, out / f"field_{frame:04d}.dat"))
    return written


def _dump_abort(exc, out):
    path = out / "abort.txt"
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write(f"{exc}\n")
        if exc.element is not None:
            fh.write(f"element = {' '.join(str(i) for i in exc.element)}\n")
        if exc.state is not None:
            state = np.asarray(exc.state).reshape(np.shape(exc.state)[0], -1)
            np.savetxt(fh, state, fmt="%.17g")
    return path


def run(config, stream=None, callback=None):
    """Execute a configured run. Returns ``(exit_code, written_paths)``.

    ``callback(field)`` is passed on to the time loop.
    """
    stream = stream or sys.stdout
    spec = config.scenario_spec()
    out = Path(config.out_dir)
    slices = config.slices or [(0, None)]
    fld = scenarios.initial_field(spec)
    for axis, coord in slices:
        _slice_geometry(fld.mesh, axis, coord)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create {out}: {exc}", file=sys.stderr)
        return EXIT_IO, []
    dmp = {"delta0": config.dmp_delta0, "eps_rel": config.dmp_eps_rel}
    written = []
    total = solver.RunStats()
    steps_left = config.max_steps
    try:
        for frame, t_out in enumerate(output_times(config, spec)):
            if t_out > fld.t:
                fld, st = solver.run(fld, t_out, spec.cfl, config.limiter, config.workers,
                                     callback=callback, max_steps=steps_left, dmp=dmp)
                total.steps += st.steps
                total.wall += st.wall
                total.troubled_total += st.troubled_total
                total.troubled_max = max(total.troubled_max, st.troubled_max)
                total.floored += st.floored
                if steps_left is not None:
                    steps_left -= st.steps
                    if steps_left <= 0 and fld.t < t_out:
                        written += _write_frame(fld, config, out, frame, slices)
                        break
            written += _write_frame(fld, config, out, frame, slices)
        if config.error_report:
            oracle = oracle_for(spec)
            if oracle is None:
                print(f"note: no exact solution for scenario {spec.name}", file=stream)
            else:
                written.append(error_report(fld, oracle, path=out / "errors.csv") and
                               out / "errors.csv")
    except SolverAbort as exc:
        print(f"solver abort at t={fld.t:.6g}: {exc}", file=sys.stderr)
        try:
            print(f"diagnostic dump: {_dump_abort(exc, out)}", file=sys.stderr)
        except OSError:
            pass
        return EXIT_ABORT, written
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO, written
    print(f"{spec.name}: t={fld.t:.6g} {total.summary()}", file=stream)
    return EXIT_OK, written


# --- verification -------------------------------------------------------------

def verify(stream=None):
    """Quick oracle and property checks; returns True if all pass."""
    stream = stream or sys.stdout
    from .exact_riemann import grh_path_residual, piston_star_state, star_state

    rng = np.random.default_rng(7)
    checks = []
    p_star, _ = star_state(EulerState(1.0, 0.0, 1.0), EulerState(0.125, 0.0, 0.1))
    checks.append(("sod star pressure", abs(p_star - 0.30313) < 1e-5))
    star = piston_star_state(PistonProblem(EulerState(1.0, 0.0, 1.0), 1.0))
    checks.append(("piston star velocity", abs(star.u - 1.0) < 1e-14))
    worst = 0.0
    for _ in range(20):
        rho, p, us = rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0), rng.uniform(-1, 1)
        Qm = model.prim_to_cons(np.array([1e-3, rho, us, p, us]))
        Qp = model.prim_to_cons(np.array([1.0 - 1e-3, rho, us, p, us]))
        worst = max(worst, np.abs(grh_path_residual(Qm, Qp, us)).max())
    checks.append(("interface jump relation", worst < 1e-10))
    err = 0.0
    for _ in range(20):
        V = np.array([rng.uniform(0.1, 0.9), rng.uniform(0.5, 2), rng.normal(), rng.normal(),
                      rng.uniform(0.5, 2), rng.normal(), rng.normal()])
        n = rng.normal(size=2)
        n /= np.linalg.norm(n)
        Q = model.prim_to_cons(V)
        lam = np.sort(np.linalg.eigvals(model.quasilinear_matrix(Q, model.IDEAL_GAS, n)).real)
        err = max(err, np.abs(lam - np.sort(model.eigenvalues(Q, model.IDEAL_GAS, n))).max())
    checks.append(("eigenvalues", err < 1e-8))
    fld = scenarios.initial_field(scenarios.get_scenario("uniform", nx=4, ny=4))
    u0 = fld.u.copy()
    for _ in range(5):
        fld = solver.step(fld, ader_dg.compute_dt(fld))
    checks.append(("free-stream", np.abs(fld.u - u0).max() < 1e-13))
    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}", file=stream)
    return all(ok for _, ok in checks)


# --- command line ---------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="adersolid", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress and limiter events")
    sub = parser.add_subparsers(dest="command", required=True)
    solve = sub.add_parser("solve", help="run a scenario")
    solve.add_argument("--config", help="config file")
    solve.add_argument("--scenario", help=f"one of {', '.join(sorted(scenarios.SCENARIOS))}")
    solve.add_argument("--nx", type=int)
    solve.add_argument("--ny", type=int)
    solve.add_argument("--degree", type=int)
    solve.add_argument("--cfl", type=float)
    solve.add_argument("--tend", type=float)
    solve.add_argument("--out")
    solve.add_argument("--workers", type=int)
    sub.add_parser("verify", help="run the built-in oracle checks")
    return parser


def _config_from_args(args):
    config = load_config(args.config) if args.config else None
    overrides = {"scenario": args.scenario, "nx": args.nx, "ny": args.ny,
                 "degree": args.degree, "cfl": args.cfl, "t_end": args.tend,
                 "out_dir": args.out, "workers": args.workers}
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if config is None:
        if "scenario" not in overrides:
            raise ConfigError("scenario required (use --config or --scenario)")
        return RunConfig(**overrides)
    return replace(config, **overrides).validate()


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "verify":
        return EXIT_OK if verify() else EXIT_ABORT
    try:
        config = _config_from_args(args)
        config.scenario_spec()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    code, _ = run(config)
    return code


if __name__ == "__main__":
    sys.exit(main())
