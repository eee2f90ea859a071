import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adersolid import io_cli, scenarios, solver
from adersolid.errors import ConfigError, SolverAbort


def _write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


# --- configuration ----------------------------------------------------------

def test_minimal_config_defaults():
    cfg = io_cli.parse_config("scenario = rp1\n")
    assert cfg.scenario == "rp1" and cfg.workers == 1 and cfg.limiter
    assert cfg.slices == [] and cfg.fields and not cfg.error_report
    spec = cfg.scenario_spec()
    assert spec.counts == (100, 10) and spec.N == 3 and spec.t_end == 0.4


def test_full_config():
    text = """# comment
scenario = rp2
t_end = 0.1   # inline
[mesh]
nx = 20
ny = 2
degree = 2
[limiter]
enabled = no
dmp_delta0 = 1e-5
[output]
dir = out
interval = 0.05
slices = x:0.0, x
error_report = yes
"""
    cfg = io_cli.parse_config(text)
    assert (cfg.nx, cfg.ny, cfg.degree, cfg.t_end) == (20, 2, 2, 0.1)
    assert cfg.limiter is False and cfg.dmp_delta0 == 1e-5
    assert cfg.slices == [(0, 0.0), (0, None)] and cfg.interval == 0.05
    assert cfg.out_dir == "out" and cfg.error_report


@pytest.mark.parametrize("text, fragment", [
    ("", "scenario required"),
    ("scenario = rp1\ncfl = 1.5\n", "cfl"),
    ("scenario = rp1\ncfl = 0\n", "cfl"),
    ("scenario = rp1\nfoo = 1\n", "unknown key"),
    ("scenario = rp1\n[solver]\nx = 1\n", "unknown section"),
    ("scenario = rp1\n[mesh]\nnx = ten\n", "nx"),
    ("scenario = rp1\n[mesh]\nnx = 0\n", "nx"),
    ("scenario = rp1\n[mesh]\ndegree = -1\n", "degree"),
    ("scenario = rp1\n[output]\ninterval = 0\n", "interval"),
    ("scenario = rp1\n[output]\nfields = maybe\n", "boolean"),
    ("scenario = rp1\n[output]\nslices = z:1\n", "slice axis"),
    ("scenario = rp1\nscenario = rp2\n", "twice"),
    ("scenario = rp1\nt_end = -1\n", "t_end"),
])
def test_config_errors(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        io_cli.parse_config(text)


def test_syntax_error_reports_line():
    with pytest.raises(ConfigError, match="line 3"):
        io_cli.parse_config("scenario = rp1\n[mesh]\nthis is not a pair\n")


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 1.0), st.integers(1, 500))
def test_config_number_round_trip(cfl, nx):
    cfg = io_cli.parse_config(f"scenario = sod\ncfl = {cfl!r}\n[mesh]\nnx = {nx}\n")
    assert cfg.cfl == cfl and cfg.nx == nx


def test_unknown_scenario_rejected_before_running():
    cfg = io_cli.parse_config("scenario = nozzle\n")
    with pytest.raises(ConfigError):
        cfg.scenario_spec()


# --- files --------------------------------------------------------------------

def test_slice_round_trip_and_format(tmp_path):
    f = scenarios.initial_field(scenarios.get_scenario("rp3", nx=12, ny=2))
    path = io_cli.write_slice_csv(f, 0, 0.0, tmp_path / "s.csv")
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "x,alpha,rho,u,v,p,u_s,v_s"
    assert len(lines) - 1 == io_cli.SAMPLES_PER_ELEMENT * 12
    cols = io_cli.read_slice_csv(path)
    x, V = io_cli.slice_samples(f, 0, 0.0)
    np.testing.assert_array_equal(cols["x"], x)
    np.testing.assert_array_equal(cols["rho"], V[1])
    np.testing.assert_array_equal(cols["u_s"], V[5])


def test_slice_of_uniform_state_is_constant(tmp_path):
    f = scenarios.initial_field(scenarios.get_scenario("uniform", nx=3, ny=2))
    cols = io_cli.read_slice_csv(io_cli.write_slice_csv(f, 1, 0.4, tmp_path / "s.csv"))
    assert len(cols["x"]) == 8 * 2
    for name in ("alpha", "rho", "u", "v", "p", "u_s", "v_s"):
        np.testing.assert_allclose(cols[name], cols[name][0], rtol=1e-14)
    assert cols["u"][0] == pytest.approx(0.3) and cols["v_s"][0] == pytest.approx(0.4)


def test_slice_1d_has_zero_transverse_columns(tmp_path):
    f = scenarios.initial_field(scenarios.get_scenario("sod", nx=10))
    cols = io_cli.read_slice_csv(io_cli.write_slice_csv(f, 0, None, tmp_path / "s.csv"))
    assert len(cols["x"]) == 80
    assert not cols["v"].any() and not cols["v_s"].any()


@pytest.mark.parametrize("axis, coord", [(0, 0.5), (0, -0.2), (1, 1.5)])
def test_slice_outside_domain(axis, coord):
    f = scenarios.initial_field(scenarios.get_scenario("rp1", nx=10, ny=2))
    with pytest.raises(ConfigError):
        io_cli.slice_samples(f, axis, coord)


def test_field_round_trip(tmp_path):
    f = scenarios.initial_field(scenarios.get_scenario("uniform", nx=2, ny=2))
    f.status[1, 0] = 1
    meta, cols = io_cli.read_field(io_cli.write_field(f, tmp_path / "f.dat"))
    assert meta["counts"] == (2, 2) and meta["ndim"] == 2 and meta["degree"] == 3
    assert len(cols["rho"]) == 4
    assert list(cols["i"]) == [0, 1, 0, 1] and list(cols["j"]) == [0, 0, 1, 1]
    assert list(cols["status"]) == ["U", "T", "U", "U"]
    np.testing.assert_allclose(cols["p"], 1.0, rtol=1e-14)
    np.testing.assert_allclose(cols["x"], [0.25, 0.75, 0.25, 0.75])


def test_field_averages_use_subcells(tmp_path):
    f = scenarios.initial_field(scenarios.get_scenario("rp1", nx=21, ny=1))
    _, cols = io_cli.read_field(io_cli.write_field(f, tmp_path / "f.dat"))
    assert cols["status"][10] == "T"
    assert 1e-3 < cols["alpha"][10] < 1 - 1e-3
    np.testing.assert_allclose(cols["alpha"][10], f.subcell[0, 10].mean(), rtol=1e-14)


def test_read_field_rejects_other_files(tmp_path):
    p = tmp_path / "x.dat"
    p.write_text("hello\n")
    with pytest.raises(ValueError):
        io_cli.read_field(p)


# --- error norms ----------------------------------------------------------------

def test_error_norms_examples():
    x = np.linspace(0, 1, 11)
    exact = {"rho": np.sin(x)}
    mask = np.ones_like(x, dtype=bool)
    zero = io_cli.error_norms({"rho": np.sin(x)}, exact, mask, 0.1)
    assert zero["rho"] == (0.0, 0.0, 0.0)
    off = io_cli.error_norms({"rho": np.sin(x) + 1e-3}, exact, mask, 0.1)
    assert off["rho"][2] == pytest.approx(1e-3, rel=1e-9)
    assert off["rho"][0] == pytest.approx(11 * 0.1 * 1e-3, rel=1e-9)
    with pytest.raises(io_cli.EmptyRegionError):
        io_cli.error_norms(exact, exact, ~mask, 0.1)


def test_error_report_initial_sod(tmp_path):
    spec = scenarios.get_scenario("sod", nx=20)
    f = scenarios.initial_field(spec)
    norms = io_cli.error_report(f, io_cli.oracle_for(spec), path=tmp_path / "e.csv")
    assert io_cli.read_error_report(tmp_path / "e.csv") == norms
    # only the element holding the jump differs
    assert norms["rho"][0] < 0.875 * 0.05


def test_error_report_masks_solid():
    spec = scenarios.get_scenario("rp1", nx=20, ny=2)
    f = scenarios.initial_field(spec)
    norms = io_cli.error_report(f, io_cli.oracle_for(spec), coordinate=0.0)
    assert norms["rho"] == (0.0, 0.0, 0.0)


# --- running ------------------------------------------------------------------------

def test_t_end_zero_dumps_initial_state(tmp_path, capsys):
    cfg = _write(tmp_path, "scenario = rp1\nt_end = 0\n[mesh]\nnx = 10\nny = 2\n")
    out = tmp_path / "out"
    assert io_cli.main(["solve", "--config", cfg, "--out", str(out)]) == io_cli.EXIT_OK
    assert sorted(p.name for p in out.iterdir()) == ["field_0000.dat", "slice0_x_0000.csv"]
    assert "steps=0" in capsys.readouterr().out


def test_run_writes_frames(tmp_path):
    cfg = io_cli.parse_config(
        f"scenario = rp2\nt_end = 0.02\n[mesh]\nnx = 10\nny = 2\n"
        f"[output]\ndir = {tmp_path}\ninterval = 0.01\nslices = x:0.0, y:-0.5\nerror_report = on\n")
    code, written = io_cli.run(cfg)
    assert code == io_cli.EXIT_OK
    names = {p.name for p in written}
    assert {"slice0_x_0002.csv", "slice1_y_0002.csv", "field_0002.dat", "errors.csv"} <= names
    meta, _ = io_cli.read_field(tmp_path / "field_0002.dat")
    assert meta["time"] == pytest.approx(0.02, abs=1e-15)


def test_cli_overrides(tmp_path):
    out = tmp_path / "o"
    code = io_cli.main(["solve", "--scenario", "sod", "--nx", "8", "--degree", "1",
                        "--tend", "0.01", "--cfl", "0.5", "--out", str(out)])
    assert code == io_cli.EXIT_OK
    meta, _ = io_cli.read_field(out / "field_0001.dat")
    assert meta["counts"] == (8,) and meta["degree"] == 1


@pytest.mark.parametrize("args", [
    ["solve"],
    ["solve", "--scenario", "nozzle"],
    ["solve", "--scenario", "sod", "--cfl", "2"],
    ["solve", "--scenario", "sod", "--ny", "4"],
])
def test_config_errors_exit_1(args, tmp_path):
    assert io_cli.main(args + ["--out", str(tmp_path)]) == io_cli.EXIT_CONFIG


def test_bad_config_file_exit_1(tmp_path):
    cfg = _write(tmp_path, "scenario = rp1\n[mesh]\nnx == 3\n]\n")
    assert io_cli.main(["solve", "--config", cfg]) == io_cli.EXIT_CONFIG


def test_io_errors_exit_3(tmp_path):
    assert io_cli.main(["solve", "--config", str(tmp_path / "missing.cfg")]) == io_cli.EXIT_IO
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code = io_cli.main(["solve", "--scenario", "sod", "--tend", "0", "--out", str(blocker / "sub")])
    assert code == io_cli.EXIT_IO


def test_solver_abort_exit_2(tmp_path, monkeypatch):
    def boom(fld, *a, **k):
        raise SolverAbort("non-finite wave speed in element (3,)", element=(3,),
                          state=fld.u[:, 3])
    monkeypatch.setattr(solver, "run", boom)
    code = io_cli.main(["solve", "--scenario", "sod", "--nx", "8", "--out", str(tmp_path)])
    assert code == io_cli.EXIT_ABORT
    dump = (tmp_path / "abort.txt").read_text()
    assert "element = 3" in dump and len(dump.splitlines()) == 2 + 5


def test_verify_subcommand(capsys):
    assert io_cli.main(["verify"]) == io_cli.EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 5


def test_outputs_independent_of_workers(tmp_path):
    text = "scenario = rp3\nt_end = 0.02\n[mesh]\nnx = 20\nny = 2\n[output]\nslices = x:0.0\n"
    blobs = []
    for w in (1, 3):
        cfg = _write(tmp_path, text, f"w{w}.cfg")
        out = tmp_path / f"w{w}"
        assert io_cli.main(["solve", "--config", cfg, "--out", str(out), "--workers", str(w)]) == 0
        blobs.append({p.name: p.read_bytes() for p in out.iterdir()})
    assert blobs[0] == blobs[1]
