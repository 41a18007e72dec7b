import json

import numpy as np
import pytest

from solitonforge import cli
from solitonforge import nonlinearity as nl
from solitonforge import profiles as pf
from solitonforge.containers import read_fld, read_prof, write_fld, write_prof
from solitonforge.errors import ConfigError
from solitonforge.grid import ComplexField, Grid1D


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


GLUE_TOML = """
[job]
kind = "glue"

[nonlinearity]
kind = "power"
alpha = 2.0

[grid]
L = 64.0
N = 512

[glue]
method = "picard"
T_max = 4.0
lam = 4.0
dtau = 0.01
tol = 1e-7

[[train.solitons]]
omega = 1.0
v = -4.0

[[train.solitons]]
omega = 1.0
v = 4.0

[output]
dir = "out"
seed = 0
"""


class TestConfig:
    def test_unknown_key_rejected(self, tmp_path):
        path = _write(tmp_path, "bad.toml", GLUE_TOML + "\n[grid2]\nL = 1.0\n")
        with pytest.raises(ConfigError, match="grid2"):
            cli.load_config(path)

    def test_nested_unknown_key_rejected(self, tmp_path):
        path = _write(tmp_path, "bad.toml", GLUE_TOML.replace("tol = 1e-7", "tol = 1e-7\nbogus = 1"))
        with pytest.raises(ConfigError, match="glue.bogus"):
            cli.load_config(path)

    def test_json_accepted(self, tmp_path):
        cfg = {"job": {"kind": "check"}, "check": {"type": "exponents", "beta1": 2.0, "beta2": 2.0}}
        path = _write(tmp_path, "cfg.json", json.dumps(cfg))
        assert cli.load_config(path)["job"]["kind"] == "check"

    def test_bad_json_reports_line(self, tmp_path):
        path = _write(tmp_path, "bad.json", '{"job": {"kind": "check",}}')
        with pytest.raises(ConfigError, match="line"):
            cli.load_config(path)


class TestJobs:
    def test_glue_job_artifacts(self, tmp_path):
        path = _write(tmp_path, "glue.toml", GLUE_TOML)
        out = tmp_path / "run"
        code = cli.run(path, outdir=str(out))
        assert code == 0
        assert (out / "manifest.json").exists()
        assert (out / "picard.json").exists()
        assert (out / "convergence.csv").exists()
        field = read_fld(str(out / "eta0.fld"))
        assert field.grid.N == 512
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["phase_convention"]

    def test_check_job_r1_out_of_range_exits_2(self, tmp_path):
        toml = """
[job]
kind = "check"
[nonlinearity]
kind = "power"
alpha = 2.0
[check]
type = "train_admissibility"
r1 = 1.0
[train.generator]
vbar = 32.0
"""
        path = _write(tmp_path, "check.toml", toml)
        code = cli.run(path, outdir=str(tmp_path / "chk"))
        assert code == 2

    def test_check_exponents_random(self, tmp_path):
        toml = """
[job]
kind = "check"
[check]
type = "exponents_random"
n_random = 50
[output]
seed = 3
"""
        path = _write(tmp_path, "check.toml", toml)
        out = tmp_path / "chk2"
        assert cli.run(path, outdir=str(out)) == 0
        data = json.loads((out / "check.json").read_text())
        assert data["failures"] == 0 and data["n"] == 50

    def test_profile_job(self, tmp_path):
        toml = """
[job]
kind = "profile"
[nonlinearity]
kind = "combined"
alpha1 = 1.0
alpha2 = 2.0
[profile]
type = "kink"
omega1 = "auto"
"""
        path = _write(tmp_path, "prof.toml", toml)
        out = tmp_path / "prof"
        assert cli.run(path, outdir=str(out)) == 0
        header, samples = read_prof(str(out / "profile.prof"))
        assert header["profile_type"] == "kink"
        assert header["omega"] == pytest.approx(3.0 / 16.0, abs=1e-10)
        assert np.all(np.diff(samples) >= 0.0)

    def test_assemble_job(self, tmp_path):
        toml = """
[job]
kind = "assemble"
[grid]
L = 64.0
N = 512
[assemble]
times = [0.0, 0.5]
[[train.solitons]]
omega = 1.0
v = -4.0
[[train.solitons]]
omega = 1.0
v = 4.0
"""
        path = _write(tmp_path, "asm.toml", toml)
        out = tmp_path / "asm"
        assert cli.run(path, outdir=str(out)) == 0
        assert (out / "field_0000.fld").exists() and (out / "field_0001.fld").exists()
        lines = (out / "norms.csv").read_text().strip().splitlines()
        assert lines[0] == "t,l2,source_inf"
        assert len(lines) == 3

    def test_evolve_job_conserved_csv(self, tmp_path):
        toml = """
[job]
kind = "evolve"
[grid]
L = 64.0
N = 512
[evolve]
t0 = 0.0
t1 = 0.2
dt = 0.01
snapshot_stride = 10
[[train.solitons]]
omega = 1.0
"""
        path = _write(tmp_path, "ev.toml", toml)
        out = tmp_path / "ev"
        assert cli.run(path, outdir=str(out)) == 0
        lines = (out / "conserved.csv").read_text().strip().splitlines()
        assert lines[0] == "t,mass,energy,momentum"
        masses = [float(l.split(",")[1]) for l in lines[1:]]
        assert max(abs(m - masses[0]) for m in masses) < 1e-10

    def test_sweep_job(self, tmp_path):
        toml = GLUE_TOML.replace('kind = "glue"', 'kind = "sweep"') + """
[sweep]
axis = "v_star"
values = [8.0, 12.0, 8.0]
job = "glue"
"""
        path = _write(tmp_path, "sweep.toml", toml)
        out = tmp_path / "sw"
        with pytest.warns(UserWarning, match="duplicate"):
            assert cli.run(path, outdir=str(out)) == 0
        lines = (out / "rates.csv").read_text().strip().splitlines()
        assert lines[0].startswith("v_star")
        assert len(lines) == 3  # deduplicated, sorted
        assert [float(l.split(",")[0]) for l in lines[1:]] == [8.0, 12.0]

    def test_sweep_parallel_workers_deterministic(self, tmp_path):
        toml = GLUE_TOML.replace('kind = "glue"', 'kind = "sweep"') + """
[sweep]
axis = "v_star"
values = [8.0, 12.0]
job = "glue"
"""
        path = _write(tmp_path, "sweep.toml", toml)
        out1, out2 = tmp_path / "sp1", tmp_path / "sp2"
        assert cli.run(path, outdir=str(out1), workers=2) == 0
        assert cli.run(path, outdir=str(out2), workers=1) == 0
        assert (out1 / "rates.csv").read_bytes() == (out2 / "rates.csv").read_bytes()

    def test_sweep_empty_axis_fails(self, tmp_path):
        toml = GLUE_TOML.replace('kind = "glue"', 'kind = "sweep"') + """
[sweep]
axis = "v_star"
values = []
"""
        path = _write(tmp_path, "sweep.toml", toml)
        assert cli.run(path, outdir=str(tmp_path / "sw2")) == 1

    def test_reproducibility_byte_identical(self, tmp_path):
        path = _write(tmp_path, "glue.toml", GLUE_TOML)
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        assert cli.run(path, outdir=str(out1)) == 0
        assert cli.run(path, outdir=str(out2)) == 0
        assert (out1 / "convergence.csv").read_bytes() == (out2 / "convergence.csv").read_bytes()


class TestContainers:
    def test_fld_roundtrip(self, tmp_path):
        grid = Grid1D(32.0, 256)
        rng = np.random.default_rng(1)
        vals = rng.standard_normal(256) + 1j * rng.standard_normal(256)
        field = ComplexField(1.25, vals, grid)
        path = str(tmp_path / "f.fld")
        write_fld(path, field)
        back = read_fld(path)
        assert back.t == 1.25
        assert np.array_equal(back.values, vals)
        assert back.grid == grid

    def test_prof_roundtrip(self, tmp_path):
        prof = pf.ground_state_closed_form(nl.power(2.0), 1.0, dx=0.01)
        path = str(tmp_path / "p.prof")
        write_prof(path, prof, kind="power")
        header, samples = read_prof(path)
        assert header["omega"] == 1.0
        assert header["dx"] == 0.01
        assert np.array_equal(samples, prof.samples)


class TestMain:
    def test_job_kind_mismatch(self, tmp_path):
        path = _write(tmp_path, "glue.toml", GLUE_TOML)
        assert cli.main(["check", "--config", path]) == 1

    def test_main_runs(self, tmp_path):
        cfg = {"job": {"kind": "check"}, "check": {"type": "exponents", "beta1": 2.0, "beta2": 2.0}}
        path = _write(tmp_path, "c.json", json.dumps(cfg))
        out = tmp_path / "m"
        assert cli.main(["check", "--config", path, "--out", str(out)]) == 0
        data = json.loads((out / "check.json").read_text())
        assert data["r1"] == pytest.approx(4.0)
