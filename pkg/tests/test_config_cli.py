import csv

import numpy as np
import pytest

from polyboltz.cli import main
from polyboltz.config import BUNDLED, SUITES, bundled_config, parse_config
from polyboltz.errors import ConfigError
from polyboltz.verification import format_number

BASE = """
[mixture]
mass = 1.0
[model]
C = 1.0
eta = 0.0
"""


def _write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_parse_minimal():
    cfg = parse_config(BASE)
    assert cfg.mixture.s == 1 and cfg.model.eta == 0.0 and cfg.suites == SUITES


def test_parse_full_config():
    cfg = parse_config("""
[mixture]
names = a, b
mass = 1, 2
kind = monatomic, polyatomic
dof = 2, 5
density = 1, 0.5
[model]
C = 1, 0.5; 0.5, 2   # rows split by semicolons
eta = 0.25
[quadrature]
hermite_order = 10
seed = 4
[run]
suites = galerkin, conservation
basis_order = 3
grid_I_max = 9
""")
    assert cfg.mixture[1].dof == 5.0 and cfg.model.C[1, 1] == 2.0
    assert cfg.quad.hermite_order == 10 and cfg.quad.mc_seed == 4
    assert cfg.suites == ("conservation", "galerkin")
    assert cfg.basis_order == 3 and cfg.grid_I_max == 9.0


@pytest.mark.parametrize("text", [
    BASE + "bogus = 1\n",
    BASE + "[extra]\nx = 1\n",
    BASE.replace("C = 1.0", "C = 1, 2; 3, 1"),
    BASE.replace("eta = 0.0", "eta = 1.0"),
    BASE + "[run]\nsuites = nonsense\n",
    BASE + "[run]\ngrid_xi_max = 0\n",
    BASE + "[run]\nhs_truncations = 8, 4\n",
    "[model]\nC = 1\n",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_configs_parse(name):
    assert bundled_config(name).mixture.s in (1, 2)


def test_format_number():
    assert format_number(0.1) == "1.0000000000000001e-01"
    assert float(format_number(np.pi)) == np.pi
    assert format_number(3) == "3"


@pytest.mark.parametrize("extra", [
    BASE.replace("C = 1.0", "C = 1, 2; 3, 1"),
    BASE.replace("eta = 0.0", "eta = 1"),
    BASE + "[mixture2]\n",
])
def test_cli_config_errors_exit_2(tmp_path, extra):
    assert main(["verify", "--config", _write(tmp_path, extra), "--out", str(tmp_path)]) == 2


def test_cli_usage_errors(tmp_path, capsys):
    cfg = _write(tmp_path, BASE)
    with pytest.raises(SystemExit) as exc:
        main(["verify"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["explode", "--config", cfg])
    assert exc.value.code == 2
    assert main(["verify", "--config", str(tmp_path / "missing.ini")]) == 2
    assert main(["verify", "--config", cfg, "--suite", "nope"]) == 2
    assert main(["nu-table", "--config", cfg, "--grid-xi-max", "0"]) == 2
    assert main(["spectrum", "--config", cfg, "--basis-order", "1"]) == 2
    assert "basis-order" in capsys.readouterr().err


def test_nu_table(tmp_path):
    out = tmp_path / "nu"
    assert main(["nu-table", "--config", "mono_poly", "--out", str(out)]) == 0
    rows = list(csv.reader(open(out / "nu_table.csv")))
    assert rows[0] == ["species", "xi", "I", "nu", "ratio"]
    assert len(rows) - 1 == 2 * 33 * 17
    first = (out / "nu_table.csv").read_bytes()
    assert main(["nu-table", "--config", "mono_poly", "--out", str(out)]) == 0
    assert (out / "nu_table.csv").read_bytes() == first


def test_nu_table_eta0_ratio_spread(tmp_path):
    assert main(["nu-table", "--config", "mono_hard_sphere", "--out", str(tmp_path)]) == 0
    ratio = np.array([float(r[4]) for r in list(csv.reader(open(tmp_path / "nu_table.csv")))[1:]])
    assert ratio.max() / ratio.min() <= 10


def test_spectrum_mono(tmp_path):
    assert main(["spectrum", "--config", "mono_hard_sphere", "--out", str(tmp_path)]) == 0
    summary = (tmp_path / "kernel_summary.txt").read_text()
    assert "kernel_dimension: value=5" in summary
    assert (tmp_path / "eigenvalues.csv").exists()


def test_verify_suite_selection(tmp_path):
    code = main(["verify", "--config", "mono_hard_sphere", "--out", str(tmp_path),
                 "--suite", "conservation", "--suite", "microreversibility"])
    assert code == 0
    report = (tmp_path / "report.txt").read_text()
    assert "[conservation] PASS" in report and "[galerkin]" not in report
    assert (tmp_path / "conservation.csv").exists()


def test_verify_failure_exit_1(tmp_path):
    # a flatness window over only two speeds of a coarse grid is far from the asymptote
    cfg = _write(tmp_path, BASE + "[run]\ngrid_xi_max = 1\ngrid_xi_step = 0.5\n")
    assert main(["verify", "--config", cfg, "--out", str(tmp_path / "o"), "--suite", "nu_bounds"]) == 1
    assert "FAIL" in (tmp_path / "o" / "report.txt").read_text()


@pytest.mark.slow
def test_verify_bundled_mono_hard_sphere(tmp_path):
    assert main(["verify", "--config", "mono_hard_sphere", "--out", str(tmp_path)]) == 0
    assert "summary: 26/26" in (tmp_path / "report.txt").read_text()
