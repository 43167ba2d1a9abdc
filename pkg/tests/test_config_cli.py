import json
import subprocess
import sys
from fractions import Fraction as F

import pytest
from conftest import CONFIGS

from polyhom.cli import main
from polyhom.config import parse_config, parse_forcing, parse_poly
from polyhom.errors import ConfigError
from polyhom.series import series_from_json
from polyhom.tangential import TangentialPoly

ALL_CONFIGS = sorted(p.stem for p in CONFIGS.glob("*.ini"))
EXPANSIONS = [
    "hemisphere_n3", "hemisphere_n4", "ln_halfspace_n3", "ln_halfspace_n4", "ln_halfspace_n5",
    "ln_halfspace_n6", "ln_ball_n3", "ln_ball_n4", "ln_ball_n6", "minimal_graph_n3",
    "linear_homogeneous", "planted_resonance",
]


def write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


# --- parsing -----------------------------------------------------------------------

def test_minimal_config():
    cfg = parse_config("version = 1\ncommand = match\n[problem]\nkind = ln_ball\nn = 3\nK = 6\n")
    assert cfg.command == "match"
    assert (cfg.problem.kind, cfg.problem.n, cfg.problem.K) == ("ln_ball", 3, 6)
    assert cfg.tolerances["decay_ratio"] == 0.6


def test_keys_are_case_sensitive():
    with pytest.raises(ConfigError, match="unknown key 'k'"):
        parse_config("version = 1\n[problem]\nkind = ln_ball\nn = 3\nk = 6\n")


@pytest.mark.parametrize(
    "text,message",
    [
        ("command = match\n", "version"),
        ("version = 2\n", "unsupported"),
        ("version = 1\ncommand = dance\n", "unknown command"),
        ("version = 1\nflavour = 3\n", "unknown key"),
        ("version = 1\n[extras]\na = 1\n", "unknown section"),
        ("version = 1\n[tolerances]\nslope = -0.1\n", "positive"),
        ("version = 1\n[tolerances]\nslope = 0\n", "positive"),
        ("version = 1\n[tolerances]\ngrowth_low = 2\n", "growth_low"),
        ("version = 1\n[problem]\nkind = torus\nn = 3\nK = 6\n", "unknown problem kind"),
        ("version = 1\n[problem]\nkind = ln_ball\nn = 3\nK = 0\n", "K must be"),
        ("version = 1\n[problem]\nkind = ln_ball\nn = 3\n", "needs 'K'"),
        ("version = 1\n[problem]\nkind = ln_ball\nn = 3\nK = 6\nforcing = 3: 1\n", "linear kind"),
        ("version = 1\n[problem]\nkind = hemisphere\nn = 3\nK = 6\nphi = 1\n", "phi"),
        ("version = 1\n[problem]\nkind = ln_ball\nn = x\nK = 6\n", "cannot read"),
        ("version = 1\n[problem]\nkind = ln_ball\nn = 3\nK = 6\nR = 1/0\n", "rational"),
    ],
)
def test_config_errors(text, message):
    with pytest.raises(ConfigError, match=message):
        parse_config(text)


def test_poly_and_forcing_parsers():
    assert parse_poly("3/4") == F(3, 4)
    assert parse_poly("2,0: 1/2; 2,1: -1/3") == TangentialPoly(2, {(2, 0): F(1, 2), (2, 1): F(-1, 3)})
    assert parse_forcing("4: 5; 6: 1; 4: 1") == {4: 6, 6: 1}
    with pytest.raises(ConfigError):
        parse_poly("2: 1; 1,1: 2")
    with pytest.raises(ConfigError):
        parse_forcing("4 5")


def test_output_dir_is_relative_to_config(tmp_path):
    path = write(tmp_path, "version = 1\n[output]\ndir = results\nseries = v.json\n")
    from polyhom.config import load_config

    cfg = load_config(path)
    assert cfg.output_path("series", "series.json") == tmp_path / "results" / "v.json"


# --- command line --------------------------------------------------------------------

def run(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name", ALL_CONFIGS)
def test_every_shipped_config_runs(name, tmp_path, capsys):
    code, out, err = run(["run", CONFIGS / f"{name}.ini", "--out", tmp_path], capsys)
    assert code == 0, err
    assert any(tmp_path.iterdir())


@pytest.mark.parametrize("name", EXPANSIONS)
def test_match_and_iterate_write_identical_series(name, tmp_path, capsys):
    a, b = tmp_path / "m", tmp_path / "i"
    assert run(["match", CONFIGS / f"{name}.ini", "--out", a], capsys)[0] == 0
    assert run(["iterate", CONFIGS / f"{name}.ini", "--out", b], capsys)[0] == 0
    assert (a / "series.json").read_bytes() == (b / "series.json").read_bytes()


@pytest.mark.parametrize("name", ["hemisphere_n3", "friedman", "planted_resonance"])
def test_runs_are_deterministic(name, tmp_path, capsys):
    outs = []
    for d in ("one", "two"):
        run(["run", CONFIGS / f"{name}.ini", "--out", tmp_path / d], capsys)
        outs.append({p.name: p.read_bytes() for p in (tmp_path / d).iterdir()})
    assert outs[0] == outs[1]


def test_iterate_ln_ball_fixture(tmp_path, capsys):
    path = write(tmp_path, "version = 1\ncommand = iterate\n[problem]\nkind = ln_ball\nn = 4\nK = 10\n")
    code, out, _ = run(["run", path, "--out", tmp_path / "o"], capsys)
    assert code == 0
    assert "decay verdict: PASS" in out
    series = series_from_json((tmp_path / "o" / "series.json").read_text())
    assert {i: c.constant_term() for (i, _), c in series.items()} == {k: F(1, 2**k) for k in range(1, 11)}
    csv = (tmp_path / "o" / "majorant.csv").read_text()
    assert "fitted_ratio" in csv and "fit_points" in csv


def test_expand_homogeneous_is_single_monomial(tmp_path, capsys):
    code, out, _ = run(["expand", CONFIGS / "linear_homogeneous.ini", "--out", tmp_path], capsys)
    assert code == 0
    report = (tmp_path / "expansion.txt").read_text().splitlines()
    assert "term_count=1" in report
    assert [l for l in report if l.startswith("c[")] == ["c[3,0]=1"]


def test_expand_planted_resonance(tmp_path, capsys):
    code, _, _ = run(["expand", CONFIGS / "planted_resonance.ini", "--out", tmp_path], capsys)
    assert code == 0
    report = (tmp_path / "expansion.txt").read_text()
    assert "log_obstruction=5/4" in report
    assert "c[4,1]=5/4" in report


def test_validate_hemisphere(tmp_path, capsys):
    code, out, err = run(["validate", CONFIGS / "hemisphere_growth_n3.ini", "--out", tmp_path], capsys)
    assert code == 0, err
    assert "tangential radius ratio" in out
    assert (tmp_path / "grid.csv").exists() and (tmp_path / "slopes.csv").exists()


def test_ln_coeffs_report(tmp_path, capsys):
    code, out, _ = run(["ln-coeffs", CONFIGS / "ln_coeffs.ini", "--out", tmp_path], capsys)
    assert code == 0
    assert "sum: c1=1/4 c31=-3/4" in out
    assert "unit_ball_computed: c1=1/4 c31=0" in out


def test_friedman_command(tmp_path, capsys):
    code, out, _ = run(["friedman", CONFIGS / "friedman.ini", "--out", tmp_path], capsys)
    assert code == 0
    assert "B0_tilde=200" in out and "verdict=PASS" in out


@pytest.mark.parametrize(
    "text,code",
    [
        ("version = 1\ncommand = match\nbogus = 1\n", 2),
        ("version = 1\ncommand = match\n[tolerances]\nslope = -1\n", 2),
        ("version = 1\ncommand = validate\n[problem]\nkind = ln_halfspace\nn = 3\nK = 6\ndatum = 1\n", 2),
        ("version = 1\ncommand = match\n", 2),
        ("version = 1\ncommand = match\n[problem]\nkind = linear\nn = 0\nm_low = 1\nm_high = 4\nK = 6\n", 3),
        ("version = 1\ncommand = match\n[problem]\nkind = ln_ball\nn = 2\nK = 6\n", 3),
    ],
)
def test_exit_codes(text, code, tmp_path, capsys):
    path = write(tmp_path, text)
    got, _, err = run(["run", path, "--out", tmp_path / "o"], capsys)
    assert got == code
    assert err.startswith("error:")


def test_failed_check_exits_4(tmp_path, capsys):
    text = "version = 1\ncommand = iterate\n[problem]\nkind = ln_ball\nn = 3\nK = 8\n[tolerances]\ndecay_ratio = 1e-9\n"
    path = write(tmp_path, text)
    code, out, err = run(["run", path, "--out", tmp_path / "o"], capsys)
    assert code == 4
    assert "decay verdict: FAIL" in out
    assert (tmp_path / "o" / "majorant.csv").exists()


def test_missing_config_file(tmp_path, capsys):
    assert run(["match", tmp_path / "nope.ini"], capsys)[0] == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "polyhom", "match", str(CONFIGS / "ln_ball_n3.ini"), "--out", str(tmp_path)],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    data = json.loads((tmp_path / "series.json").read_text())
    assert data["format"] == "polyhom.logseries"
