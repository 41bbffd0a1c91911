import json
import math

import pytest

import golden
from twospinon import cli
from twospinon.output import Table, atomic_write, fmt_real, read_csv


@pytest.fixture
def outdir(tmp_path, monkeypatch):
    monkeypatch.setenv("TWOSPINON_OUTPUT_DIR", str(tmp_path))
    return tmp_path


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_parse_real_accepts_pi_multiples():
    assert cli.parse_real("pi") == math.pi
    assert cli.parse_real("-pi/2") == -0.5 * math.pi
    assert cli.parse_real("3*pi/4") == pytest.approx(0.75 * math.pi)
    assert cli.parse_real("2pi") == 2 * math.pi
    assert cli.parse_real("1e-3") == 1e-3


def test_fmt_real_round_trips():
    for x in (math.pi, 1 / 3, 1e-300, -2.5e17, 0.1):
        assert float(fmt_real(x)) == x
    assert fmt_real(math.nan) == "nan"
    assert fmt_real(True) == "true"


def test_dcf_point_golden(capsys, outdir):
    assert run("dcf-point", "pi", "pi") == 0
    out = capsys.readouterr().out
    fields = dict(f.split("=") for f in out.split())
    assert float(fields["s_pm"]) == pytest.approx(golden.S2_PM_PI_PI, rel=1e-10)
    assert float(fields["s_xx"]) == 4 * float(fields["s_pm"])
    assert fields["in_band"] == "true"
    assert float(fields["beta1"]) == pytest.approx(-float(fields["beta2"]), rel=1e-12)


def test_dcf_point_out_of_band(capsys):
    assert run("dcf-point", "3pi", "pi/2") == 0
    out = capsys.readouterr().out
    assert "s_pm=0.0" in out and "in_band=false" in out and "beta1" not in out


def test_dcf_point_malformed(capsys):
    assert run("dcf-point", "abc", "1") == 2
    assert "not a real number" in capsys.readouterr().err


def test_unknown_command_is_usage_error(capsys):
    assert run("frobnicate") == 2


def test_dispersion_xxx(outdir):
    assert run("dispersion", "--start", -5, "--stop", 5, "--num", 101) == 0
    table = read_csv(outdir / "dispersion.csv")
    assert table.columns == ["beta", "e", "p"]
    assert len(table.rows) == 101
    assert [0.0, math.pi, -0.5 * math.pi] in [list(r) for r in table.rows]


def test_dispersion_xxz_tau_column(outdir):
    assert run("dispersion", "--model", "xxz", "--q", -0.5, "--start", 0, "--stop", 3, "--num", 31) == 0
    table = read_csv(outdir / "dispersion.csv")
    assert all(r[3] < 1e-10 for r in table.rows)
    assert table.metadata["anisotropy"]["q"] == -0.5


def test_dispersion_invalid_q(capsys, outdir):
    assert run("dispersion", "--model", "xxz", "--q", 0.5) != 0
    assert "(-1, 0)" in capsys.readouterr().err
    assert not list(outdir.iterdir())


def test_dispersion_xxz_requires_q(capsys, outdir):
    assert run("dispersion", "--model", "xxz") == 2


def test_grid_csv_and_json(outdir):
    args = ["dcf-grid", "--n-k", 5, "--n-w", 4]
    assert run(*args) == 0
    csv = read_csv(outdir / "dcf-grid.csv")
    assert csv.columns == ["k", "w", "s_pm", "s_xx"]
    assert len(csv.rows) == 20
    assert csv.metadata["quadrature"]["rel_tol"] == 1e-10
    assert "normalization" in csv.metadata
    assert run(*args, "--format", "json") == 0
    data = json.loads((outdir / "dcf-grid.json").read_text())
    assert data["schema"] == "twospinon-table/1"
    assert [list(map(float, r)) for r in data["rows"]] == [list(map(float, r)) for r in csv.rows]


def test_grid_deterministic_across_workers(outdir):
    base = ["dcf-grid", "--n-k", 7, "--n-w", 6, "--k-min", 0.1, "--k-max", 6.0]
    assert run(*base, "-o", outdir / "a.csv") == 0
    assert run(*base, "-o", outdir / "b.csv", "--workers", 3) == 0
    assert (outdir / "a.csv").read_bytes() == (outdir / "b.csv").read_bytes()


def test_grid_half_zone_runs_match(outdir):
    # the two halves of the zone are mirror images
    assert run("dcf-grid", "--k-min", 0.3, "--k-max", "pi", "--n-k", 4, "--n-w", 5, "-o", outdir / "l.csv") == 0
    assert run("dcf-grid", "--k-min", "pi", "--k-max", 2 * math.pi - 0.3, "--n-k", 4, "--n-w", 5, "-o", outdir / "r.csv") == 0
    left = read_csv(outdir / "l.csv").rows
    right = read_csv(outdir / "r.csv").rows
    lmap = {(round(r[0], 12), r[1]): r[2] for r in left}
    for k, w, s, _ in right:
        assert lmap[(round(2 * math.pi - k, 12), w)] == pytest.approx(s, rel=1e-10, abs=0)


def test_config_file_and_flag_precedence(outdir):
    cfg = outdir / "cfg.json"
    cfg.write_text(json.dumps({"dcf-grid": {"n_k": 3, "n_w": 2, "format": "json", "k_max": "pi"}}))
    assert run("--config", cfg, "dcf-grid", "--n-w", 3) == 0
    data = json.loads((outdir / "dcf-grid.json").read_text())
    params = data["metadata"]["config"]["params"]
    assert (params["n_k"], params["n_w"], params["k_max"]) == (3, 3, math.pi)
    assert len(data["rows"]) == 9


def test_config_errors(outdir, capsys):
    bad = outdir / "bad.json"
    bad.write_text(json.dumps({"no_such_option": 1}))
    assert run("--config", bad, "dcf-grid") == 2
    bad.write_text(json.dumps({"n_k": -4}))
    assert run("--config", bad, "dcf-grid") == 2
    assert run("--config", outdir / "missing.json", "dcf-grid") == 2


def test_run_config_round_trip():
    cfg = cli.RunConfig("dcf-grid", {"n_k": 3, "k_max": math.pi, "tol": 1e-10, "eps": [0.5, 0.1]})
    assert cli.RunConfig.from_json(cfg.to_json()) == cfg


def test_sumrule(outdir, capsys):
    assert run("sumrule", "--k", "pi/2,0.3") == 0
    table = read_csv(outdir / "sumrule.csv")
    got = {r[0]: r[1] for r in table.rows}
    for k, v in golden.FIXED_K_WEIGHT.items():
        assert got[k] == pytest.approx(v, rel=1e-8)


def test_sumrule_at_zone_centre_fails_loudly(outdir, capsys):
    assert run("sumrule", "--k", "pi") == 1
    assert "not integrable" in capsys.readouterr().err
    table = read_csv(outdir / "sumrule.csv")
    assert math.isnan(table.rows[0][1])


def test_ed_files_overlay_band(outdir):
    assert run("ed", "--n-sites", 8, "--n-omega", 11) == 0
    lines = read_csv(outdir / "ed-lines.csv")
    curve = read_csv(outdir / "ed-curve.csv")
    assert lines.columns == curve.columns == ["k", "w", "s_pm", "s_xx"]
    assert len(curve.rows) == 8 * 11
    report = lines.metadata["report"]
    assert report["momentum_convention"] == "shifted"
    tol = report["window_tolerance"]
    for row in report["per_k"]:
        if row["total_weight"] > 1e-12:
            assert row["lowest_omega"] >= row["w_l"] - tol
    assert report["analytic_ratio"]


def test_limit_check(outdir):
    assert run("limit-check", "--format", "json") == 0
    data = json.loads((outdir / "limit-check.json").read_text())
    meta = data["metadata"]
    assert all(meta["monotone"].values())
    assert meta["energy_scale"] == pytest.approx(1.0, abs=1e-5)
    assert len(data["rows"]) == 16


def test_atomic_write_leaves_nothing_on_failure(tmp_path):
    target = tmp_path / "out.csv"

    with pytest.raises(TypeError):
        atomic_write(target, None)
    assert list(tmp_path.iterdir()) == []
    atomic_write(target, "a\n")
    assert target.read_text() == "a\n"
    assert [p.name for p in tmp_path.iterdir()] == ["out.csv"]


def test_repeated_runs_byte_identical(outdir):
    for name in ("x.csv", "y.csv"):
        assert run("dcf-grid", "--n-k", 4, "--n-w", 4, "-o", outdir / name) == 0
    assert (outdir / "x.csv").read_bytes() == (outdir / "y.csv").read_bytes()


def test_table_json_handles_nan():
    text = Table(["a"], [[math.nan], [1.5]], {}).to_json()
    assert json.loads(text)["rows"] == [[None], [1.5]]


def test_module_entry_point():
    import subprocess
    import sys

    out = subprocess.run([sys.executable, "-m", "twospinon", "dcf-point", "pi", "pi"], capture_output=True, text=True)
    assert out.returncode == 0 and "in_band=true" in out.stdout
    out = subprocess.run([sys.executable, "-m", "twospinon", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "0.1.0" in out.stdout
