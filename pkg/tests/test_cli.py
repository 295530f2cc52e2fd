import json
import math

import pytest

from slitlab import cli
from slitlab.io import atomic_open, fmt, read_csv, svg_lines, write_csv

SQUARE = """\
outer.kind = rectangle
outer.a = 1
outer.b = 1
chart_radius_r0 = 0.25
slit.0.cx = 0.5
slit.0.cy = 0.5
slit.0.t = 0.2
slit.0.bc = d
"""


@pytest.fixture
def domain(tmp_path):
    p = tmp_path / "square.domain"
    p.write_text(SQUARE)
    return p


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_mathieu_table(tmp_path):
    out = tmp_path / "m"
    assert run("mathieu", "--h", "0.1", "--modes", "5", "--out", out) == 0
    header, rows = read_csv(out / "mathieu.csv")
    assert header == ["i", "h", "b", "class"] and len(rows) == 5
    assert float(rows[0][2]) == pytest.approx(0.005, rel=0.1)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "mathieu" and manifest["artifacts"] == ["mathieu.csv"]
    assert set(manifest["versions"]) == {"slitlab", "numpy", "scipy", "python", "kernels"}
    # the config echo is the key = value record, so values are strings
    assert manifest["config"]["h"] == "0.1" and manifest["config"]["modes"] == "5"


def test_mathieu_radial_dumps(tmp_path):
    out = tmp_path / "m"
    assert run("mathieu", "--h", "0.3", "--modes", "2", "--x-max", "1.0", "--out", out) == 0
    header, rows = read_csv(out / "radial_1.csv")
    assert header[0] == "x" and float(rows[0][0]) == 0.0


def test_single_point_track(tmp_path, domain):
    out = tmp_path / "t"
    assert run("track", "--domain", domain, "--t-grid", "0.1", "--k", "3", "--resolution", "12", "--out", out) == 0
    header, rows = read_csv(out / "branches.csv")
    assert header == ["t", "k", "E", "overlap"] and len(rows) == 3
    assert all(r[3] == "" for r in rows)
    assert not (out / "extrapolation.csv").exists()


def test_track_grid_and_plot(tmp_path, domain):
    out = tmp_path / "t"
    assert run("track", "--domain", domain, "--t-grid", "geom:0.2:0.5:4", "--k", "2", "--resolution", "12",
               "--out", out) == 0
    _, rows = read_csv(out / "branches.csv")
    assert [float(r[0]) for r in rows[::2]] == [0.2, 0.1, 0.05, 0.025]
    assert all(0 <= float(r[3]) <= 1 for r in rows[2:])
    assert (out / "extrapolation.csv").exists()
    assert (out / "branches.svg").read_text().startswith("<svg")


def test_malformed_domain_exit_2_no_artifacts(tmp_path):
    bad = tmp_path / "bad.domain"
    bad.write_text("outer.kind = rectangle\nouter.a = one\n")
    out = tmp_path / "o"
    assert run("fem-solve", "--domain", bad, "--out", out) == 2
    assert not out.exists()


def test_invalid_parameters_exit_2(tmp_path, domain):
    out = tmp_path / "o"
    assert run("track", "--domain", domain, "--t-grid", "0.05,0.1", "--out", out) == 2
    assert run("track", "--domain", domain, "--t-grid", "0.1", "--resolution", "4", "--out", out) == 2
    assert run("track", "--domain", domain, "--t-grid", "0.3", "--out", out) == 2
    assert run("fem-solve", "--out", out) == 2
    assert run("nonsense") == 2
    assert not out.exists()


def test_numerical_failure_exit_3(tmp_path):
    out = tmp_path / "o"
    assert run("mathieu", "--h", "0.5", "--truncation", "3", "--out", out) == 3
    assert sorted(p.name for p in out.iterdir()) == ["diagnostic.txt"]
    text = (out / "diagnostic.txt").read_text()
    assert "ResolutionError" in text and "truncation = 3" in text


def test_byte_identical_reruns(tmp_path, domain):
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert run("gap-scan", "--domain", domain, "--t-grid", "0.2,0.1,0.05", "--k", "5", "--resolution", "12",
                   "--out", out) == 0
    for name in ("gaps.csv", "candidates.csv", "gaps.svg"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    # manifests differ only in the echoed output directory
    ma, mb = (json.loads((o / "manifest.json").read_text()) for o in outs)
    assert ma["config"].pop("out") != mb["config"].pop("out")
    assert ma == mb


def test_config_file_and_override(tmp_path, domain):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"domain = {domain}\nk = 4\nresolution = 12\nt = 0.1\n")
    out = tmp_path / "o"
    assert run("fem-solve", "--config", cfg, "--k", "3", "--out", out) == 0
    _, rows = read_csv(out / "spectrum.csv")
    assert len(rows) == 3
    m = json.loads((out / "manifest.json").read_text())
    assert m["config"]["k"] == "3" and m["config"]["t"] == "0.1"
    assert m["domain"][0].startswith("outer.kind")


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("h = 0.2\nbogus = 1\n")
    assert run("mathieu", "--config", cfg, "--out", tmp_path / "o") == 2


def test_sov_and_symmetry(tmp_path):
    out = tmp_path / "s"
    assert run("sov", "--t", "0.3", "--r0", "1", "--e-max", "20", "--out", out) == 0
    header, rows = read_csv(out / "sov.csv")
    assert header == ["i", "E", "nodes", "residual"] and len(rows) >= 3
    out = tmp_path / "y"
    assert run("symmetry-check", "--resolution", "12", "--n-compare", "5", "--out", out) == 0
    header, rows = read_csv(out / "symmetry.csv")
    assert header == ["j", "full", "merged", "rel_error"] and len(rows) == 5


def test_parse_t_grid():
    assert list(cli.parse_t_grid("geom:0.4:0.5:3")) == [0.4, 0.2, 0.1]
    for bad in ("0.1,0.1", "-0.1", "geom:0.1:2:3", "geom:0.1:0.5", "x"):
        with pytest.raises(cli.ConfigurationError):
            cli.parse_t_grid(bad)


def test_fmt_round_trips():
    import numpy as np

    for v in (0.1, 1 / 3, 1e-300, np.float64(2.5), 7):
        assert fmt(v) in ("0.1", repr(1 / 3), "1e-300", "2.5", "7")
    assert fmt(math.nan) == "" and fmt(None) == ""


def test_atomic_open_leaves_nothing_on_error(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("old\n")
    with pytest.raises(RuntimeError):
        with atomic_open(p) as fh:
            fh.write("partial")
            raise RuntimeError
    assert p.read_text() == "old\n"
    assert [q.name for q in tmp_path.iterdir()] == ["x.csv"]


def test_csv_and_svg(tmp_path):
    write_csv(tmp_path / "a.csv", ["x", "y"], [[1, 0.5], [2, None]])
    assert (tmp_path / "a.csv").read_text() == "x,y\n1,0.5\n2,\n"
    svg_lines(tmp_path / "p.svg", {"E": ([0.2, 0.1], [3.0, 2.0])}, title="t & E", logx=True)
    text = (tmp_path / "p.svg").read_text()
    assert "<polyline" in text and "t &amp; E" in text


def test_audit_outputs(tmp_path, domain):
    out = tmp_path / "a"
    assert run("audit", "--domain", domain, "--t-grid", "geom:0.2:0.5:5", "--resolution", "16", "--out", out) == 0
    header, rows = read_csv(out / "diagnostics.csv")
    assert header == ["t", "t2E", "lambda", "kappa", "qU", "NU", "qdotU", "NdotU", "mass_ratio", "min_gap"]
    assert len(rows) == 5 and all(math.isfinite(float(v)) for r in rows for v in r)
    _, summary = read_csv(out / "summary.csv")
    names = {r[0] for r in summary}
    assert {"C_fit", "kappa_max", "epsilon", "parseval_defect"} <= names
    assert all(float(r[1]) > 0 for r in summary if r[0] == "epsilon")


def test_cross_validate(tmp_path):
    out = tmp_path / "c"
    assert run("cross-validate", "--resolution", "8", "--out", out) == 0
    header, rows = read_csv(out / "cross_validate.csv")
    assert header == ["k", "E_sov", "E_fem", "E_fem_refined", "rel_err", "rel_err_refined"] and len(rows) == 5
    assert all(float(r[5]) < float(r[4]) for r in rows)


def test_console_script_help():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "slitlab.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for name in ("mathieu", "sov", "fem-solve", "track", "audit", "symmetry-check", "gap-scan", "cross-validate"):
        assert name in res.stdout
