import json
import math

import pytest

from toricdist import cli


def run_cli(args):
    return cli.main(args)


@pytest.fixture()
def segment_json(tmp_path):
    path = tmp_path / "segment.json"
    path.write_text(json.dumps({
        "dim": 1,
        "facets": [{"normal": [1], "offset": 0},
                   {"normal": [-1], "offset": -1}],
        "vertices": [[0], [1]],
    }))
    return str(path)


@pytest.fixture()
def bad_triangle_json(tmp_path):
    path = tmp_path / "tri.json"
    path.write_text(json.dumps({
        "dim": 2,
        "facets": [{"normal": [1, 0], "offset": 0},
                   {"normal": [0, 1], "offset": 0},
                   {"normal": [-2, -1], "offset": -2}],
        "vertices": [[0, 0], [1, 0], [0, 2]],
    }))
    return str(path)


def test_validate_pass(segment_json, tmp_path, capsys):
    out = tmp_path / "v.json"
    code = run_cli(["--polytope", segment_json, "--cmd", "validate",
                    "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["delzant"] is True


def test_validate_non_delzant_exit_code(bad_triangle_json, tmp_path):
    out = tmp_path / "v.json"
    code = run_cli(["--polytope", bad_triangle_json, "--cmd", "validate",
                    "--out", str(out)])
    assert code == 1
    payload = json.loads(out.read_text())
    bad = [e for e in payload["vertices"] if not e["ok"]]
    assert bad and bad[0]["vertex"] == [1, 0]


def test_peak_interior(segment_json, tmp_path):
    out = tmp_path / "peak.json"
    code = run_cli(["--polytope", segment_json, "--cmd", "peak",
                    "--x", "0.5", "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["c"] == pytest.approx(2.0)
    assert payload["det_A"] == pytest.approx(0.25)


def test_peak_sim7_interior_lattice(sim7_json, tmp_path):
    out = tmp_path / "peak.json"
    code = run_cli(["--polytope", sim7_json, "--weights", "binomial:7",
                    "--cmd", "peak", "--alpha", "2,3", "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["det_A"] == pytest.approx(12 / 7, abs=1e-9)


def test_peak_vertex(segment_json, tmp_path):
    out = tmp_path / "peak.json"
    code = run_cli(["--polytope", segment_json, "--cmd", "peak",
                    "--alpha", "1", "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["kind"] == "vertex"
    assert payload["c"] == pytest.approx(2 * math.pi)


def test_norms_csv(segment_json, tmp_path):
    out = tmp_path / "norms.csv"
    code = run_cli(["--polytope", segment_json, "--cmd", "norms",
                    "--x", "0.5", "--N", "8,16", "--k", "1,2",
                    "--out", str(out)])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("#")
    header = lines[1].split(",")
    assert header[:5] == ["N", "k", "exact_l2k_power", "asymptotic_l2k_power",
                          "ratio"]
    rows = [ln.split(",") for ln in lines[2:]]
    assert len(rows) == 4
    k1 = [r for r in rows if r[1] == "1"]
    for r in k1:
        assert float(r[4]) == pytest.approx(1.0, abs=1e-8)


def test_pointwise_csv(segment_json, tmp_path):
    out = tmp_path / "pw.csv"
    code = run_cli(["--polytope", segment_json, "--cmd", "pointwise",
                    "--x", "0.5", "--N", "64", "--out", str(out)])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    rows = [ln.split(",") for ln in lines[2:]]
    assert len(rows) == 41
    ratios = [float(r[-1]) for r in rows]
    assert max(abs(r - 1) for r in ratios) < 0.05


def test_dist_csv_and_worker_determinism(segment_json, tmp_path):
    args = ["--polytope", segment_json, "--cmd", "dist", "--x", "0.5",
            "--N", "16", "--tgrid", "geom:0.2,1.0,4", "--tol", "1e-3"]
    out1 = tmp_path / "d1.csv"
    out2 = tmp_path / "d2.csv"
    assert run_cli(args + ["--out", str(out1), "--workers", "1"]) == 0
    assert run_cli(args + ["--out", str(out2), "--workers", "3"]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().strip().splitlines()
    assert lines[1].split(",") == ["scaling", "N", "t", "value", "limit_value"]
    kinds = {ln.split(",")[0] for ln in lines[2:]}
    assert kinds == {"power", "exponential", "none"}


@pytest.fixture()
def seg2_json(tmp_path):
    path = tmp_path / "seg2.json"
    path.write_text(json.dumps({
        "dim": 1,
        "facets": [{"normal": [1], "offset": 0},
                   {"normal": [-1], "offset": -2}],
        "vertices": [[0], [2]],
    }))
    return str(path)


def test_report_all_pass(seg2_json, tmp_path):
    out = tmp_path / "report.json"
    code = run_cli(["--polytope", seg2_json, "--weights", "binomial:2",
                    "--cmd", "report", "--out", str(out)])
    payload = json.loads(out.read_text())
    assert code == 0, payload
    assert payload["all_pass"] is True
    names = {c["name"] for c in payload["checks"]}
    assert {"delzant_valid", "gradient_hessian_consistency",
            "pushforward_volume", "gamma_oracle",
            "chart_orbit_agreement", "vertex_law"} <= names


def test_missing_alpha_and_x_is_error(segment_json):
    assert run_cli(["--polytope", segment_json, "--cmd", "peak"]) == 1


def test_pointwise_boundary_rays(sim7_json, tmp_path):
    # facet and vertex rays exercise the chart branches of the grid emitter
    for alpha, ncols in (("3,0", 2), ("0,0", 2)):
        out = tmp_path / f"pw_{alpha.replace(',', '_')}.csv"
        code = run_cli(["--polytope", sim7_json, "--weights", "binomial:7",
                        "--cmd", "pointwise", "--alpha", alpha, "--N", "32",
                        "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        rows = [ln.split(",") for ln in lines[2:]]
        assert len(rows) == 41 * 41
        worst = max(abs(float(r[-1]) - 1.0) for r in rows)
        assert worst < 0.15


def test_norms_vertex_ray(sim7_json, tmp_path):
    out = tmp_path / "norms_v.csv"
    code = run_cli(["--polytope", sim7_json, "--weights", "binomial:7",
                    "--cmd", "norms", "--alpha", "0,7", "--N", "8,16",
                    "--k", "2", "--out", str(out)])
    assert code == 0
    rows = [ln.split(",") for ln in out.read_text().strip().splitlines()[2:]]
    devs = [abs(float(r[4]) - 1.0) for r in rows]
    assert devs[1] <= 0.7 * devs[0]  # vertex L4 law O(1/N) trend
