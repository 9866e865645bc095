import json
from pathlib import Path

import pytest
import yaml

from nholo.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, EXIT_VERIFY, main, run_compute
from nholo.config import ConfigError, load_config, parse_config

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

FLAT = {
    "mode": "dmetric",
    "dims": {"n": 2, "m": 2},
    "metric": {"g": [["1", "0"], ["0", "1"]], "h": [["1", "0"], ["0", "1"]]},
    "nconnection": [["0", "0"], ["0", "0"]],
    "points": {"explicit": [[0.1, 0.2, 0.3, 0.4]]},
    "outputs": ["curvature", "charforms"],
}


def _write(tmp_path, data, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data) if isinstance(data, dict) else data)
    return str(path)


def _run(tmp_path, *args):
    out = tmp_path / "report.json"
    code = main([*args, "--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_minimal_lagrangian_config():
    cfg = parse_config({"mode": "lagrangian", "dims": {"n": 1, "m": 1}, "lagrangian": "0.5*y1^2", "points": {"explicit": [[0, 1]]}})
    assert cfg.points().shape == (1, 2)
    assert cfg.tolerances["metricity"] == 1e-9


def test_config_errors_are_collected():
    bad = {
        "mode": "dmetric",
        "dims": {"n": 2, "m": 2},
        "metric": {"g": [["1", "0"], ["0", "1"]]},
        "outputs": ["torsion", "torsion", "nonsense"],
    }
    with pytest.raises(ConfigError) as err:
        parse_config(bad)
    text = "\n".join(err.value.errors)
    assert "h" in text and "torsion" in text and "nonsense" in text
    assert len(err.value.errors) >= 3


def test_yaml_error_reports_location(tmp_path):
    with pytest.raises(ConfigError) as err:
        load_config(_write(tmp_path, "mode: [dmetric\ndims: {n: 1"))
    assert "line" in err.value.errors[0]


def test_lagrangian_sampling_avoids_slit():
    cfg = parse_config(
        {"mode": "lagrangian", "dims": {"n": 1, "m": 1}, "lagrangian": "0.5*y1^2", "points": {"sample": {"count": 50, "box": [-0.01, 0.01], "seed": 1}}}
    )
    pts = cfg.points()
    assert len(pts) == 50 and (abs(pts[:, 1]) >= 1e-3).all()


def test_flat_compute_is_zero(tmp_path):
    code, rep = _run(tmp_path, "compute", _write(tmp_path, FLAT))
    assert code == EXIT_OK
    objs = rep["payload"]["results"][0]["objects"]
    assert all(not any(map(any, sum(sum(b, []), []))) for b in objs["curvature"].values())
    ch = objs["charforms"]["ch"]
    assert ch[0]["coef"] == [4.0]
    assert not any(ch[1]["coef"]) and not any(ch[2]["coef"])


def test_sasaki_example_config():
    cfg = load_config(CONFIGS / "sasaki_1d.yaml")
    report, code = run_compute(cfg)
    assert code == EXIT_OK
    first = report.payload()["results"][0]["objects"]
    assert first["nconnection"][0][0] == pytest.approx(0.4)
    assert first["canonical_dconnection"]["L_h"][0][0][0] == pytest.approx(0.5, abs=1e-10)


def test_verify_passes_on_shipped_configs(tmp_path):
    for name in ("dmetric_2x2.yaml", "sasaki_1d.yaml", "ansatz_2x1.yaml"):
        code, rep = _run(tmp_path, "verify", str(CONFIGS / name))
        assert code == EXIT_OK, (name, rep["payload"]["checks"])
        assert rep["payload"]["summary"]["failed"] == 0
    code, _ = _run(tmp_path, "verify", _write(tmp_path, FLAT))
    assert code == EXIT_OK


def test_printed_variant_fails_verification(tmp_path):
    code, rep = _run(tmp_path, "verify", str(CONFIGS / "printed_vv.yaml"))
    assert code == EXIT_VERIFY
    failed = {c["name"] for c in rep["payload"]["checks"] if not c["passed"]}
    # the printed vertical block is neither metric nor symmetric
    assert {"metricity", "torsion_hh_vv"} <= failed


def test_geodesic_command(tmp_path):
    code, rep = _run(tmp_path, "geodesic", str(CONFIGS / "sphere_geodesic.yaml"))
    assert code == EXIT_OK
    x_end = rep["payload"]["geodesics"][0]["x"][-1]
    assert x_end[1] == pytest.approx(6.283185307179586, abs=1e-4)
    code, _ = _run(tmp_path, "geodesic", str(CONFIGS / "dmetric_2x2.yaml"))
    assert code == EXIT_CONFIG


def test_seed_and_points_overrides(tmp_path):
    path = str(CONFIGS / "dmetric_2x2.yaml")
    _, a = _run(tmp_path, "compute", path, "--seed", "3", "--points", "2")
    _, b = _run(tmp_path, "compute", path, "--seed", "3", "--points", "2")
    _, c = _run(tmp_path, "compute", path, "--seed", "4", "--points", "2")
    assert a["payload"] == b["payload"]
    assert len(a["payload"]["points"]) == 2
    assert a["payload"]["points"] != c["payload"]["points"]


def test_tolerance_override_and_unknown_name(tmp_path):
    path = str(CONFIGS / "dmetric_2x2.yaml")
    code, rep = _run(tmp_path, "verify", path, "--tol", "einstein_trace=0")
    assert code == EXIT_VERIFY
    assert all(c["tolerance"] == 0 for c in rep["payload"]["checks"] if c["name"] == "einstein_trace")
    code, _ = _run(tmp_path, "verify", path, "--tol", "bogus=1")
    assert code == EXIT_CONFIG
    assert main(["verify", path, "--tol", "missing-equals"]) == EXIT_CONFIG


def test_numeric_failure_exit_code(tmp_path):
    degenerate = dict(FLAT, metric={"g": [["x1", "0"], ["0", "1"]], "h": [["1", "0"], ["0", "1"]]})
    degenerate["points"] = {"explicit": [[0.0, 0.2, 0.3, 0.4]]}
    code, rep = _run(tmp_path, "compute", _write(tmp_path, degenerate))
    assert code == EXIT_NUMERIC
    assert rep["payload"]["errors"][0]["point_index"] == 0


def test_thread_count_does_not_change_payload(tmp_path, monkeypatch):
    path = str(CONFIGS / "dmetric_2x2.yaml")
    monkeypatch.setenv("NHOLO_THREADS", "1")
    _, serial = _run(tmp_path, "verify", path)
    monkeypatch.setenv("NHOLO_THREADS", "4")
    _, threaded = _run(tmp_path, "verify", path)
    assert json.dumps(serial["payload"], sort_keys=True) == json.dumps(threaded["payload"], sort_keys=True)
    assert serial["metadata"]["config_hash"] == threaded["metadata"]["config_hash"]


def test_exponent_without_dot_is_a_number(tmp_path):
    text = "mode: lagrangian\ndims: {n: 1, m: 1}\nlagrangian: '0.5*y1^2'\npoints: {explicit: [[0, 1]]}\ntolerances: {metricity: 1e-12}\n"
    assert load_config(_write(tmp_path, text)).tolerances["metricity"] == 1e-12
