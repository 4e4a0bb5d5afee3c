import json
import math

import pytest

from tractforge.cli import RunConfig, cmd_dispatch, config_from_dict, config_load, thread_cap
from tractforge.errors import ConfigError
from tractforge.report import CertLine, CertReport, canonical_json, export_report, render
from tractforge.tower import TowerScalar


def run(capsys, *argv):
    code = cmd_dispatch(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def toy_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("toy") / "one.json"
    assert cmd_dispatch(["toy", "build", "--wiggle", "8,16,0.5", "--nu0", "0.3", "--x-close", "32",
                         "--out", str(path)]) == 0
    return path


# ------------------------------------------------------------------ report
def _report():
    rep = CertReport("demo", constants={"C": 30.0})
    rep.add(CertLine("a", True, 1.0, 2.0, "<"))
    rep.add(CertLine("b", False, TowerScalar(2, 21.3), 0.1, ">", 1e-3, "too small"))
    return rep


def test_canonical_json_is_byte_stable():
    rep = _report()
    first = render(rep, "json")
    assert first == render(_report(), "json")
    assert json.loads(first)["lines"][1]["lhs"] == {"level": 2, "mantissa": 21.3}
    assert canonical_json({"b": 0.1, "a": [1, 2.0, math.inf]}) == '{"a":[1,2.0,"inf"],"b":0.10000000000000001}'


def test_csv_and_text_forms(tmp_path):
    rep = _report()
    csv_text = render(rep, "csv")
    assert csv_text.splitlines()[0] == "claim,passed,lhs,relation,rhs,tolerance,detail"
    assert csv_text.splitlines()[2].startswith("b,0,exp^2(21.3),>,0.10000000000000001")
    text = render(rep, "text")
    assert text.startswith("demo: FAIL")
    assert "FAIL b" in text and "[too small]" in text
    assert rep.failed_claims == ["b"]
    path = tmp_path / "r.json"
    assert export_report(rep, "json", path) == path.read_text()
    with pytest.raises(ValueError):
        render(rep, "xml")


# ------------------------------------------------------------------ config
def test_config_defaults(tmp_path):
    path = tmp_path / "c.json"
    path.write_text('{"command": "datum"}')
    cfg = config_load(str(path))
    assert (cfg.C, cfg.nu0, cfg.tol) == (30.0, 60.0, 1e-3)
    again = config_from_dict(json.loads(cfg.dumps()))
    assert again == cfg


@pytest.mark.parametrize("data,field", [
    ({"command": "datum", "tol": -1}, "tol"),
    ({"command": "datum", "C": 1.0}, "C"),
    ({"command": "datum", "N": 0}, "N"),
    ({"command": "datum", "format": "xml"}, "format"),
    ({"command": "datum", "r0": "lots"}, "r0"),
    ({"command": "datum", "colour": 1}, "colour"),
    ({"command": "nope"}, "command"),
    ({}, "command"),
])
def test_config_errors_name_field(data, field):
    with pytest.raises(ConfigError) as info:
        config_from_dict(data)
    assert info.value.field == field


def test_config_bad_json(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        config_load(str(path))


def test_thread_cap(monkeypatch):
    monkeypatch.delenv("TRACTFORGE_THREADS", raising=False)
    assert thread_cap() is None
    monkeypatch.setenv("TRACTFORGE_THREADS", "2")
    assert thread_cap() == 2
    for bad in ("0", "two"):
        monkeypatch.setenv("TRACTFORGE_THREADS", bad)
        with pytest.raises(ConfigError):
            thread_cap()


def test_bad_thread_env_exits_2(capsys, monkeypatch):
    monkeypatch.setenv("TRACTFORGE_THREADS", "-3")
    code, _, err = run(capsys, "datum", "gen", "--dry-run")
    assert code == 2 and "TRACTFORGE_THREADS" in err


# ------------------------------------------------------------------ dispatch
def test_unknown_flag_exits_2(capsys):
    assert run(capsys, "datum", "gen", "--frobnicate")[0] == 2
    assert run(capsys, "nonsense")[0] == 2


def test_datum_gen_writes_records(capsys, tmp_path):
    path = tmp_path / "d.json"
    code, out, _ = run(capsys, "datum", "gen", "--n", "25", "--out", str(path))
    assert code == 0
    assert "datum: 25 records, validation pass" in out
    data = json.loads(path.read_text())
    assert len(data["terms"]) == 25
    code, out, _ = run(capsys, "datum", "validate", "--in", str(path), "--format", "text")
    assert code == 0 and out.startswith("datum validation: PASS")


def test_datum_gen_to_stdout(capsys):
    code, out, err = run(capsys, "datum", "gen", "--n", "3")
    assert code == 0
    assert len(json.loads(out)["terms"]) == 3
    assert "3 records, validation pass" in err


def test_datum_failure_exits_1(capsys):
    code, _, err = run(capsys, "datum", "gen", "--r0", "100", "--C", "300", "--n", "1")
    assert code == 1 and "validation fail" in err


def test_datum_config_error(capsys):
    code, _, err = run(capsys, "datum", "gen", "--C", "0.5")
    assert code == 2 and "config error in C" in err
    assert run(capsys, "datum", "validate")[0] == 2


def test_dry_run(capsys, toy_file):
    for argv in (["datum", "gen", "--dry-run"], ["theta", "check", "--dry-run"],
                 ["map", "build", "--toy", str(toy_file), "--dry-run"],
                 ["shoot", "solve", "--toy", str(toy_file), "--dry-run"],
                 ["certify", "--toy", str(toy_file), "--dry-run"],
                 ["growth", "eval", "--t", "100", "--dry-run"]):
        code, out, _ = run(capsys, *argv)
        assert code == 0 and "inputs valid" in out, argv


def test_theta_literal_grid_fails(capsys):
    code, out, err = run(capsys, "theta", "check")
    assert code == 1
    assert out.splitlines()[0].startswith("t,")
    assert "theta check: fail" in err


def test_theta_tower_grid_passes(capsys):
    code, _, err = run(capsys, "theta", "check", "--alpha", "1", "--grid", "loglog:30:2.75:1e8")
    assert code == 0 and "pass" in err
    code, _, _ = run(capsys, "theta", "derivative", "--grid", "geometric:25:100:1e12", "--format", "json")
    assert code == 0


def test_toy_build_invalid(capsys):
    code, _, err = run(capsys, "toy", "build", "--wiggle", "5,12,0.5", "--nu0", "0.5", "--x-close", "20")
    assert code == 2 and "InvalidGeometry" in err
    assert run(capsys, "toy", "build", "--wiggle", "8,16", "--nu0", "0.5", "--x-close", "20")[0] == 2


def test_map_eval_and_trace(capsys, toy_file, tmp_path):
    code, out, _ = run(capsys, "map", "eval", "--toy", str(toy_file), "--z", "5")
    assert code == 0
    assert json.loads(out)["abs"] == pytest.approx(5.0, rel=1e-8)
    code, out, _ = run(capsys, "map", "trace", "--toy", str(toy_file), "--rho", "20")
    assert code == 0 and out.startswith("angle,re_z,im_z")
    assert run(capsys, "map", "eval", "--toy", str(toy_file))[0] == 2
    assert run(capsys, "map", "eval", "--toy", str(tmp_path / "missing.json"), "--z", "5")[0] == 2


def test_shoot_and_certify(capsys, toy_file, tmp_path):
    log = tmp_path / "log.json"
    code, out, err = run(capsys, "shoot", "solve", "--toy", str(toy_file), "--transcript", str(log))
    assert code == 0, err
    res = json.loads(out)
    assert res["deltas"]["residual"] <= 1e-3
    assert json.loads(log.read_text())["map_builds"] > 0
    code, out, _ = run(capsys, "certify", "--toy", str(toy_file))
    assert code == 0 and out.startswith("certify: PASS")
    code, _, err = run(capsys, "shoot", "solve", "--toy", str(toy_file), "--targets", "1,2")
    assert code == 2 and "targets" in err


def test_growth_commands(capsys, toy_file):
    code, out, _ = run(capsys, "growth", "eval", "--t", "1e6", "--w", "1e12")
    assert code == 0
    data = json.loads(out)
    assert TowerScalar.parse(data["phi"]).mantissa == pytest.approx(math.log(192763558.7331489), rel=1e-12)
    code, out, _ = run(capsys, "growth", "bracket", "--grid", "geometric:10:1e3:1e12")
    assert code == 0 and "threshold" in out
    code, out, _ = run(capsys, "growth", "report", "--toy", str(toy_file), "--samples", "20")
    assert code == 0 and "C_emp" in out
    assert run(capsys, "growth", "eval")[0] == 2


def test_run_config_json_omits_empty():
    data = RunConfig("datum").to_json()
    assert "extra" not in data and "toy" not in data
