import json
import shutil
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from disklab import orbits
from disklab.cli import main, shipped_suite
from disklab.experiments import (EXPERIMENTS, REPORT_SCHEMA, ExperimentConfig, UsageError,
                                 evaluate_criterion, run_experiment, verify_suite, write_report)

B2 = {"kind": "weighted_backward_shift", "dim": 32, "weights": {"mode": "constant", "value": 2}}
DS = {"kind": "direct_sum_scalar", "alpha": 2,
      "inner": {"kind": "weighted_backward_shift", "dim": 32, "weights": {"mode": "constant", "value": 4}}}
TARGETS = {"source": "enumerator", "support": 4, "start": 1, "count": 5}

SMALL = {
    "orbit": {"operator": B2, "parameters": {"horizon": 5, "vector": {"source": "basis", "index": 3}}},
    "density": {"operator": B2, "parameters": {"horizon": 20, "targets": TARGETS,
                                               "vector": {"source": "random", "seed": 3}}},
    "numrange": {"operator": B2, "parameters": {"theta_count": 64}},
    "coverage": {"operator": B2, "parameters": {"horizon": 5, "grid": {"half_width": 1, "step": 0.5}}},
    "criterion": {"operator": B2, "parameters": {"n_ks": {"start": 1, "stop": 20}, "sample_count": 5,
                                                 "support": 2, "tolerance": 1e-5}},
    "build-vector": {"operator": {**B2, "dim": 64}, "parameters": {"targets": TARGETS, "epsilon": 1e-3}},
    "transfer": {"operator": {**DS["inner"], "dim": 128},
                 "parameters": {"alpha": 2, "targets": TARGETS, "k_start": 30,
                                "lambdas": [1, {"re": 0, "im": 0.5}]}},
    "counterexample": {"operator": DS, "parameters": {"count": 2, "horizon": 50}},
    "spectrum": {"operator": DS},
    "hierarchy": {"operator": {**B2, "dim": 64}, "parameters": {"targets": TARGETS, "horizon": 40,
                                                                "vector": {"source": "built"}}},
    "argmin": {"parameters": {"pairs": 5, "radial": 50, "angular": 50}},
}


def _cfg(name, **extra):
    return {"schema_version": "disklab.config/1", "experiment": name, **SMALL[name], **extra}


def _write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def _err(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


@pytest.mark.parametrize("name", EXPERIMENTS)
def test_every_subcommand_runs(name, tmp_path, capsys):
    path = _write(tmp_path, _cfg(name))
    assert main([name, "--config", path]) == 0
    env = json.loads(capsys.readouterr().out)
    jsonschema.validate(env, REPORT_SCHEMA)
    assert env["experiment"] == name and env["config"]["experiment"] == name


def test_counterexample_example(capsys, tmp_path):
    path = _write(tmp_path, _cfg("counterexample"))
    main(["counterexample", "--config", path])
    env = json.loads(capsys.readouterr().out)
    assert env["flags"]["truncation_dim"] == 33
    assert env["results"]["min_certificate"] >= 1 - 1e-12


def test_density_with_built_vector_covers_all():
    env, _ = run_experiment(str(shipped_suite() / "ac03_density.json"))
    assert env["results"]["covered_fraction"] == 1.0


def test_build_vector_results():
    env, _ = run_experiment(_cfg("build-vector"))
    r = env["results"]
    assert r["certificate_sound"] and r["covered_fraction"] == 1.0


def test_spectrum_results():
    env, _ = run_experiment(_cfg("spectrum"))
    assert env["results"]["eigenvalues"] == [{"re": 2.0, "im": -0.0}]
    assert env["results"]["all_outside_unit_disk"] is True


def test_malformed_json_is_usage_error(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"experiment": "orbit", ')
    assert main(["orbit", "--config", str(path)]) == 2
    assert _err(capsys)["error"] == "usage"


@pytest.mark.parametrize("patch, field", [
    ({"parameters": {"horizon": -1}}, "parameters/horizon"),
    ({"operator": {**B2, "dim": 1}}, "operator/dim"),
    ({"experiment": "nonsense"}, "experiment"),
])
def test_schema_errors_name_the_field(tmp_path, capsys, patch, field):
    cfg = {**_cfg("orbit"), **patch}
    assert main(["orbit", "--config", _write(tmp_path, cfg)]) == 2
    assert _err(capsys)["field"] == field


def test_missing_operator_is_named(tmp_path, capsys):
    cfg = _cfg("orbit")
    del cfg["operator"]
    assert main(["orbit", "--config", _write(tmp_path, cfg)]) == 2
    assert _err(capsys)["field"] == "operator"


def test_subcommand_mismatch_and_missing_file(tmp_path, capsys):
    assert main(["numrange", "--config", _write(tmp_path, _cfg("orbit"))]) == 2
    assert _err(capsys)["field"] == "experiment"
    assert main(["orbit", "--config", str(tmp_path / "nope.json")]) == 2
    with pytest.raises(SystemExit) as info:
        main(["orbit"])
    assert info.value.code == 2


def test_unsupported_family_exit_code(tmp_path, capsys):
    cfg = {"experiment": "spectrum", "operator": {"kind": "dense_matrix", "dim": 2,
                                                  "entries": [[1, 0], [0, 1]]}}
    assert main(["spectrum", "--config", _write(tmp_path, cfg)]) == 3
    assert _err(capsys)["error"] == "unsupported_family"


def test_other_library_errors_exit_one(tmp_path, capsys):
    # 20 targets do not fit in dimension 32
    cfg = _cfg("build-vector", operator=B2)
    cfg["parameters"] = {"targets": {**TARGETS, "count": 20}}
    assert main(["build-vector", "--config", _write(tmp_path, cfg)]) == 1
    assert _err(capsys)["error"] == "CapacityError"


def test_overflow_is_flagged_not_fatal(tmp_path, capsys):
    cfg = _cfg("orbit")
    cfg["operator"] = {**B2, "weights": {"mode": "constant", "value": 1e100}}
    cfg["parameters"] = {"horizon": 10, "vector": {"source": "explicit",
                                                   "vector": {"re": [1.0] * 32, "im": [0.0] * 32}}}
    assert main(["orbit", "--config", _write(tmp_path, cfg)]) == 0
    assert json.loads(capsys.readouterr().out)["flags"]["overflow"] is True


def test_output_formats(tmp_path):
    path = _write(tmp_path, _cfg("orbit"), "orb.json")
    out = tmp_path / "out"
    assert main(["orbit", "--config", path, "--out", str(out), "--format", "both"]) == 0
    env = json.loads((out / "orb.json").read_text())
    jsonschema.validate(env, REPORT_SCHEMA)
    lines = (out / "orb.csv").read_text().splitlines()
    assert lines[0] == "n,norm" and len(lines) == 7
    assert main(["orbit", "--config", path, "--out", str(tmp_path / "c"), "--format", "csv"]) == 0
    assert [p.name for p in (tmp_path / "c").iterdir()] == ["orb.csv"]


def test_csv_to_stdout(tmp_path, capsys):
    assert main(["orbit", "--config", _write(tmp_path, _cfg("orbit")), "--format", "csv"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "n,norm"


def test_deterministic_apart_from_timestamp():
    a, ta = run_experiment(_cfg("density"))
    b, tb = run_experiment(_cfg("density"))
    a.pop("timestamp"), b.pop("timestamp")
    assert a == b and ta == tb
    c, _ = run_experiment(_cfg("density"), seed=9)
    assert c["config"]["parameters"]["seed"] == 9


def test_report_round_trip(tmp_path):
    env, table = run_experiment(_cfg("criterion"))
    [path] = write_report(env, table, tmp_path, "crit", "json")
    back = json.loads(path.read_text())
    assert back == json.loads(json.dumps(env))
    cfg = ExperimentConfig(back["config"])
    again, _ = run_experiment(cfg)
    again.pop("timestamp"), back.pop("timestamp")
    assert again == back


def test_evaluate_criterion_comparisons():
    env = {"results": {"x": 1.0, "ok": True, "arr": [0.5]}}
    assert evaluate_criterion(env, {"id": "a", "observed": "/results/x", "expected": 1.1,
                                    "comparison": "eq", "tolerance": 0.2})["pass"]
    assert evaluate_criterion(env, {"id": "a", "observed": "/results/arr/0", "expected": 0.4,
                                    "comparison": "ge"})["pass"]
    assert not evaluate_criterion(env, {"id": "a", "observed": "/results/x", "expected": 0.9,
                                        "comparison": "le"})["pass"]
    assert evaluate_criterion(env, {"id": "a", "observed": "/results/ok", "expected": True,
                                    "comparison": "is"})["pass"]
    assert not evaluate_criterion(env, {"id": "a", "observed": "/results/missing", "expected": 1,
                                        "comparison": "eq"})["pass"]


def test_verify_empty_directory(tmp_path, capsys):
    with pytest.raises(UsageError):
        verify_suite(tmp_path)
    assert main(["verify", str(tmp_path)]) == 2


def test_verify_shipped_suite(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("DISKLAB_THREADS", "4")
    assert main(["verify", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert out.strip().splitlines()[-1] == "all criteria passed"
    summary = json.loads((tmp_path / "summary.json").read_text())
    ids = {r["id"] for r in summary["rows"]}
    assert ids == {f"AC{i}" for i in range(1, 11)} and summary["passed"]
    header = (tmp_path / "summary.csv").read_text().splitlines()[0]
    assert header == "criterion,config,expected,observed,tolerance,pass"


def test_wrong_sign_fault_fails_suite(tmp_path, capsys, monkeypatch):
    real = orbits._coefficients

    def wrong_sign(vs, y, mode, clip=True):
        alpha, _ = real(vs, y, mode, clip)
        if mode != "plain":
            alpha = -alpha
        return alpha, np.linalg.norm(alpha[:, None] * vs - y[None, :], axis=1)

    monkeypatch.setattr(orbits, "_coefficients", wrong_sign)
    shutil.copy(shipped_suite() / "ac08_hierarchy_b2.json", tmp_path)
    argmin = json.loads((shipped_suite() / "ac01_argmin.json").read_text())
    argmin["parameters"].update(pairs=20, radial=100, angular=100)
    (tmp_path / "ac01_argmin.json").write_text(json.dumps(argmin))
    assert main(["verify", str(tmp_path)]) == 1
    assert capsys.readouterr().out.strip().splitlines()[-1] == "failed: AC1, AC8"


def test_thread_count_does_not_change_results(tmp_path, monkeypatch):
    for name in ("orbit", "numrange", "spectrum"):
        cfg = _cfg(name)
        cfg["criteria"] = [{"id": name, "observed": "/flags/overflow", "expected": False,
                            "comparison": "is"}]
        _write(tmp_path, cfg, f"{name}.json")
    monkeypatch.setenv("DISKLAB_THREADS", "1")
    one = verify_suite(tmp_path)
    monkeypatch.setenv("DISKLAB_THREADS", "3")
    three = verify_suite(tmp_path)
    assert one == three and one["passed"]


def test_console_script(tmp_path):
    path = _write(tmp_path, _cfg("spectrum"))
    proc = subprocess.run([sys.executable, "-m", "disklab.cli", "spectrum", "--config", path],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["count"] == 1
