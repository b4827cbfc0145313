"""CLI dispatch, exit codes, artifact layout and byte determinism."""

import json
from pathlib import Path

import pytest

from levydirichlet.cli import EXIT_CONFIG, EXIT_OK, main


def write(tmp_path: Path, name: str, payload: dict) -> str:
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return str(p)


SOLVE_CFG = {
    "model": {"family": "stable", "alpha": 1.0, "dim": 1},
    "domain": {"shape": "ball", "center": [0.0], "radius": 1.0},
    "f": {"name": "constant", "c": -1.0},
    "g": {"name": "constant", "c": 0.0},
    "points": [[0.0], [0.3]],
    "n_samples": 5000,
    "seed": 7,
}


def test_solve_runs_and_reports(tmp_path):
    cfg = write(tmp_path, "solve.json", SOLVE_CFG)
    out = tmp_path / "out"
    assert main(["solve", "--config", cfg, "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "solve_report.json").read_text())
    assert report["estimates"][0]["value"] == pytest.approx(1.0)
    assert (out / "solve_points.png").stat().st_size > 1000
    assert (out / "solve_points.csv").read_text().startswith("point,value,std_error,n")


def test_out_dir_from_config(tmp_path):
    target = tmp_path / "from_config"
    cfg = write(tmp_path, "solve.json", {**SOLVE_CFG, "n_samples": 2000,
                                         "out_dir": str(target)})
    assert main(["solve", "--config", cfg]) == EXIT_OK
    assert (target / "solve_report.json").exists()


def test_solve_byte_deterministic(tmp_path):
    cfg = write(tmp_path, "solve.json", SOLVE_CFG)
    out1, out2, out3 = (tmp_path / n for n in ("o1", "o2", "o3"))
    main(["solve", "--config", cfg, "--out", str(out1)])
    main(["solve", "--config", cfg, "--out", str(out2)])
    main(["solve", "--config", cfg, "--out", str(out3), "--seed", "8"])
    a = (out1 / "solve_report.json").read_bytes()
    b = (out2 / "solve_report.json").read_bytes()
    c = (out3 / "solve_report.json").read_bytes()
    assert a == b
    assert a != c


def test_threads_flag_keeps_results(tmp_path):
    cfg = write(tmp_path, "solve.json", {**SOLVE_CFG, "n_samples": 20_000})
    out1, out4 = tmp_path / "t1", tmp_path / "t4"
    main(["solve", "--config", cfg, "--out", str(out1), "--threads", "1"])
    main(["solve", "--config", cfg, "--out", str(out4), "--threads", "4"])
    a = json.loads((out1 / "solve_report.json").read_text())
    b = json.loads((out4 / "solve_report.json").read_text())
    assert a["estimates"] == b["estimates"]


def test_malformed_config_exits_2_without_artifacts(tmp_path, capsys):
    cfg = write(tmp_path, "bad.json", {"bogus": 1})
    out = tmp_path / "nothing"
    assert main(["solve", "--config", cfg, "--out", str(out)]) == EXIT_CONFIG
    assert not out.exists()
    err = json.loads(capsys.readouterr().err.strip())
    assert err["error"]["kind"] == "config"


def test_invalid_model_parameters_exit_2(tmp_path):
    cfg = write(tmp_path, "bad2.json", {**SOLVE_CFG,
                                        "model": {"family": "stable", "alpha": 2.5, "dim": 1}})
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "x")]) == EXIT_CONFIG


def test_exterior_start_point_is_config_error(tmp_path):
    cfg = write(tmp_path, "bad3.json", {**SOLVE_CFG, "points": [[2.0]]})
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "z")]) == EXIT_CONFIG


def test_subcommand_mismatch_rejected(tmp_path):
    cfg = write(tmp_path, "k.json", {"subcommand": "kernel",
                                     "model": {"family": "stable", "alpha": 1.0, "dim": 1}})
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "y")]) == EXIT_CONFIG


def test_kernel_report(tmp_path):
    cfg = write(tmp_path, "kernel.json",
                {"model": {"family": "stable", "alpha": 1.5, "dim": 1}})
    out = tmp_path / "out"
    assert main(["kernel", "--config", cfg, "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "kernel_report.json").read_text())
    assert report["case"] == "compensated_W0"
    assert report["branch"] == "grad_integrable"
    csv_lines = (out / "kernel_profile.csv").read_text().splitlines()
    assert csv_lines[0] == "r,G,G1,G2,S"
    assert len(csv_lines) > 100
    assert (out / "kernel_profile.png").stat().st_size > 1000


def test_dini_check_finite_and_divergent(tmp_path):
    base = {"model": {"family": "stable", "alpha": 1.5, "dim": 2}}
    out1 = tmp_path / "fin"
    cfg = write(tmp_path, "d1.json", {**base, "modulus": {"a": 0.6, "b": 0.0}})
    assert main(["dini-check", "--config", cfg, "--out", str(out1)]) == EXIT_OK
    rep = json.loads((out1 / "dini_report.json").read_text())
    assert rep["verdict"] == "finite"
    assert rep["branch"] == "field_modulus"

    out2 = tmp_path / "div"
    cfg2 = write(tmp_path, "d2.json", {**base, "modulus": {"a": 0.5, "b": 0.0}})
    main(["dini-check", "--config", cfg2, "--out", str(out2)])
    rep2 = json.loads((out2 / "dini_report.json").read_text())
    assert rep2["verdict"] == "divergent"
    assert (out2 / "dini_integrand.csv").read_text().startswith("t,integrand")


def test_counterexample_report(tmp_path):
    out = tmp_path / "out"
    cfg = write(tmp_path, "ce.json", {"alpha": 1.5, "dim": 1})
    assert main(["counterexample", "--config", cfg, "--out", str(out)]) == EXIT_OK
    rep = json.loads((out / "counterexample_report.json").read_text())
    assert rep["verdict"] == "divergent"
    assert rep["fit"]["r_squared"] > 0.99
    assert rep["cube_integral_verdict"] == "divergent"
    assert (out / "probe_curve.csv").read_text().startswith("h,ln_inv_h,D")

    out2 = tmp_path / "corr"
    cfg2 = write(tmp_path, "ce2.json", {"alpha": 1.5, "dim": 1,
                                        "corrected": True, "beta": 2.0})
    main(["counterexample", "--config", cfg2, "--out", str(out2)])
    rep2 = json.loads((out2 / "counterexample_report.json").read_text())
    assert rep2["verdict"] == "bounded"


def test_counterexample_beta_one_policy(tmp_path):
    out = tmp_path / "out"
    cfg = write(tmp_path, "ce.json", {"alpha": 1.0, "dim": 1, "beta": 1.0})
    assert main(["counterexample", "--config", cfg, "--out", str(out)]) == EXIT_OK
    rep = json.loads((out / "counterexample_report.json").read_text())
    assert rep["verdict"] == "inconclusive"
    assert "policy" in rep["reason"]


def test_exit_sim_report(tmp_path):
    out = tmp_path / "out"
    cfg = write(tmp_path, "ex.json", {"alpha": 1.5, "dim": 2, "r": 1.0,
                                      "n_samples": 30_000, "seed": 3})
    assert main(["exit-sim", "--config", cfg, "--out", str(out)]) == EXIT_OK
    rep = json.loads((out / "exit_sim_report.json").read_text())
    assert rep["passes_at_level_0.01"]
    assert rep["ks_statistic"] < 0.01
    assert (out / "exit_radial_cdf.csv").read_text().startswith("v,")
