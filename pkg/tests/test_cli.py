import csv
import json
import time

import numpy as np
import pytest

from rtpgame.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, build_config, main
from rtpgame.equilibrium import closed_form_private
from rtpgame.model import behavior_constants

TRACE_COLUMNS = ["slot", "agent", "consumption", "total", "price", "utility", "U", "NR", "W"]


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_defaults_are_baseline():
    c = build_config([])
    assert (c.gamma, c.kappa, c.alpha, c.g_bar, c.sigma_ii, c.sigma) == ((1.2,), (1.0,), (1.0,), 30.0, 4.0, 0.0)
    assert (c.omega_bar, c.omega_std, c.horizon) == ((0.0,), (2.0,), 5)


def test_sigma_ij_is_converted_to_correlation():
    assert build_config([("sigma_ij", "2.4")]).sigma == pytest.approx(0.6)
    assert build_config([("sigma_ii", "2"), ("sigma_ij", "1")]).sigma == pytest.approx(0.5)


def test_solve_single_agent(tmp_path):
    assert main(["solve", "--set", "n=1", "--set", "horizon=1", "--out", str(tmp_path)]) == EXIT_OK
    row = read_csv(tmp_path / "solve.csv")[0]
    rho = behavior_constants("S", 1.2, 1, 1, 1).rho
    assert float(row["a_private"]) == pytest.approx(rho) and float(row["b_private"]) == pytest.approx(rho)
    assert float(row["v_0"]) == pytest.approx(rho)


def test_solve_matches_private_closed_form(tmp_path):
    assert main(["solve", "--set", "n=5", "--set", "horizon=1", "--out", str(tmp_path)]) == EXIT_OK
    rows = read_csv(tmp_path / "solve.csv")
    form = closed_form_private(behavior_constants("S", 1.2, 1, 1, 5), 0.0, 5)
    for i, row in enumerate(rows):
        assert float(row[f"v_{i}"]) == pytest.approx(form.a, rel=1e-10)
        assert float(row["residual"]) <= 1e-9


@pytest.mark.parametrize(
    "args",
    [
        ["solve", "--set", "sigma=1.5"],
        ["solve", "--set", "bogus=1"],
        ["simulate", "--set", "n=zero"],
        ["ensemble", "--runs", "0"],
        ["sweep", "--set", "n=3"],
        ["solve", "--set", "gamma=-1"],
        ["solve", "--config", "/nonexistent/config.txt"],
    ],
)
def test_invalid_configuration_exit_code(args, tmp_path, capsys):
    assert main(args + ["--out", str(tmp_path)]) == EXIT_CONFIG
    assert "invalid configuration" in capsys.readouterr().err


def test_runtime_failure_exit_code(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["solve", "--set", "n=2", "--out", str(blocker)]) == EXIT_RUNTIME


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# baseline variant\nn = 4\nhorizon = 2\ninfo = b\ngamma = 1.2, 1.5\n")
    assert main(["simulate", "--config", str(cfg), "--set", "n=3", "--out", str(tmp_path)]) == EXIT_OK
    rows = read_csv(tmp_path / "simulate.csv")
    assert len(rows) == 6 and list(rows[0]) == TRACE_COLUMNS


def test_simulate_deterministic_and_twelve_digits(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["simulate", "--seed", "9", "--out", str(out)]) == EXIT_OK
    assert (a / "simulate.csv").read_text() == (b / "simulate.csv").read_text()
    rows = read_csv(a / "simulate.csv")
    digits = max(len(r["consumption"].replace(".", "").replace("-", "").lstrip("0")) for r in rows)
    assert digits <= 12
    totals = {r["total"] for r in rows}
    assert len(totals) == 1  # private information: same total every slot


def test_simulate_json_mirror(tmp_path):
    assert main(["simulate", "--set", "n=3", "--format", "json", "--out", str(tmp_path)]) == EXIT_OK
    data = json.loads((tmp_path / "simulate.json").read_text())
    assert len(data) == 15 and list(data[0]) == TRACE_COLUMNS
    assert abs(data[0]["W"] - data[0]["U"] - data[0]["NR"]) <= 1e-9 * abs(data[0]["W"])


def test_simulate_action_sharing_reaches_broadcast(tmp_path):
    # graph seed 2 with n=5 gives a connected graph that reaches B within the horizon
    common = ["--set", "n=5", "--set", "graph_seed=2", "--set", "horizon=6", "--seed", "4"]
    assert main(["simulate", "--set", "info=AS", *common, "--out", str(tmp_path / "as")]) == EXIT_OK
    assert main(["simulate", "--set", "info=B", *common, "--out", str(tmp_path / "b")]) == EXIT_OK
    t_as = [float(r["total"]) for r in read_csv(tmp_path / "as" / "simulate.csv") if r["agent"] == "0"]
    t_b = [float(r["total"]) for r in read_csv(tmp_path / "b" / "simulate.csv") if r["agent"] == "0"]
    assert t_as[0] == pytest.approx(t_b[0])
    assert t_as[-1] == pytest.approx(t_b[-1], rel=1e-9)


def test_ensemble_has_analytic_columns(tmp_path):
    assert main(["ensemble", "--set", "horizon=2", "--set", "info=B", "--runs", "50", "--out", str(tmp_path)]) == EXIT_OK
    rows = read_csv(tmp_path / "ensemble.csv")
    assert len(rows) == 6
    demand = [r for r in rows if r["metric"] == "demand"]
    assert all(r["analytic_variance_private"] and r["analytic_variance_complete"] for r in demand)
    assert float(demand[0]["analytic_mean_private"]) == float(demand[0]["analytic_mean_complete"])
    assert all(r["analytic_variance_private"] == "" for r in rows if r["metric"] != "demand")


def test_sweep_welfare_flat_for_welfare_maximizers(tmp_path):
    start = time.perf_counter()
    args = ["sweep", "--axis", "omega_bar", "--values=-2,-1,0,1,2", "--set", "n=30", "--set", "sigma_ij=2.4",
            "--set", "behavior=W", "--set", "horizon=1", "--runs", "100", "--out", str(tmp_path)]
    assert main(args) == EXIT_OK
    assert time.perf_counter() - start < 60
    welfare = [float(r["mean"]) for r in read_csv(tmp_path / "sweep.csv") if r["metric"] == "welfare"]
    assert len(welfare) == 5 and np.ptp(welfare) <= 1e-9 * abs(welfare[0])


@pytest.mark.parametrize("axis,values", [("sigma", "0,0.5"), ("n", "3,4"), ("behavior", "S,W"), ("info", "P,B"), ("gamma", "1,2")])
def test_sweep_axes(axis, values, tmp_path):
    assert main(["sweep", "--axis", axis, "--values", values, "--set", "horizon=2", "--runs", "5", "--out", str(tmp_path)]) == EXIT_OK
    rows = read_csv(tmp_path / "sweep.csv")
    assert len(rows) == 12 and {r["axis"] for r in rows} == {axis}
