"""Command-line behavior: exit codes, determinism, file formats."""

import json

import pytest

from delshare import StrategyProfile, load_problem, pbp_solve, random_problem, save_problem
from delshare.cli import main


def write_problem(tmp_path, seed=3, delay=1, horizon=3, name="p.json"):
    spec = random_problem(
        seed, horizon=horizon, num_controllers=2, delay=delay,
        state_size=2, obs_sizes=(2, 2), action_sizes=(2, 2),
    )
    path = tmp_path / name
    save_problem(spec, path)
    return spec, path


def test_validate_ok(tmp_path, capsys):
    _spec, path = write_problem(tmp_path)
    assert main(["validate", "--problem", str(path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["summary"]["horizon"] == 3
    assert report["instance_hash"]


def test_validate_rejects_malformed(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"horizon": 2}')
    assert main(["validate", "--problem", str(bad)]) == 1


def test_validate_rejects_bad_kernel(tmp_path, capsys):
    spec, path = write_problem(tmp_path)
    data = json.loads(path.read_text())
    data["initial_dist"] = [0.9, 0.9]
    path.write_text(json.dumps(data))
    assert main(["validate", "--problem", str(path)]) == 1
    diag = json.loads(capsys.readouterr().out)
    assert diag["error"] == "validation"


def test_random_gen_then_validate(tmp_path):
    out = tmp_path / "gen.json"
    assert main(["random-gen", "--seed", "5", "--delay", "2", "--out", str(out)]) == 0
    assert main(["validate", "--problem", str(out)]) == 0
    spec = load_problem(out)
    assert spec.delay == 2


def test_solve_reports_are_byte_identical(tmp_path):
    _spec, path = write_problem(tmp_path)
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["solve", "--problem", str(path), "--out", str(out1)]) == 0
    assert main(["solve", "--problem", str(path), "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    report = json.loads(out1.read_text())
    assert report["converged"] is True
    assert report["trace"][0] >= report["payoff"] - 1e-12


def test_best_response_json_and_csv(tmp_path):
    spec, path = write_problem(tmp_path)
    strat = tmp_path / "s.json"
    StrategyProfile.random(spec, 4).save(strat)
    out = tmp_path / "br.json"
    assert main([
        "best-response", "--problem", str(path), "--strategies", str(strat),
        "--controller", "1", "--out", str(out),
    ]) == 0
    report = json.loads(out.read_text())
    assert report["controller"] == 1
    assert "value_table" in report
    csv_out = tmp_path / "br.csv"
    assert main([
        "best-response", "--problem", str(path), "--strategies", str(strat),
        "--controller", "1", "--out", str(csv_out), "--format", "csv",
    ]) == 0
    header = csv_out.read_text().splitlines()[0]
    assert header == "epoch,key,value,argmin_action,reachable"


def test_verify_pass_and_fail(tmp_path):
    spec, path = write_problem(tmp_path)
    result = pbp_solve(spec)
    good = tmp_path / "good.json"
    result.strategies.save(good)
    out = tmp_path / "v.json"
    assert main(["verify", "--problem", str(path), "--strategies", str(good), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["holds"] is True

    from delshare import expected_total_cost

    base = result.payoff
    rows = result.strategies.controller_rows(0)
    bad = None
    for t in range(3):
        for code in range(rows[t].size):
            trial = [r.copy() for r in rows]
            trial[t][code] = 1 - trial[t][code]
            cand = result.strategies.with_controller(0, trial)
            if expected_total_cost(spec, cand) > base + 1e-6:
                bad = cand
                break
        if bad is not None:
            break
    assert bad is not None
    badpath = tmp_path / "bad_strat.json"
    bad.save(badpath)
    out2 = tmp_path / "v2.json"
    code = main(["verify", "--problem", str(path), "--strategies", str(badpath), "--out", str(out2)])
    assert code == 2
    report = json.loads(out2.read_text())
    assert report["holds"] is False
    assert report["witness_controller"] is not None


def test_verify_budget_exceeded(tmp_path):
    spec, path = write_problem(tmp_path)
    strat = tmp_path / "s.json"
    StrategyProfile.zeros(spec).save(strat)
    code = main([
        "verify", "--problem", str(path), "--strategies", str(strat), "--budget", "1",
    ])
    assert code == 3


def test_filters_dump(tmp_path):
    _spec, path = write_problem(tmp_path, delay=2)
    out = tmp_path / "f.json"
    assert main(["filters", "--problem", str(path), "--out", str(out)]) == 0
    dump = json.loads(out.read_text())["beliefs"]
    assert set(dump) == {"private", "pi", "theta"}
    assert "3" in dump["pi"]  # lagged-state belief exists from epoch delay+1
    assert "1" in dump["theta"]


def test_oracle_compare_single_instance(tmp_path):
    _spec, path = write_problem(tmp_path, seed=2)
    out = tmp_path / "oc.json"
    assert main(["oracle-compare", "--problem", str(path), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["all_pass"] is True
    assert report["cells"][0]["filters_pass"] and report["cells"][0]["dp_pass"]


def test_bad_epsilon_rejected():
    assert main(["solve", "--problem", "x.json", "--epsilon", "0"]) == 1
