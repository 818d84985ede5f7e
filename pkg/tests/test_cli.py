import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from homog.cli import RunConfig, execute, main, parse_counts, replay

GOLDEN = Path(__file__).resolve().parents[1] / "docs" / "golden"

GOLDEN_RUNS = {
    "revenue_intro.csv": ["revenue", "--family", "intro", "--economy", "D1=1,D2=9", "--exact"],
    "ideal_intro.csv": ["ideal", "--family", "intro"],
    "certify_regular.csv": ["certify", "--family", "regular", "--n", "3", "--h", "10000"],
    "construct_intro.csv": ["construct", "--family", "intro", "--eps", "0.1", "--tries", "100", "--seed", "7"],
    "shrink_intro.csv": ["shrink", "--family", "intro", "--economy", "D1=2,D2=8", "--eps", "0.1", "--seed", "3", "--tries", "50"],
}


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def intro_file(tmp_path, capsys):
    p = tmp_path / "intro.toml"
    assert main(["instance", "--family", "intro", "--n", "10", "--eps", "0.001", "--output", str(p)]) == 0
    return p


def test_revenue_row(intro_file, capsys):
    code, out, _ = run_cli(["revenue", "--instance", str(intro_file), "--economy", "D1=1,D2=9", "--exact"], capsys)
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert {"total", "low", "mid", "high", "wall_time_s"} <= set(row)
    assert float(row["total"]) == pytest.approx(float(row["low"]) + float(row["mid"]) + float(row["high"]))


def test_revenue_monte_carlo(capsys):
    base = ["revenue", "--family", "regular", "--n", "3", "--h", "100", "--economy", "ER=2,C=1", "--format", "json"]
    _, out, _ = run_cli(base + ["--exact"], capsys)
    exact = json.loads(out)["result"]["total"]
    code, out, _ = run_cli(base + ["--samples", "20000", "--seed", "1"], capsys)
    res = json.loads(out)["result"]
    assert code == 0 and res["mode"] == "monte_carlo" and res["samples"] == 20000
    assert 0 < res["ci_halfwidth"] and abs(res["total"] - exact) <= 4 * res["ci_halfwidth"]


def test_certify_regular_ratio(capsys):
    code, out, _ = run_cli(["certify", "--family", "regular", "--n", "3", "--h", "10000", "--format", "json"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["result"]["ratio"] <= 0.61
    assert rep["result"]["mixed_economy_optimal_auction"] >= 4.95


def test_construct_twice_byte_identical(intro_file, tmp_path, capsys):
    outs = []
    for k in range(2):
        p = tmp_path / f"r{k}.json"
        args = ["construct", "--instance", str(intro_file), "--eps", "0.1", "--tries", "100", "--seed", "7", "--format", "json", "--no-timing", "--output", str(p)]
        assert main(args) == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_timed_reports_match_apart_from_wall_time(intro_file, capsys):
    reps = []
    for _ in range(2):
        _, out, _ = run_cli(["construct", "--instance", str(intro_file), "--eps", "0.1", "--tries", "5", "--seed", "2", "--format", "json"], capsys)
        rep = json.loads(out)
        assert rep["wall_time_s"] > 0
        rep.pop("wall_time_s")
        reps.append(rep)
    assert reps[0] == reps[1]


@pytest.mark.parametrize("name", sorted(GOLDEN_RUNS))
def test_golden_csv(name, capsys):
    code, out, _ = run_cli(GOLDEN_RUNS[name] + ["--no-timing"], capsys)
    assert code == 0
    assert out == (GOLDEN / name).read_text()


def test_golden_instance_file(tmp_path):
    p = tmp_path / "intro.toml"
    assert main(["instance", "--family", "intro", "--output", str(p)]) == 0
    assert p.read_text() == (GOLDEN / "intro.toml").read_text()


@pytest.mark.parametrize(
    "cfg",
    [
        RunConfig("construct", family="intro", eps=0.1, tries=10, seed=3),
        RunConfig("construct", family="regular", n=3, h=100.0, objective="optimal_auction"),
        RunConfig("revenue", family="regular", n=3, h=100.0, economy="ER=2,C=1", L=1.0, H=50.0),
        RunConfig("shrink", family="intro", economy="D1=2,D2=8", eps=0.1, seed=1, tries=20),
        RunConfig("ideal", family="intro", objective="second_price"),
    ],
)
def test_reports_replay_exactly(cfg):
    cfg.format, cfg.timing = "json", False
    text, _ = execute(cfg)
    assert replay(json.loads(text)) == text


def test_instance_file_drives_every_command(intro_file, capsys):
    for cmd in (["ideal"], ["homog"], ["certify"], ["construct", "--objective", "optimal_auction"], ["construct", "--objective", "second_price"]):
        code, _, err = run_cli(cmd + ["--instance", str(intro_file)], capsys)
        assert code == 0, err


def test_params_table_supplies_defaults(tmp_path, capsys):
    text = (GOLDEN / "intro.toml").read_text().replace("[family]", "[params]\neps = 0.1\nseed = 7\ntries = 100\n\n[family]")
    p = tmp_path / "with_params.toml"
    p.write_text(text)
    code, out, _ = run_cli(["construct", "--instance", str(p), "--no-timing"], capsys)
    assert code == 0 and out == (GOLDEN / "construct_intro.csv").read_text()


def test_validation_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('schema = "homog-instance/1"\nn = 3\n[[distribution]]\nlabel = "A"\ntype = "atoms"\nvalues = [1]\nprobs = [1]\nfoo = 2\n')
    code, _, err = run_cli(["ideal", "--instance", str(bad)], capsys)
    assert code == 2 and "bad.toml:8" in err and "foo" in err
    assert run_cli(["revenue", "--family", "intro", "--economy", "D9=3"], capsys)[0] == 2
    assert run_cli(["shrink", "--family", "intro", "--economy", "D1=10"], capsys)[0] == 2
    assert run_cli(["ideal"], capsys)[0] == 2
    with pytest.raises(SystemExit) as info:
        main(["ideal", "--family", "intro", "--format", "xml"])
    assert info.value.code == 2


def test_budget_exceeded_exit_3(capsys):
    code, _, err = run_cli(["ideal", "--family", "intro", "--budget", "5"], capsys)
    assert code == 3 and "budget" in err


def test_selftest_command(capsys):
    code, out, _ = run_cli(["selftest", "--no-timing"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows and all(r["status"] == "pass" for r in rows)


def test_parse_counts():
    assert parse_counts("D1=1,D2=9") == {"D1": 1, "D2": 9}
    assert parse_counts("D1×1 D2×9") == {"D1": 1, "D2": 9}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "homog", "homog", "--family", "intro", "--no-timing"], capture_output=True, text=True)
    assert proc.returncode == 0 and "D1×10" in proc.stdout
