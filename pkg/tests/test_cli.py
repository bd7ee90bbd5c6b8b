import csv
import io
import json
import subprocess
import sys

import pytest

from lazytp.cli import EXIT_FAIL, EXIT_OK, EXIT_TIMEOUT, EXIT_USAGE, run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def generator_files(tmp_path):
    code, out, _ = call("gen", "generator", "--tanks", "1", "--out-dir", str(tmp_path))
    assert code == EXIT_OK
    return tmp_path / "generator-1-domain.pddl", tmp_path / "generator-1-problem.pddl"


def last_json(text):
    return json.loads(text.strip().splitlines()[-1])


def test_gen_carpool_writes_two_files(tmp_path):
    code, out, _ = call("gen", "carpool", "--trips", "1", "--cars", "1", "--locations", "100",
                        "--seed", "7", "--out-dir", str(tmp_path))
    assert code == EXIT_OK
    assert sorted(p.name for p in tmp_path.iterdir()) == ["carpool-1-domain.pddl",
                                                          "carpool-1-problem.pddl"]
    assert len(out.splitlines()) == 2


def test_gen_missing_sizes_is_usage_error(tmp_path):
    assert call("gen", "pump", "--pumps", "1", "--out-dir", str(tmp_path))[0] == EXIT_USAGE


def test_plan_prints_plan_and_stats(generator_files, tmp_path):
    domain, problem = generator_files
    stats_path = tmp_path / "stats.json"
    code, out, err = call("plan", str(domain), str(problem), "--strategy", "lazy",
                          "--stats", str(stats_path))
    assert code == EXIT_OK
    assert len(out.splitlines()) == 2  # generate and refuel
    stats = last_json(err)
    for key in ("plan_happenings", "states_expanded", "lp_runs", "lp_time_ms", "stn_checks",
                "total_time_ms", "status"):
        assert key in stats
    assert stats["plan_happenings"] == 4
    assert json.loads(stats_path.read_text()) == stats


def test_always_lp_runs_at_least_as_many_lps(generator_files, tmp_path):
    domain, problem = generator_files
    _, _, lazy_err = call("plan", str(domain), str(problem), "--strategy", "lazy")
    code, out, err = call("plan", str(domain), str(problem), "--strategy", "always-lp",
                          "--encoding", "full", "-o", str(tmp_path / "plan.txt"))
    assert code == EXIT_OK and out == ""
    assert last_json(err)["lp_runs"] >= last_json(lazy_err)["lp_runs"]
    code, out, _ = call("validate", str(domain), str(problem), str(tmp_path / "plan.txt"))
    assert code == EXIT_OK and out.startswith("plan valid")


def test_validate_rejects_bad_plan(generator_files, tmp_path):
    domain, problem = generator_files
    bad = tmp_path / "bad.txt"
    bad.write_text("0.001: (generate gen) [22]\n")
    code, out, _ = call("validate", str(domain), str(problem), str(bad))
    assert code == EXIT_FAIL and "goal" in out


def test_unsolvable_exits_one(tmp_path):
    from lazytp.benchgen import gen_generator
    domain, problem = gen_generator(1, capped_volume=9)
    (tmp_path / "d.pddl").write_text(domain)
    (tmp_path / "p.pddl").write_text(problem)
    code, out, err = call("plan", str(tmp_path / "d.pddl"), str(tmp_path / "p.pddl"))
    assert code == EXIT_FAIL and out == ""
    assert last_json(err)["status"] == "unsolvable"


def test_timeout_exits_three(tmp_path):
    from lazytp.benchgen import gen_carpool_instance
    domain, problem = gen_carpool_instance(3, seed=1)
    (tmp_path / "d.pddl").write_text(domain)
    (tmp_path / "p.pddl").write_text(problem)
    code, _, err = call("plan", str(tmp_path / "d.pddl"), str(tmp_path / "p.pddl"),
                        "--timeout", "0.5")
    assert code == EXIT_TIMEOUT and last_json(err)["status"] == "timeout"


def test_parse_errors_and_bad_flags(tmp_path):
    (tmp_path / "d.pddl").write_text("(define (domain d)")
    (tmp_path / "p.pddl").write_text("(define (problem p) (:domain d))")
    assert call("plan", str(tmp_path / "d.pddl"), str(tmp_path / "p.pddl"))[0] == EXIT_USAGE
    assert call("plan", "missing-domain.pddl", "missing-problem.pddl")[0] == EXIT_USAGE
    assert call("plan", "x", "y", "--strategy", "sometimes")[0] == EXIT_USAGE
    assert call()[0] == EXIT_USAGE


def test_bench_csv_and_figure(tmp_path):
    csv_path = tmp_path / "bench.csv"
    fig_path = tmp_path / "bench.png"
    code, _, err = call("bench", "generator", "--from", "1", "--to", "2", "--compare",
                        "--csv", str(csv_path), "--figure", str(fig_path))
    assert code == EXIT_OK
    rows = list(csv.DictReader(csv_path.open()))
    assert list(rows[0])[:5] == ["instance", "plan_happenings", "lp_runs", "lp_time_ms",
                                 "total_time_ms"]
    assert len(rows) == 4
    assert {r["strategy"] for r in rows} == {"lazy", "always-lp"}
    assert fig_path.stat().st_size > 0
    assert "lazy saves" in err


def test_module_entry_point(generator_files):
    domain, problem = generator_files
    proc = subprocess.run([sys.executable, "-m", "lazytp", "plan", str(domain), str(problem)],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert "(refuel gen tank1)" in proc.stdout
