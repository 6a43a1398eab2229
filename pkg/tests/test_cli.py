import json

import pytest

from tabling import cli
from tabling.cli import CSV_COLUMNS, run_command
from tabling.engine import ParallelResult, solve_parallel


def rows_of(capsys):
    out = capsys.readouterr().out.strip().splitlines()
    assert out[0] == CSV_COLUMNS
    return [line.split(",") for line in out[1:]]


def test_bench_run_with_check(capsys):
    code = run_command(["--bench", "pathleft:cycle:10", "--design", "fs",
                        "--lock", "trylock", "--threads", "2",
                        "--repeat", "1", "--check"])
    assert code == 0
    rows = rows_of(capsys)
    assert len(rows) == 1
    row = dict(zip(CSV_COLUMNS.split(","), rows[0]))
    assert row["answers"] == "100"
    assert row["design"] == "fs" and row["lock"] == "trylock" and row["threads"] == "2"


def test_shared_design_with_none_lock_is_a_configuration_error(capsys):
    code = run_command(["--bench", "pathleft:cycle:5", "--design", "fs",
                        "--lock", "none", "--repeat", "1"])
    assert code == 1
    assert "configuration error" in capsys.readouterr().err


def test_sweep_produces_cartesian_rows(capsys):
    code = run_command(["--bench", "pathleft:cycle:5", "--design", "ns,ss,fs",
                        "--threads", "1,2", "--repeat", "1"])
    assert code == 0
    rows = rows_of(capsys)
    assert len(rows) == 6
    assert {(r[1], r[3]) for r in rows} == {(d, t) for d in ("ns", "ss", "fs")
                                            for t in ("1", "2")}
    # NS ignores the lock mode and reports none
    assert all(r[2] == "none" for r in rows if r[1] == "ns")


def test_json_output(capsys):
    code = run_command(["--bench", "pathleft:cycle:5", "--design", "ss",
                        "--threads", "1", "--repeat", "1", "--output", "json"])
    assert code == 0
    objs = [json.loads(line) for line in capsys.readouterr().out.strip().splitlines()]
    assert len(objs) == 1
    assert set(objs[0]) == {"bench", "design", "lock", "threads", "time_ms",
                            "answers", "te", "ba", "sts", "sf", "se", "ats",
                            "answer_hash"}


def test_program_file_run(tmp_path, capsys):
    path = tmp_path / "prog.pl"
    path.write_text(":- table path/2.\n"
                    "path(X,Z) :- path(X,Y), edge(Y,Z).\n"
                    "path(X,Z) :- edge(X,Z).\n"
                    "edge(1,2). edge(2,3).\n")
    code = run_command(["--program", str(path), "--query", "path(1,X)",
                        "--design", "ns", "--repeat", "1", "--check"])
    assert code == 0
    rows = rows_of(capsys)
    assert rows[0][5] == "2"  # (2,) and (3,)


def test_parse_error_exit_code(tmp_path, capsys):
    path = tmp_path / "broken.pl"
    path.write_text("path(X,Z) :- edge(X,Z)")
    code = run_command(["--program", str(path), "--query", "path(X,Y)"])
    assert code == 2
    assert "parse error" in capsys.readouterr().err


def test_usage_errors(capsys):
    assert run_command([]) == 1
    assert run_command(["--bench", "nonsense"]) == 1
    assert run_command(["--bench", "pathleft:cycle:5", "--threads", "zero"]) == 1
    assert run_command(["--program", "x.pl", "--design", "ns"]) == 1  # no query
    capsys.readouterr()


def test_missing_program_file(capsys):
    assert run_command(["--program", "/nonexistent.pl", "--query", "p(X)"]) == 1
    assert "cannot read" in capsys.readouterr().err


def test_paper_scale_gating(capsys):
    code = run_command(["--bench", "pathleft:cycle:120", "--repeat", "1"])
    assert code == 1
    assert "desk-scale cap" in capsys.readouterr().err
    code = run_command(["--bench", "pathleft:cycle:120", "--repeat", "1",
                        "--paper-scale", "--threads", "1"])
    assert code == 0
    rows = rows_of(capsys)
    assert rows[0][5] == str(120 * 120)


def test_thread_mismatch_reports_verification_failure(monkeypatch, capsys):
    real = solve_parallel

    def corrupt(program, query, cfg):
        result = real(program, query, cfg)
        mangled = list(result.answer_sets)
        mangled[0] = frozenset()
        return ParallelResult(mangled, result.counters, result.wall_ms, result.table)

    monkeypatch.setattr(cli, "solve_parallel", corrupt)
    code = run_command(["--bench", "pathleft:cycle:5", "--design", "ns",
                        "--threads", "2", "--repeat", "1"])
    assert code == 3
    assert "verification failure" in capsys.readouterr().err


def test_oracle_mismatch_reports_verification_failure(monkeypatch, capsys):
    monkeypatch.setattr(cli, "oracle_solve", lambda program, query: frozenset())
    code = run_command(["--bench", "pathleft:cycle:5", "--design", "ns",
                        "--threads", "1", "--repeat", "1", "--check"])
    assert code == 3
    assert "reference solver" in capsys.readouterr().err


def test_rerun_reproduces_counts_and_counters(capsys):
    argv = ["--bench", "pathright:pyramid:10", "--design", "ss",
            "--threads", "2", "--repeat", "1"]
    assert run_command(argv) == 0
    first = rows_of(capsys)
    assert run_command(argv) == 0
    second = rows_of(capsys)
    # identical apart from the timing column
    drop_time = lambda row: row[:4] + row[5:]
    assert [drop_time(r) for r in first] == [drop_time(r) for r in second]


def test_spec_flow_cycle100_fs_trylock_16(capsys):
    code = run_command(["--bench", "pathleft:cycle:100", "--design", "fs",
                        "--lock", "trylock", "--threads", "16",
                        "--repeat", "1", "--check"])
    assert code == 0
    rows = rows_of(capsys)
    assert len(rows) == 1
    assert rows[0][5] == "10000"
