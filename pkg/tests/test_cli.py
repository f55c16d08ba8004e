import json
import os
import subprocess
import sys

import pytest

from pathmatch.cli import EXIT_ERROR, EXIT_OK, EXIT_PARSE, main


def _gen(tmp_path, name, n=8, seed=1, pair=None, sigma=0.0):
    out = tmp_path / name
    argv = ["gen", "-n", str(n), "--seed", str(seed), "--sigma", str(sigma), "--out", str(out)]
    if pair:
        argv += ["--pair-out", str(tmp_path / pair)]
    assert main(argv) == EXIT_OK
    return out


def test_self_match_is_zero(tmp_path, capsys):
    g = _gen(tmp_path, "g.txt")
    assert main(["match", str(g), str(g)]) == EXIT_OK
    rec = json.loads(capsys.readouterr().out)
    assert rec["f0"] == 0 and rec["permutation"] == list(range(8)) and "wall_time" not in rec


def test_planted_pair_recovered(tmp_path, capsys):
    g = _gen(tmp_path, "g.txt", n=9, seed=4, pair="h.txt")
    h = tmp_path / "h.txt"
    assert h.read_text().startswith("# planted permutation:")
    assert main(["match", str(g), str(h), "--out", str(tmp_path / "r.json")]) == EXIT_OK
    assert json.loads((tmp_path / "r.json").read_text())["f0"] == 0


def test_unequal_sizes_report_dummies(tmp_path, capsys):
    g = _gen(tmp_path, "g.txt", n=5)
    h = _gen(tmp_path, "h.txt", n=7, seed=2)
    assert main(["match", str(g), str(h), "--solver", "umeyama"]) == EXIT_OK
    rec = json.loads(capsys.readouterr().out)
    assert rec["n_g"] == 5 and rec["n_h"] == 7
    assert len(rec["permutation"]) == 7 and rec["dummy"][5:] == [True, True]


def test_malformed_input_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("n 3\n0 1\n1 1\n")
    assert main(["match", str(bad), str(bad)]) == EXIT_PARSE
    err = capsys.readouterr().err
    assert "line 3" in err and "self-loop" in err
    trunc = tmp_path / "t.dat"
    trunc.write_text("2 0 1 1 0")
    assert main(["qap", str(trunc)]) == EXIT_PARSE


def test_missing_file_exits_1(tmp_path):
    assert main(["match", str(tmp_path / "none"), str(tmp_path / "none")]) == EXIT_ERROR


def test_usage_errors_exit_2(tmp_path):
    g = _gen(tmp_path, "g.txt")
    with pytest.raises(SystemExit) as info:
        main(["match", str(g), str(g), "--alpha", "0.5"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_cost_matrix_alpha(tmp_path, capsys):
    g = _gen(tmp_path, "g.txt", n=4)
    cost = tmp_path / "c.txt"
    cost.write_text("\n".join(" ".join("0" if i == j else "1" for j in range(4)) for i in range(4)) + "\n")
    assert main(["match", str(g), str(g), "--alpha", "0.5", "--cost-matrix", str(cost),
                 "--solver", "exhaustive"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["objective"] == 0
    cost.write_text("0 1\n1 0\n")
    assert main(["match", str(g), str(g), "--alpha", "0.5", "--cost-matrix", str(cost)]) == EXIT_PARSE


def test_qap_command(data_dir, capsys):
    assert main(["qap", str(data_dir / "qaplib" / "chr12c.dat"), "--solver", "umeyama"]) == EXIT_OK
    rec = json.loads(capsys.readouterr().out)
    assert rec["name"] == "chr12c" and rec["qap_value"] >= 11156 and rec["published"]["qpb"] == 20306


def test_gen_and_bench_are_byte_reproducible(tmp_path):
    for k in (1, 2):
        _gen(tmp_path, f"g{k}.txt", n=12, seed=7, pair=f"h{k}.txt", sigma=0.1)
        argv = ["bench", "--sizes", "5,6", "--sigmas", "0,0.1", "--samples", "2", "--solvers", "path,umeyama",
                "--seed", "9", "--out", str(tmp_path / f"b{k}.csv"), "--summary", str(tmp_path / f"s{k}.csv")]
        assert main(argv) == EXIT_OK
    for stem in "ghbs":
        ext = "csv" if stem in "bs" else "txt"
        assert (tmp_path / f"{stem}1.{ext}").read_bytes() == (tmp_path / f"{stem}2.{ext}").read_bytes()


def test_log_levels_via_subprocess(tmp_path):
    g = _gen(tmp_path, "g.txt", n=6)
    cmd = [sys.executable, "-m", "pathmatch.cli", "match", str(g), str(g)]
    quiet = subprocess.run(cmd, capture_output=True, text=True, env=dict(os.environ, PATHMATCH_LOG="quiet"))
    trace = subprocess.run(cmd, capture_output=True, text=True, env=dict(os.environ, PATHMATCH_LOG="trace"))
    assert quiet.returncode == trace.returncode == 0
    assert quiet.stderr == "" and "lambda=" in trace.stderr
    assert json.loads(quiet.stdout)["f0"] == json.loads(trace.stdout)["f0"] == 0
