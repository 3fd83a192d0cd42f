import json
import subprocess
import sys

from thornlab.cli import load_config, main
from thornlab.report import strip_timing


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def test_indep_example(capsys):
    code, doc, _ = run(capsys, "indep", "--theory", "dlo", "--a", "0", "--b", "1", "--base", "")
    assert code == 0 and doc["result"]["independent"] is True
    assert doc["oracle"] is True
    assert set(doc) == {"command", "theory", "inputs", "result", "certificate", "bounds", "oracle", "wall_time_ms"}


def test_rank_example(capsys):
    code, doc, _ = run(capsys, "rank", "--theory", "eq", "--p", "x=x", "--delta", "x=y", "--pi", "y=y", "--k", "2")
    assert code == 0 and doc["result"]["rank"] == 1
    assert doc["certificate"]["kind"] == "rank_tree"


def test_rank_minus_infinity(capsys):
    code, doc, _ = run(capsys, "rank", "--theory", "eq", "--p", "x=#0 & x=#1", "--delta", "x=y", "--pi", "y=y")
    assert code == 0 and doc["result"]["rank"] == -1


def test_uth_example(capsys):
    code, doc, _ = run(capsys, "uth", "--theory", "dlo", "--type-of", "0,1", "--base", "")
    assert code == 0 and doc["result"]["rank"] == 2 and doc["oracle"] == 2


def test_strict_unknown_exit_code(capsys):
    code, doc, _ = run(capsys, "forks", "--theory", "dlo", "--p", "0 < x", "--strict")
    assert code == 2 and doc["result"]["verdict"] == "unknown"


def test_errors_exit_one(capsys):
    code, doc, err = run(capsys, "forks", "--theory", "eq", "--p", "x = #0 & x = #1")
    assert code == 1 and doc is None and "thornlab: error" in err
    code, _, err = run(capsys, "forks", "--theory", "dlo", "--p", "x <")
    assert code == 1 and "thornlab: error" in err
    assert main(["--version"]) == 0
    assert capsys.readouterr().out.strip() == "0.1.0"
    assert main(["frobnicate"]) == 1


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "budget.conf"
    cfg.write_text("# budgets\nwitness_len = 1\nk-max = 3\nstrict = yes\n")
    assert load_config(str(cfg)) == {"witness_len": 1, "k_max": 3, "strict": True}
    code, doc, _ = run(capsys, "forks", "--theory", "dlo", "--p", "0 < x", "--config", str(cfg))
    assert code == 2 and doc["bounds"]["witness_len"] == 1 and doc["bounds"]["k_max"] == 3
    code, doc, _ = run(capsys, "forks", "--theory", "dlo", "--p", "0 < x", "--config", str(cfg), "--k-max", "4")
    assert doc["bounds"]["k_max"] == 4 and doc["bounds"]["witness_len"] == 1
    cfg.write_text("colour = red\n")
    code, _, err = run(capsys, "forks", "--theory", "dlo", "--p", "0 < x", "--config", str(cfg))
    assert code == 1 and "unknown key" in err


def test_recheck_round_trip(tmp_path, capsys):
    commands = [
        ["forks", "--theory", "erel", "--p", "cl(x) = cl(2.7) & x != 2.7"],
        ["divides", "--theory", "dlo", "--delta", "x = y", "--a", "0"],
        ["uth", "--theory", "erel", "--type-of", "2.5"],
        ["uthstar", "--theory", "erel", "--type-of", "2.5"],
        ["rank", "--theory", "dlo", "--p", "x1=x1 & x2=x2", "--delta", "x1=y", "--delta", "x2=y", "--pi", "y=y"],
        ["morley", "--theory", "dlo", "--type-of", "1/2", "--base", "0,1"],
        ["morley", "--theory", "eq", "--p", "x != #0"],
    ]
    for argv in commands:
        code, doc, _ = run(capsys, *argv)
        assert code == 0, argv
        path = tmp_path / "report.json"
        path.write_text(json.dumps(doc))
        code, rc, _ = run(capsys, "recheck", "--report", str(path))
        assert code == 0 and rc["result"]["ok"] and rc["result"]["certificates"] >= 1, argv


def test_recheck_detects_tampering(tmp_path, capsys):
    _, doc, _ = run(capsys, "forks", "--theory", "dlo", "--p", "x = 0 | x = 1")
    doc["certificate"]["phi"] = "x = 0 | x = 1 | x = 2"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, rc, _ = run(capsys, "recheck", "--report", str(path))
    assert code == 1 and rc["result"]["failures"]


def test_determinism_across_processes():
    argv = [sys.executable, "-m", "thornlab.cli", "verify", "symmetry", "--seed", "3", "--count", "4"]
    outs = [subprocess.run(argv, capture_output=True, text=True, check=True).stdout for _ in range(2)]
    a, b = (json.dumps(strip_timing(json.loads(o)), sort_keys=True) for o in outs)
    assert a == b


def test_jobs_do_not_change_output(capsys):
    _, one, _ = run(capsys, "verify", "axioms", "--seed", "5", "--count", "2")
    _, two, _ = run(capsys, "verify", "axioms", "--seed", "5", "--count", "2", "--jobs", "2")
    assert strip_timing(one) == strip_timing(two)
    assert one["result"]["failed"] == 0
