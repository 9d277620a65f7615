import subprocess
import sys

import pytest

from classassign.cli import main
from classassign.data import load_matching


@pytest.fixture(scope="module")
def fixture_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("inst")
    assert main(["gen", "--students", "60", "--classes", "8", "--k", "4", "--seed", "5",
                 "--lower", "3", "--upper-min", "6", "--upper-max", "14",
                 "--out-dir", str(d), "--groups"]) == 0
    return d


@pytest.fixture(scope="module")
def tiny_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("tiny")
    assert main(["gen", "--students", "6", "--classes", "3", "--k", "2", "--seed", "1",
                 "--lower", "1", "--upper-min", "2", "--upper-max", "4",
                 "--out-dir", str(d)]) == 0
    return d


def _files(d):
    return ["--classes", str(d / "classes.csv"), "--prefs", str(d / "prefs.csv")]


def test_gen_is_byte_stable(tmp_path, fixture_dir):
    assert main(["gen", "--students", "60", "--classes", "8", "--k", "4", "--seed", "5",
                 "--lower", "3", "--upper-min", "6", "--upper-max", "14",
                 "--out-dir", str(tmp_path), "--groups"]) == 0
    for name in ("classes.csv", "prefs.csv"):
        assert (tmp_path / name).read_bytes() == (fixture_dir / name).read_bytes()


def test_solve(tmp_path, fixture_dir, capsys):
    out = tmp_path / "m.csv"
    rc = main(["solve", "--model", "Opt67", *_files(fixture_dir), "--out", str(out),
               "--report", str(tmp_path / "r.md"), "--class-report", str(tmp_path / "c.csv")])
    assert rc == 0
    assert len(load_matching(out)) == 60
    assert "| Opt67" in (tmp_path / "r.md").read_text()
    assert (tmp_path / "c.csv").read_text().startswith("class_id,lower,upper,status,assigned,E")
    assert "Opt67: profile" in capsys.readouterr().out
    # byte-stable for a fixed input
    again = tmp_path / "m2.csv"
    main(["solve", "--model", "Opt67", *_files(fixture_dir), "--out", str(again)])
    assert again.read_bytes() == out.read_bytes()


@pytest.mark.parametrize("kind", ["da", "boston"])
def test_mechanism(tmp_path, fixture_dir, kind):
    out = tmp_path / "m.csv"
    rc = main(["mechanism", "--kind", kind, "--seed", "9", *_files(fixture_dir),
               "--out", str(out), "--report", str(tmp_path / "r.csv")])
    assert rc == 0
    first = out.read_bytes()
    main(["mechanism", "--kind", kind, "--seed", "9", *_files(fixture_dir), "--out", str(out)])
    assert out.read_bytes() == first
    assert (tmp_path / "r.csv").read_text().startswith("model,1st,2nd,3rd,4th,others")


def test_compare(tmp_path, fixture_dir, capsys):
    out = tmp_path / "t.csv"
    rc = main(["compare", "--models", "Opt67,Fair,RankMaximal,Opt67xFair,da",
               *_files(fixture_dir), "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert [ln.split(",")[0] for ln in lines[1:]] == [
        "Opt67", "Fair", "RankMaximal", "Opt67xFair", "DA with STB"]
    assert "Students: 60" in capsys.readouterr().out


def test_check(fixture_dir, capsys):
    assert main(["check", "--max-rank", "4", *_files(fixture_dir)]) in (0, 1)
    capsys.readouterr()


def test_verify(tiny_dir, capsys):
    for model in ("Opt67", "Fair", "RankMaximal", "Opt67xFair"):
        assert main(["verify", "--model", model, *_files(tiny_dir)]) == 0
    assert "matches exhaustive search" in capsys.readouterr().out


def test_verify_refuses_large(fixture_dir, capsys):
    assert main(["verify", "--model", "Opt67", *_files(fixture_dir)]) == 1
    assert "at most" in capsys.readouterr().err


def test_errors_exit_one(tmp_path, fixture_dir, capsys):
    assert main(["solve", "--model", "Nope", *_files(fixture_dir),
                 "--out", str(tmp_path / "x.csv")]) == 1
    assert main(["solve", "--model", "Opt67", "--classes", str(tmp_path / "missing.csv"),
                 "--prefs", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "x.csv")]) == 1
    bad = tmp_path / "prefs.csv"
    bad.write_text("student_id,choice_1,choice_2\ns1,c1,c1\n")
    assert main(["solve", "--model", "Opt67", "--classes", str(fixture_dir / "classes.csv"),
                 "--prefs", str(bad), "--out", str(tmp_path / "x.csv")]) == 1
    assert "prefs.csv:2:" in capsys.readouterr().err


def test_capacity_error_exit_one(tmp_path, capsys):
    (tmp_path / "classes.csv").write_text("class_id,lower,upper,status\nc1,0,1,active\n")
    (tmp_path / "prefs.csv").write_text("student_id,choice_1\ns1,c1\ns2,c1\n")
    assert main(["solve", "--model", "Opt67", *_files(tmp_path),
                 "--out", str(tmp_path / "m.csv")]) == 1
    assert "error" in capsys.readouterr().err


def test_module_entry_point(tmp_path, tiny_dir):
    proc = subprocess.run(
        [sys.executable, "-m", "classassign", "solve", "--model", "Fair", *_files(tiny_dir),
         "--out", str(tmp_path / "m.csv")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
