import csv
import io
import subprocess
import sys
from pathlib import Path

import pytest

from netmcse.cli import main
from netmcse.graph_core import load_edge_list


@pytest.fixture(scope="module")
def er_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("g") / "er.txt"
    assert main(["gen", "--er", "500", "0.02", "--seed", "1", "--lcc", "-o", str(path)]) == 0
    return path


def run(capsys, *argv):
    try:
        rc = main([str(a) for a in argv])
    except SystemExit as exc:  # argparse rejects the command line
        rc = exc.code
    out, err = capsys.readouterr()
    return rc, out, err


class TestGen:
    def test_lcc_output(self, tmp_path, capsys):
        rc, out, _ = run(capsys, "gen", "--er", 500, 0.02, "--seed", 1, "--lcc", "-o", tmp_path / "g.txt")
        assert rc == 0
        g = load_edge_list(str(tmp_path / "g.txt"))
        assert out.strip() == f"n={g.n} n_e={g.n_e}"
        assert g.is_connected()

    def test_near_complete_is_k4(self, tmp_path, capsys):
        rc, out, _ = run(capsys, "gen", "--er", 4, 0.9999, "--seed", 1, "-o", tmp_path / "k4.txt")
        assert rc == 0 and out.strip() == "n=4 n_e=6"

    def test_deterministic(self, tmp_path, capsys):
        for name in ("a.txt", "b.txt"):
            run(capsys, "gen", "--er", 200, 0.05, "--seed", 9, "--lcc", "-o", tmp_path / name)
        assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()

    def test_binary_attribute(self, tmp_path, capsys):
        rc, _, _ = run(capsys, "gen", "--er", 50, 0.2, "--seed", 2, "-o", tmp_path / "g.txt",
                       "--binary-attr", "grp:0.3", "--attr-out", tmp_path / "a.csv")
        assert rc == 0
        rows = list(csv.reader(io.StringIO(Path(tmp_path / "a.csv").read_text())))
        assert rows[0] == ["id", "grp"] and len(rows) == 51

    def test_bad_probability_is_usage_error(self, tmp_path, capsys):
        rc, _, _ = run(capsys, "gen", "--er", 10, 1.5, "-o", tmp_path / "g.txt")
        assert rc == 1


class TestStats:
    def test_triangle(self, tmp_path, capsys):
        (tmp_path / "k3.txt").write_text("0 1\n1 2\n2 0\n")
        rc, out, _ = run(capsys, "stats", tmp_path / "k3.txt", "--features", "degree,cc")
        assert rc == 0
        assert out.splitlines() == ["n=3 n_e=3", "degree 2.0", "cc 1.0"]

    def test_path(self, tmp_path, capsys):
        (tmp_path / "p3.txt").write_text("0 1\n1 2\n")
        rc, out, _ = run(capsys, "stats", tmp_path / "p3.txt", "--features", "degree")
        assert "degree 1.3333" in out.splitlines()

    def test_attributes_and_csv(self, tmp_path, capsys):
        (tmp_path / "p3.txt").write_text("30 10\n10 20\n")
        (tmp_path / "attrs.csv").write_text("id,sex,grade\n10,M,10\n20,F,11\n30,F,9\n")
        rc, out, _ = run(capsys, "stats", tmp_path / "p3.txt", "--attrs", tmp_path / "attrs.csv",
                         "--schema", "sex,grade:num", "--features", "degree,attr:sex=F,num:grade",
                         "--csv", tmp_path / "s.csv")
        assert rc == 0
        assert "sex=F 0.6667" in out and "grade 10.0" in out
        rows = list(csv.reader(io.StringIO(Path(tmp_path / "s.csv").read_text())))
        assert rows[0] == ["feature", "mean"] and float(rows[2][1]) == pytest.approx(2 / 3)

    def test_stdin(self, monkeypatch, capsys):
        monkeypatch.setattr(sys, "stdin", io.TextIOWrapper(io.BytesIO(b"0 1\n1 2\n2 0\n")))
        rc, out, _ = run(capsys, "stats", "-", "--features", "degree")
        assert rc == 0 and "degree 2.0" in out

    def test_missing_file(self, capsys):
        rc, _, err = run(capsys, "stats", "/nonexistent/graph.txt")
        assert rc == 2

    def test_bad_feature_is_usage_error(self, tmp_path, capsys):
        (tmp_path / "p3.txt").write_text("0 1\n1 2\n")
        rc, _, err = run(capsys, "stats", tmp_path / "p3.txt", "--features", "wingspan")
        assert rc == 1 and "wingspan" in err


class TestSample:
    def test_srw(self, er_file, tmp_path, capsys):
        rc, out, _ = run(capsys, "sample", er_file, "--walk", "srw", "--features", "degree,cc", "--eps", 0.05,
                         "--alpha", 0.05, "--mstar", 10000, "--seed", 3, "--csv", tmp_path / "r.csv")
        assert rc == 0
        step = int(out.split("termination_step=")[1].split()[0])
        assert step >= 10000
        rows = list(csv.DictReader(io.StringIO(Path(tmp_path / "r.csv").read_text())))
        assert int(rows[0]["termination_step"]) == step
        assert rows[0]["budget_flag"] == "0"
        assert float(rows[0]["ratio_stat"]) <= 0.05
        assert rows[0]["wallclock"] != ""

    def test_mh_truth_and_trace(self, er_file, tmp_path, capsys):
        rc, out, _ = run(capsys, "sample", er_file, "--walk", "mh", "--seed", 4, "--truth-from-graph",
                         "--trace-out", tmp_path / "t.csv")
        assert rc == 0
        rate = float(out.split("acceptance_rate=")[1].split()[0])
        assert 0 < rate <= 1
        assert "covered=" in out and "truth" in out
        trace = list(csv.reader(io.StringIO(Path(tmp_path / "t.csv").read_text())))
        step = int(out.split("termination_step=")[1].split()[0])
        assert trace[0] == ["t", "node", "accepted"] and len(trace) == step + 1

    def test_srw_rejects_cc_first(self, er_file, capsys):
        rc, _, err = run(capsys, "sample", er_file, "--walk", "srw", "--features", "cc,degree")
        assert rc == 1

    def test_disconnected_needs_lcc(self, tmp_path, capsys):
        (tmp_path / "two.txt").write_text("0 1\n1 2\n2 0\n5 6\n")
        rc, _, err = run(capsys, "sample", tmp_path / "two.txt", "--mstar", 100, "--max-steps", 2000)
        assert rc == 2 and "--lcc" in err
        rc, out, _ = run(capsys, "sample", tmp_path / "two.txt", "--lcc", "--mstar", 100, "--max-steps", 2000,
                         "--features", "degree")
        assert rc == 0


class TestMinESS:
    @pytest.mark.parametrize("args,expect", [(["-p", 2], "7530"), (["-p", 1], "6147"),
                                             (["-p", 2, "--eps", 0.025], "30117")])
    def test_values(self, capsys, args, expect):
        rc, out, _ = run(capsys, "miness", *args, "--alpha", 0.05)
        assert rc == 0 and out.strip() == expect

    def test_missing_p(self, capsys):
        rc, _, _ = run(capsys, "miness")
        assert rc == 1

    def test_bad_eps(self, capsys):
        rc, _, _ = run(capsys, "miness", "-p", 2, "--eps", 0)
        assert rc == 1


def test_unknown_command(capsys):
    rc, _, _ = run(capsys, "frobnicate")
    assert rc == 1


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "netmcse.cli", "miness", "-p", "2"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "7530"
