import csv
import json

import pytest

from isinglouvain.cli import EXIT_HYPERPARAMS, EXIT_IO, EXIT_OK, EXIT_REMOTE, main
from isinglouvain.graph import load_dataset, load_edge_list
from isinglouvain.modularity import modularity
from isinglouvain.reports import RunReport, box_summary, histogram, quartiles, read_partition, reference_values


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestQuartiles:
    def test_figure_shape(self):
        assert quartiles([4, 4, 6, 6, 14, 14]) == (4, 6, 14)

    def test_constant(self):
        assert quartiles([5, 5, 5]) == (5, 5, 5)
        assert box_summary([5, 5, 5])["outliers"] == 0

    def test_single_and_empty(self):
        assert quartiles([7]) == (7, 7, 7)
        with pytest.raises(ValueError):
            quartiles([])

    def test_whiskers_and_outliers(self):
        s = box_summary([1, 2, 3, 4, 5, 6, 7, 100])
        iqr = s["q3"] - s["q1"]
        assert s["whisker_high"] == pytest.approx(s["q3"] + 1.5 * iqr)
        assert s["whisker_low"] == pytest.approx(s["q1"] - 1.5 * iqr)
        assert s["outliers"] == 1

    def test_histogram(self):
        text = histogram([1, 2, 2, 3, 10], bins=3, width=10)
        lines = text.splitlines()
        assert len(lines) == 3
        assert lines[0].endswith(" 4")
        assert histogram([5, 5], bins=4).count("\n") == 0


class TestCluster:
    def test_karate_ising(self, capsys, tmp_path):
        code, out, _ = run(capsys, "cluster", "--graph", "karate", "--algorithm", "ising", "--seed", "7", "--out", str(tmp_path))
        assert code == EXIT_OK
        report = RunReport.load(tmp_path / "karate.ising.seed7.report.json")
        assert 0.35 <= report.final_modularity <= 0.4198 + 1e-4
        assert report.hyperparams["max_nodes"] == 30
        assert report.stats["solver_calls"] == len(report.stats["qubo_sizes"])
        assert report.qubo_size_quartiles is not None
        g = load_dataset("karate")
        p = read_partition(tmp_path / "karate.ising.seed7.partition.txt", g)
        assert modularity(g, p) == pytest.approx(report.final_modularity, abs=1e-10)
        assert "Q=" in out

    def test_two_triangles_louvain(self, capsys, tmp_path):
        code, _, _ = run(capsys, "cluster", "--graph", "two_triangles", "--algorithm", "louvain", "--out", str(tmp_path))
        assert code == EXIT_OK
        report = json.loads((tmp_path / "two_triangles.louvain.seed0.report.json").read_text())
        assert report["schema"] == 1
        assert report["num_clusters"] == 2
        assert report["qubo_size_quartiles"] is None

    def test_edge_list_file(self, capsys, tmp_path):
        path = tmp_path / "tri.txt"
        path.write_text("a b 2\nb c 1\na c 1\nc d 1\nd e 2\ne f 1\nd f 1\n")
        code, _, _ = run(capsys, "cluster", "--graph", str(path), "--weighted", "--out", str(tmp_path))
        assert code == EXIT_OK
        g = load_edge_list(path, weighted=True)
        lines = (tmp_path / "tri.ising.seed0.partition.txt").read_text().split("\n")
        assert lines[0].split()[0] == "a"
        p = read_partition(tmp_path / "tri.ising.seed0.partition.txt", g)
        report = RunReport.load(tmp_path / "tri.ising.seed0.report.json")
        assert modularity(g, p) == pytest.approx(report.final_modularity, abs=1e-10)

    def test_deterministic(self, capsys, tmp_path):
        for sub in ("a", "b"):
            run(capsys, "cluster", "--graph", "lesmiserables", "--seed", "2", "--out", str(tmp_path / sub))
        a = (tmp_path / "a" / "lesmiserables.ising.seed2.partition.txt").read_text()
        b = (tmp_path / "b" / "lesmiserables.ising.seed2.partition.txt").read_text()
        assert a == b

    def test_missing_graph(self, capsys, tmp_path):
        code, _, err = run(capsys, "cluster", "--graph", str(tmp_path / "missing.txt"), "--out", str(tmp_path))
        assert code == EXIT_IO
        assert "missing.txt" in err

    def test_malformed_graph(self, capsys, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("0 1\n0\n")
        assert run(capsys, "cluster", "--graph", str(path), "--out", str(tmp_path))[0] == EXIT_IO

    @pytest.mark.parametrize(
        "flag, value",
        [("--max-nodes", "0"), ("--max-clusters", "0"), ("--theta", "-1"), ("--gamma", "-2"), ("--node-strategy", "dfs")],
    )
    def test_bad_hyperparams(self, capsys, tmp_path, flag, value):
        code, _, _ = run(capsys, "cluster", "--graph", "karate", flag, value, "--out", str(tmp_path))
        assert code == EXIT_HYPERPARAMS

    def test_gamma_flag(self, capsys, tmp_path):
        code, _, _ = run(capsys, "cluster", "--graph", "karate", "--gamma", "20", "--out", str(tmp_path))
        assert code == EXIT_OK
        report = RunReport.load(tmp_path / "karate.ising.seed0.report.json")
        assert report.hyperparams["gamma"] == 20

    def test_remote_unavailable(self, capsys, tmp_path):
        code, _, _ = run(
            capsys, "cluster", "--graph", "karate", "--solver", "remote",
            "--endpoint", "http://127.0.0.1:9/solve", "--solver-timeout", "0.2", "--out", str(tmp_path),
        )
        assert code == EXIT_REMOTE


class TestCompare:
    def test_karate(self, capsys, tmp_path):
        code, out, _ = run(capsys, "compare", "--graph", "karate", "--runs", "20", "--out", str(tmp_path))
        assert code == EXIT_OK
        with open(tmp_path / "karate.compare.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert list(rows[0]) == ["graph", "algorithm", "seed", "modularity", "clusters", "solver_calls", "avg_qubo_size", "wall_ms"]
        assert len(rows) == 40
        for alg in ("louvain", "ising"):
            best = max(float(r["modularity"]) for r in rows if r["algorithm"] == alg)
            assert best == pytest.approx(0.4198, abs=1e-4)
        assert "published" in out and "0.4198" in out

    def test_parallel_matches_serial(self, capsys, tmp_path):
        for jobs, sub in (("1", "a"), ("2", "b")):
            run(capsys, "compare", "--graph", "two_triangles", "--runs", "3", "--jobs", jobs, "--out", str(tmp_path / sub))
        strip = lambda p: [{k: v for k, v in r.items() if k != "wall_ms"} for r in csv.DictReader(open(p))]  # noqa: E731
        assert strip(tmp_path / "a" / "two_triangles.compare.csv") == strip(tmp_path / "b" / "two_triangles.compare.csv")

    def test_zero_runs(self, capsys, tmp_path):
        assert run(capsys, "compare", "--graph", "karate", "--runs", "0", "--out", str(tmp_path))[0] == EXIT_HYPERPARAMS


class TestQuboStats:
    def write_report(self, tmp_path, sizes):
        report = RunReport("demo", 10, 12.0, "ising", 0, 0.3, 3, stats={"qubo_sizes": sizes})
        path = tmp_path / "r.json"
        report.save(path)
        return path

    def test_quartile_summary(self, capsys, tmp_path):
        code, out, _ = run(capsys, "qubo-stats", str(self.write_report(tmp_path, [4, 4, 6, 6, 14, 14])))
        assert code == EXIT_OK
        assert "Q1=4  median=6  Q3=14" in out
        assert "outliers: 0" in out

    def test_constant_sizes(self, capsys, tmp_path):
        code, out, _ = run(capsys, "qubo-stats", str(self.write_report(tmp_path, [5, 5, 5])))
        assert "Q1=5  median=5  Q3=5" in out
        assert "outliers: 0" in out

    def test_no_calls(self, capsys, tmp_path):
        code, out, _ = run(capsys, "qubo-stats", str(self.write_report(tmp_path, [])))
        assert code == EXIT_OK
        assert "no QUBO calls" in out

    def test_malformed_report(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"schema": 1, "graph_name": "x"}')
        assert run(capsys, "qubo-stats", str(path))[0] == EXIT_IO
        path.write_text("not json")
        assert run(capsys, "qubo-stats", str(path))[0] == EXIT_IO

    def test_from_cluster_run(self, capsys, tmp_path):
        run(capsys, "cluster", "--graph", "karate", "--out", str(tmp_path))
        code, out, _ = run(capsys, "qubo-stats", str(tmp_path / "karate.ising.seed0.report.json"))
        assert code == EXIT_OK
        assert "QUBO sizes for karate" in out


def test_reference_values():
    ref = reference_values()
    assert ref["karate"]["ising_louvain"] == 0.4198
    assert ref["lesmiserables"]["ising_louvain"] == 0.5667
    assert ref["meredith"]["ising_louvain"] == 0.7571
    assert len(ref) == 12
