import json

import numpy as np
import pytest

from tugssl import ArgumentError, LabelSet
from tugssl import files
from tugssl.cli import main

from instances import path, two_triangles


# -- file formats --------------------------------------------------------------

def test_edge_list_roundtrip(tmp_path):
    g = two_triangles()
    p = tmp_path / "g.csv"
    files.write_edge_list(g, p)
    assert p.read_text().splitlines()[0] == "src,dst,weight"
    h = files.read_edge_list(p)
    assert (g.W != h.W).nnz == 0


@pytest.mark.parametrize("body", [
    "src,dst,weight\n0,0,1\n",
    "src,dst,weight\n0,1,1\n1,0,2\n",
    "src,dst,weight\n0,1,-1\n",
    "src,dst,weight\n0,1\n",
    "a,b,c\n0,1,1\n",
    "src,dst,weight\n0,x,1\n",
    "",
])
def test_edge_list_rejects(tmp_path, body):
    p = tmp_path / "g.csv"
    p.write_text(body)
    with pytest.raises(ArgumentError):
        files.read_edge_list(p)


def test_edge_list_explicit_n_keeps_isolated(tmp_path):
    p = tmp_path / "g.csv"
    p.write_text("src,dst,weight\n0,1,2.5\n")
    g = files.read_edge_list(p, n=4)
    assert g.n == 4 and list(g.isolated) == [2, 3]


def test_labels_truth_solution_roundtrip(tmp_path):
    labels = LabelSet([3, 0], [1.0, 0.0])
    files.write_labels(tmp_path / "l.csv", labels)
    back = files.read_labels(tmp_path / "l.csv")
    np.testing.assert_array_equal(back.gamma, [0, 3])
    files.write_values(tmp_path / "t.csv", [0, 0.25, 0.5, 1])
    np.testing.assert_array_equal(files.read_truth(tmp_path / "t.csv", 4), [0, 0.25, 0.5, 1])
    with pytest.raises(ArgumentError):
        files.read_truth(tmp_path / "t.csv", 5)
    u = np.array([0.1, 0.6, 1 / 3])
    files.write_solution(tmp_path / "s.csv", u, [0, 1, 0])
    assert (tmp_path / "s.csv").read_text().splitlines()[:2] == ["index,u,label", "0,0.1,0"]
    np.testing.assert_array_equal(files.read_solution(tmp_path / "s.csv"), u)


def test_points_header(tmp_path):
    files.write_points(tmp_path / "p.csv", np.zeros((2, 3)))
    assert (tmp_path / "p.csv").read_text().splitlines()[0] == "x0,x1,x2"


# -- CLI -----------------------------------------------------------------------

@pytest.fixture
def problem(tmp_path):
    g = path(5)
    files.write_edge_list(g, tmp_path / "g.csv")
    files.write_labels(tmp_path / "l.csv", LabelSet([0, 4], [0.0, 1.0]))
    files.write_values(tmp_path / "t.csv", [0, 0, 1, 1, 1])
    return tmp_path


def test_cli_solve(problem, capsys):
    rc = main(["solve", "--graph", str(problem / "g.csv"), "--labels", str(problem / "l.csv"), "--p", "3",
               "--out", str(problem / "s.csv")])
    assert rc == 0
    u = files.read_solution(problem / "s.csv")
    np.testing.assert_allclose(u, [0, 0.25, 0.5, 0.75, 1], atol=1e-9)
    err = capsys.readouterr().err
    assert "iterations=" in err and "residual=" in err and "seconds=" in err


def test_cli_solve_stdout(problem, capsys):
    assert main(["solve", "--graph", str(problem / "g.csv"), "--labels", str(problem / "l.csv")]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "index,u,label" and len(out) == 6


def test_cli_argument_errors(problem, capsys):
    with pytest.raises(SystemExit) as e:
        main(["solve", "--graph", str(problem / "g.csv"), "--labels", str(problem / "l.csv"), "--p", "1"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["solve", "--seed", "-3", "--graph", "x", "--labels", "y"])
    assert e.value.code == 2
    assert main(["solve", "--graph", str(problem / "nope.csv"), "--labels", str(problem / "l.csv")]) == 2
    (problem / "bad.json").write_text("{not json")
    assert main(["sbm-sweep", "--config", str(problem / "bad.json")]) == 2
    (problem / "bad2.json").write_text('{"trials": 0}')
    assert main(["sbm-sweep", "--config", str(problem / "bad2.json")]) == 2


def test_cli_structural_error(tmp_path):
    (tmp_path / "g.csv").write_text("src,dst,weight\n0,1,1\n2,3,1\n")
    files.write_labels(tmp_path / "l.csv", LabelSet([0], [1.0]))
    assert main(["solve", "--graph", str(tmp_path / "g.csv"), "--labels", str(tmp_path / "l.csv")]) == 3


def test_cli_verify(problem, capsys):
    rc = main(["verify", "--graph", str(problem / "g.csv"), "--labels", str(problem / "l.csv"),
               "--truth", str(problem / "t.csv"), "--p", "3"])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report["a1"] is False
    names = [c["name"] for c in report["certificates"]]
    assert names == ["th1_error_bound", "th3_lipschitz_bound", "th2_band_classification"]
    for c in report["certificates"]:
        assert set(c) >= {"name", "applicable", "holds", "bound", "observed", "parameters"}


def test_cli_verify_applicable_and_sbm(tmp_path, capsys):
    g = two_triangles()
    files.write_edge_list(g, tmp_path / "g.csv")
    files.write_labels(tmp_path / "l.csv", LabelSet([0, 1, 4, 5], [0.0, 0.0, 1.0, 1.0]))
    files.write_values(tmp_path / "t.csv", [0, 0, 0, 1, 1, 1])
    rc = main(["verify", "--graph", str(tmp_path / "g.csv"), "--labels", str(tmp_path / "l.csv"),
               "--truth", str(tmp_path / "t.csv"), "--p", "3", "--sbm", "3", "3", "1", "0.1", "--beta", "0.5",
               "--out", str(tmp_path / "r.json")])
    assert rc == 0
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["a1"] is True and report["delta"] == 0.5
    th2 = report["certificates"][2]
    assert th2["holds"] is True and th2["parameters"]["kappa"] == 2
    assert report["sbm"]["threshold"]["bound"] == pytest.approx(1.5)


def test_cli_simulate(problem, capsys):
    tri = problem / "tri.csv"
    tri.write_text("src,dst,weight\n0,1,1\n1,2,1\n0,2,1\n")
    files.write_labels(problem / "tl.csv", LabelSet([0, 2], [0.0, 1.0]))
    rc = main(["simulate", "--graph", str(tri), "--labels", str(problem / "tl.csv"), "--p", "3", "--start", "1",
               "--trials", "4000", "--seed", "9"])
    assert rc == 0
    rep = json.loads(capsys.readouterr().out)
    assert abs(rep["mc_mean"] - 0.5) <= 4 * rep["std_error"]
    rc = main(["simulate", "--graph", str(tri), "--labels", str(problem / "tl.csv"), "--p", "3", "--start", "1",
               "--seed", "9", "--out", str(problem / "traj.csv")])
    assert rc == 0
    lines = (problem / "traj.csv").read_text().splitlines()
    assert lines[0] == "step,vertex,move_kind" and lines[-1].endswith("absorbed")


def test_cli_build_graph(tmp_path, capsys):
    rc = main(["build-graph", "--type", "knn", "--dist", "two_moons", "--num-points", "80", "--k", "6",
               "--seed", "3", "--out", str(tmp_path / "g.csv"), "--points-out", str(tmp_path / "p.csv"),
               "--truth-out", str(tmp_path / "t.csv"), "--labels-out", str(tmp_path / "l.csv"),
               "--labels-per-class", "4"])
    assert rc == 0
    g = files.read_edge_list(tmp_path / "g.csv", 80)
    assert g.n == 80
    truth = files.read_truth(tmp_path / "t.csv", 80)
    labels = files.read_labels(tmp_path / "l.csv", truth)
    assert len(labels) == 8
    first = (tmp_path / "g.csv").read_bytes()
    main(["build-graph", "--type", "knn", "--dist", "two_moons", "--num-points", "80", "--k", "6",
          "--seed", "3", "--out", str(tmp_path / "g2.csv")])
    assert (tmp_path / "g2.csv").read_bytes() == first


@pytest.mark.parametrize("extra", [["--type", "sbm", "--N0", "10", "--N1", "12", "--q", "0.2"],
                                   ["--type", "epsilon", "--dist", "uniform_box", "--eps", "0.3"]])
def test_cli_build_graph_types(tmp_path, extra):
    assert main(["build-graph", *extra, "--seed", "1", "--num-points", "50", "--out", str(tmp_path / "g.csv")]) == 0
    assert (tmp_path / "g.csv").read_text().startswith("src,dst,weight\n")


def test_cli_epsilon_needs_eps(tmp_path):
    assert main(["build-graph", "--type", "epsilon", "--out", str(tmp_path / "g.csv")]) == 2


def test_cli_sweeps(tmp_path):
    cfg = {"N0": 20, "N1": 20, "ratios": [1, 5], "p_list": [2, "inf"], "trials": 2}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    out1, out8 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sbm-sweep", "--config", str(tmp_path / "c.json"), "--seed", "4", "--out", str(out1)]) == 0
    assert main(["--threads", "8", "sbm-sweep", "--config", str(tmp_path / "c.json"), "--seed", "4",
                 "--out", str(out8)]) == 0
    assert out1.read_bytes() == out8.read_bytes()
    assert out1.read_text().splitlines()[0] == "ratio,p,mean_error,std_error,trials,suff_cond_frequency,threshold"
    geo = {"n": 100, "k": 6, "labels_per_class": [2, 4], "p_list": [3], "trials": 2}
    (tmp_path / "g.json").write_text(json.dumps(geo))
    assert main(["geom-experiment", "--config", str(tmp_path / "g.json"), "--out", str(tmp_path / "g.csv")]) == 0
    assert (tmp_path / "g.csv").read_text().splitlines()[0] == "labels_per_class,p,mean_error,std_error,trials"


def test_cli_config_kind_mismatch(tmp_path):
    (tmp_path / "c.json").write_text('{"kind": "geom_experiment"}')
    assert main(["sbm-sweep", "--config", str(tmp_path / "c.json")]) == 2
