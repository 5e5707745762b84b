import csv
import io
import json
import math

import numpy as np
import pytest

from tugssl import ArgumentError
from tugssl.experiments import (GEOM_HEADER, SBM_HEADER, ExperimentConfig, geom_header, run_geom_experiment,
                                run_sbm_sweep, table_to_csv, trial_rng, unlabeled_error)
from tugssl.graph import LabelSet


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def small_sbm(**kw):
    base = dict(kind="sbm_sweep", N0=30, N1=30, r=0.6, ratios=[1, 2, 5], p_list=[2, 3], trials=3, seed=1)
    base.update(kw)
    return ExperimentConfig.from_dict(base)


def small_geom(**kw):
    base = dict(kind="geom_experiment", dist="two_moons", n=200, k=8, labels_per_class=[2, 8], p_list=[3],
                trials=3, seed=2)
    base.update(kw)
    return ExperimentConfig.from_dict(base)


# -- config --------------------------------------------------------------------

@pytest.mark.parametrize("bad", [
    dict(trials=0), dict(p_list=[]), dict(ratios=[]), dict(ratios=[0.5, 2]), dict(p_list=[1.5]), dict(bogus=1),
])
def test_config_validation(bad):
    with pytest.raises(ArgumentError):
        small_sbm(**bad)


def test_geom_config_validation():
    with pytest.raises(ArgumentError):
        small_geom(labels_per_class=[])
    with pytest.raises(ArgumentError):
        small_geom(graph="epsilon")
    with pytest.raises(ArgumentError):
        small_geom(label_mode="sometimes")


def test_config_json_roundtrip(tmp_path):
    cfg = small_sbm()
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg.to_dict()))
    again = ExperimentConfig.from_json(str(p))
    assert again.to_dict() == cfg.to_dict()


# -- seeds and metrics ---------------------------------------------------------

def test_trial_rng_depends_only_on_its_key():
    a = trial_rng(5, 2, 7).random(4)
    b = trial_rng(5, 2, 7).random(4)
    c = trial_rng(5, 3, 7).random(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_unlabeled_error_ignores_labeled():
    truth = np.array([0, 0, 1, 1], dtype=float)
    labels = LabelSet.from_truth(truth, [0, 3])
    u = np.array([0.0, 0.7, 0.9, 1.0])
    assert unlabeled_error(u, truth, labels) == 0.5
    assert unlabeled_error(truth, truth, LabelSet.from_truth(truth, [0, 1, 2, 3])) == 0.0


def test_table_format():
    text = table_to_csv(["a", "b", "c"], [{"a": 1, "b": 0.1 + 0.2, "c": math.nan}])
    assert text == "a,b,c\n1,0.3,nan\n"


# -- SBM sweep -----------------------------------------------------------------

def test_sbm_sweep_cell_count_and_header():
    cfg = small_sbm()
    rows = run_sbm_sweep(cfg)
    assert len(rows) == 6
    text = table_to_csv(SBM_HEADER, rows)
    assert text.splitlines()[0] == "ratio,p,mean_error,std_error,trials,suff_cond_frequency,threshold"
    parsed = rows_of(text)
    assert [(r["ratio"], r["p"]) for r in parsed] == [("1", "2"), ("1", "3"), ("2", "2"), ("2", "3"),
                                                       ("5", "2"), ("5", "3")]
    assert all(float(r["threshold"]) == pytest.approx(30 / 29) for r in parsed)


def test_sbm_sweep_deterministic_and_thread_independent():
    a = table_to_csv(SBM_HEADER, run_sbm_sweep(small_sbm(threads=1)))
    b = table_to_csv(SBM_HEADER, run_sbm_sweep(small_sbm(threads=4)))
    assert a == b


def test_sbm_cells_independent_of_other_cells():
    full = run_sbm_sweep(small_sbm(ratios=[1, 2, 5]))
    part = run_sbm_sweep(small_sbm(ratios=[1, 2]))
    assert full[:4] == part


def test_sbm_no_information_level():
    rows = run_sbm_sweep(small_sbm(N0=60, N1=60, ratios=[1], p_list=[2], trials=20, beta=0.2))
    assert 0.35 <= rows[0]["mean_error"] <= 0.65


def test_sbm_retries_exhausted_marks_cell_invalid():
    # r = 0.001 on 20 vertices: a connected sample is practically impossible
    rows = run_sbm_sweep(small_sbm(N0=10, N1=10, r=0.001, ratios=[1], p_list=[2], trials=2, max_retries=3))
    assert rows[0]["trials"] == 0 and math.isnan(rows[0]["mean_error"])
    assert table_to_csv(SBM_HEADER, rows).splitlines()[1].startswith("1,2,nan,nan,0,nan,")


# -- geometric experiment ------------------------------------------------------

def test_geom_header_and_rows():
    cfg = small_geom()
    rows = run_geom_experiment(cfg)
    assert geom_header(cfg) == GEOM_HEADER
    assert [(r["labels_per_class"], r["p"]) for r in rows] == [(2, "3"), (8, "3")]
    assert all(r["trials"] == 3 for r in rows)


def test_geom_all_points_labeled_gives_zero_error():
    rows = run_geom_experiment(small_geom(n=40, k=5, labels_per_class=[20], trials=2))
    assert rows[0]["mean_error"] == 0.0


def test_geom_too_many_labels():
    with pytest.raises(ArgumentError):
        run_geom_experiment(small_geom(n=40, k=5, labels_per_class=[21], trials=1))


def test_geom_bernoulli_mode_and_certificates():
    cfg = small_geom(dist="uniform_box", graph="epsilon", eps=0.25, n=150, label_mode="bernoulli",
                     betas=[0.5], certificates=True, kernel="uniform")
    rows = run_geom_experiment(cfg)
    head = geom_header(cfg)
    assert head[0] == "beta" and head[-3:] == ["a1_frequency", "th1_holds_frequency", "th2_holds_frequency"]
    assert set(head) == set(rows[0])


def test_geom_deterministic_threads():
    a = table_to_csv(GEOM_HEADER, run_geom_experiment(small_geom(threads=1)))
    b = table_to_csv(GEOM_HEADER, run_geom_experiment(small_geom(threads=3)))
    assert a == b


def test_geom_features(tmp_path):
    rng = np.random.default_rng(0)
    n = 60
    y = np.r_[np.zeros(n // 2), np.ones(n // 2)].astype(int)
    X = rng.standard_normal((n, 4)) + np.where(y[:, None] == 1, [4, 0, 0, 0], [0, 4, 0, 0])
    p = tmp_path / "feat.csv"
    p.write_text("f0,f1,f2,f3,label\n" + "".join(
        ",".join(repr(float(v)) for v in row) + f",{lab}\n" for row, lab in zip(X, y)))
    cfg = small_geom(features=str(p), metric="angular", k=6, labels_per_class=[3], trials=4)
    rows = run_geom_experiment(cfg)
    assert rows[0]["mean_error"] <= 0.1
