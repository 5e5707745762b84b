"""
Experiment harness
==================

Sweeps over stochastic block models (error rate as a function of r/q) and
geometric graphs (error rate as a function of the number of labels), with
one row of plot-ready CSV per (setting, p) cell.

Trial ``t`` of cell ``c`` draws all of its randomness from
``numpy.random.SeedSequence(master_seed, spawn_key=(c, t, attempt))``, so
results do not depend on scheduling or on the parameters of other cells, and
the output is byte-identical for any thread count.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .builders import (Kernel, PointCloud, SbmSpec, build_epsilon_graph, build_knn_graph,
                       build_sbm_graph, load_features_knn, sample_labels_bernoulli, sample_labels_per_class,
                       sample_points)
from .consistency import sbm_rates, sbm_threshold_check, suff_condition_check, th1_certificate, th2_certificate
from .errors import ArgumentError
from .graph import check_A1
from .solver import PValue, SolverConfig, classify, solve_dirichlet

log = logging.getLogger(__name__)

SBM_HEADER = ["ratio", "p", "mean_error", "std_error", "trials", "suff_cond_frequency", "threshold"]
GEOM_HEADER = ["labels_per_class", "p", "mean_error", "std_error", "trials"]


@dataclass
class ExperimentConfig:
    kind: str = "sbm_sweep"
    # stochastic block model sweep
    N0: int = 300
    N1: int = 300
    r: float = 0.5
    ratios: list = field(default_factory=lambda: [1.0, 2.0, 2.5, 5.0])
    beta: float = 0.2
    # geometric experiment
    dist: str = "two_moons"
    n: int = 2000
    d: int = 2
    noise: float = 0.1
    features: str | None = None
    graph: str = "knn"
    k: int = 10
    eps: float | None = None
    kernel: str = "triangle"
    knn_mode: str = "symmetric"
    metric: str = "euclidean"
    label_mode: str = "per_class"
    labels_per_class: list = field(default_factory=lambda: [1, 2, 4, 8, 16, 32, 64])
    betas: list = field(default_factory=lambda: [0.2])
    certificates: bool = False
    # shared
    p_list: list = field(default_factory=lambda: [2.0, 2.5, 3.0])
    trials: int = 100
    solver: dict = field(default_factory=dict)
    seed: int = 0
    out: str | None = None
    threads: int = 1
    max_retries: int = 20

    def __post_init__(self):
        if self.trials < 1:
            raise ArgumentError("trials must be >= 1")
        if not self.p_list:
            raise ArgumentError("p_list must be nonempty")
        self.p_values = [PValue.parse(p) for p in self.p_list]
        if self.kind == "sbm_sweep":
            if not self.ratios:
                raise ArgumentError("ratios must be nonempty")
            if any(rq < 1 for rq in self.ratios):
                raise ArgumentError("r/q ratios must be >= 1")
        if self.kind == "geom_experiment":
            if self.label_mode not in ("per_class", "bernoulli"):
                raise ArgumentError("label_mode must be 'per_class' or 'bernoulli'")
            settings = self.labels_per_class if self.label_mode == "per_class" else self.betas
            if not settings:
                raise ArgumentError("label settings list must be nonempty")
            if self.graph not in ("knn", "epsilon"):
                raise ArgumentError("graph must be 'knn' or 'epsilon'")
            if self.graph == "epsilon" and not (self.eps and self.eps > 0):
                raise ArgumentError("epsilon graphs need eps > 0")
        if self.threads < 1:
            raise ArgumentError("threads must be >= 1")
        self.solver_config = SolverConfig(**self.solver)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ArgumentError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def trial_rng(master_seed, cell, trial, attempt=0):
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(cell, trial, attempt))
    return np.random.default_rng(ss)


def _child_seed(rng):
    return int(rng.integers(0, 2 ** 63))


def unlabeled_error(u, truth, labels):
    free = ~labels.mask(len(truth))
    if not free.any():
        return 0.0
    return float(np.mean(classify(u)[free] != truth[free].astype(np.int64)))


def _summary(errors):
    errs = np.asarray([e for e in errors if e is not None], dtype=np.float64)
    if len(errs) == 0:
        return math.nan, math.nan, 0
    std = float(errs.std(ddof=1)) if len(errs) > 1 else 0.0
    return float(errs.mean()), std, len(errs)


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "nan"
    return f"{v:.10g}"


def table_to_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row[h]) for h in header])
    return buf.getvalue()


def write_table(header, rows, path):
    text = table_to_csv(header, rows)
    if path is None or path == "-":
        print(text, end="")
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def _map(fn, tasks, threads):
    if threads == 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, tasks))


# -- stochastic block model sweep ---------------------------------------------

def _sbm_trial(cfg, cell, trial, ratio, p):
    q = cfg.r / ratio
    for attempt in range(cfg.max_retries):
        rng = trial_rng(cfg.seed, cell, trial, attempt)
        spec = SbmSpec(cfg.N0, cfg.N1, cfg.r, q, _child_seed(rng))
        g, truth = build_sbm_graph(spec)
        labels = sample_labels_bernoulli(truth, cfg.beta, _child_seed(rng))
        if g.connected and not labels.empty:
            break
        log.info("cell %d trial %d attempt %d rejected (connected=%s, |gamma|=%d)",
                 cell, trial, attempt, g.connected, len(labels))
    else:
        return None, None
    res = solve_dirichlet(g, labels, p, cfg.solver_config)
    suff = suff_condition_check(sbm_rates(g, truth, labels))
    return unlabeled_error(res.u, truth, labels), suff


def sbm_cells(cfg):
    return [(ratio, p) for ratio in cfg.ratios for p in cfg.p_values]


def run_sbm_sweep(cfg):
    """Error rate of p-Laplacian learning on two-block SBMs for each (r/q, p)."""
    cells = sbm_cells(cfg)
    tasks = [(c, t) for c in range(len(cells)) for t in range(cfg.trials)]
    results = _map(lambda ct: _sbm_trial(cfg, ct[0], ct[1], *cells[ct[0]]), tasks, cfg.threads)
    threshold = sbm_threshold_check(SbmSpec(cfg.N0, cfg.N1, cfg.r, cfg.r), cfg.beta).threshold
    rows = []
    for c, (ratio, p) in enumerate(cells):
        cell_res = results[c * cfg.trials:(c + 1) * cfg.trials]
        mean, std, valid = _summary(e for e, _ in cell_res)
        if valid < cfg.trials:
            log.warning("r/q=%g p=%s: %d of %d trials invalid after retries", ratio, p, cfg.trials - valid, cfg.trials)
        suff = [s for e, s in cell_res if e is not None]
        rows.append({
            "ratio": ratio, "p": str(p), "mean_error": mean, "std_error": std, "trials": valid,
            "suff_cond_frequency": float(np.mean(suff)) if suff else math.nan, "threshold": threshold,
        })
    return rows


# -- geometric experiments ----------------------------------------------------

def _binary_truth(labels):
    vals = np.unique(labels)
    if len(vals) != 2:
        raise ArgumentError(f"binary classification needs exactly 2 classes, found {len(vals)}")
    return (labels == vals[1]).astype(np.float64)


def _geom_graph(cfg, points):
    pc = PointCloud(points)
    kernel = Kernel(cfg.kernel, pc.d)
    if cfg.graph == "epsilon":
        return build_epsilon_graph(pc, cfg.eps, kernel)
    return build_knn_graph(pc, cfg.k, kernel, cfg.knn_mode, cfg.metric, normalize=cfg.metric == "angular")


def _synthetic_instance(cfg, rng):
    pc = sample_points(cfg.dist, cfg.n, cfg.d, _child_seed(rng), noise=cfg.noise)
    if pc.labels is not None:
        truth = pc.labels.astype(np.float64)
    else:
        truth = (pc.points[:, 0] >= 0.5).astype(np.float64)
    return _geom_graph(cfg, pc.points), truth


def _draw_labels(cfg, truth, setting, rng):
    if cfg.label_mode == "per_class":
        return sample_labels_per_class(truth, int(setting), _child_seed(rng))
    return sample_labels_bernoulli(truth, float(setting), _child_seed(rng))


def _every_component_labeled(g, labels):
    comp = g.components
    return len(np.unique(comp[labels.gamma])) == comp.max() + 1


def _geom_trial(cfg, fixed, cell, trial, setting, p):
    for attempt in range(cfg.max_retries):
        rng = trial_rng(cfg.seed, cell, trial, attempt)
        g, truth = fixed if fixed is not None else _synthetic_instance(cfg, rng)
        labels = _draw_labels(cfg, truth, setting, rng)
        if labels.empty:
            continue
        # a user-supplied graph cannot be resampled; a label in each component is enough
        if g.connected or (fixed is not None and _every_component_labeled(g, labels)):
            break
    else:
        return None, None
    res = solve_dirichlet(g, labels, p, cfg.solver_config)
    cert = None
    if cfg.certificates and check_A1(g, labels):
        cert = (th1_certificate(g, labels, res.u, p).holds, th2_certificate(g, labels, res.u, p).holds)
    return unlabeled_error(res.u, truth, labels), cert


def run_geom_experiment(cfg):
    """Error rate on geometric graphs for each (label setting, p)."""
    fixed = None
    if cfg.features:
        g, pc, truth = load_features_knn(cfg.features, cfg.k, cfg.metric, cfg.kernel)
        if truth is None:
            raise ArgumentError("feature file needs a 'label' column for experiments")
        fixed = (g, _binary_truth(truth))
    settings = cfg.labels_per_class if cfg.label_mode == "per_class" else cfg.betas
    if cfg.label_mode == "per_class":
        n_min = cfg.n // 2 if fixed is None else int(min(np.sum(fixed[1] == 0), np.sum(fixed[1] == 1)))
        if fixed is not None or cfg.dist == "two_moons":
            too_many = [s for s in settings if s > n_min]
            if too_many:
                raise ArgumentError(f"labels per class {too_many} exceed smallest class size {n_min}")
    cells = [(s, p) for s in settings for p in cfg.p_values]
    tasks = [(c, t) for c in range(len(cells)) for t in range(cfg.trials)]
    results = _map(lambda ct: _geom_trial(cfg, fixed, ct[0], ct[1], *cells[ct[0]]), tasks, cfg.threads)
    key = "labels_per_class" if cfg.label_mode == "per_class" else "beta"
    rows = []
    for c, (s, p) in enumerate(cells):
        cell_res = results[c * cfg.trials:(c + 1) * cfg.trials]
        mean, std, valid = _summary(e for e, _ in cell_res)
        row = {key: s, "p": str(p), "mean_error": mean, "std_error": std, "trials": valid}
        if cfg.certificates:
            certs = [ce for e, ce in cell_res if ce is not None]
            row["a1_frequency"] = len(certs) / cfg.trials
            row["th1_holds_frequency"] = float(np.mean([a for a, _ in certs])) if certs else math.nan
            row["th2_holds_frequency"] = float(np.mean([b for _, b in certs])) if certs else math.nan
        rows.append(row)
    return rows


def geom_header(cfg):
    head = list(GEOM_HEADER)
    if cfg.label_mode != "per_class":
        head[0] = "beta"
    if cfg.certificates:
        head += ["a1_frequency", "th1_holds_frequency", "th2_holds_frequency"]
    return head
