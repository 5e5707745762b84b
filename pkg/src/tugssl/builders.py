"""
Graph constructors
==================

Random geometric graphs (epsilon-ball and k-nearest-neighbor), two-block
stochastic block models, point samplers, Bernoulli and per-class labelings,
and ingestion of pre-computed feature vectors.

Every random constructor takes a `seed` (anything accepted by
`numpy.random.default_rng`) and is a deterministic function of its inputs.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.spatial.distance import cdist
from scipy.special import gamma as gamma_fn

from .errors import ArgumentError
from .graph import Graph, LabelSet

log = logging.getLogger(__name__)


def unit_ball_volume(d):
    """Volume of the unit ball in R^d."""
    return math.pi ** (d / 2) / gamma_fn(d / 2 + 1)


class Kernel:
    """Radial interaction potential with support [0, 1) normalized to unit mass in R^d.

    ``uniform``: constant 1/alpha_d on [0, 1).
    ``triangle``: c_d (1 - t)_+ with c_d = (d + 1)/alpha_d.

    The normalization is confirmed by radial quadrature at construction.
    """

    NAMES = ("uniform", "triangle")

    def __init__(self, name="triangle", d=2):
        if name not in self.NAMES:
            raise ArgumentError(f"unknown kernel {name!r}; choose from {self.NAMES}")
        if int(d) != d or d < 1:
            raise ArgumentError("kernel dimension must be a positive integer")
        self.name = name
        self.d = int(d)
        alpha_d = unit_ball_volume(self.d)
        self.scale = 1.0 / alpha_d if name == "uniform" else (self.d + 1) / alpha_d
        mass = self.mass()
        if abs(mass - 1.0) > 1e-6:
            raise AssertionError(f"kernel {name} in d={d} integrates to {mass}")

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        inside = (t >= 0) & (t < 1)
        if self.name == "uniform":
            return np.where(inside, self.scale, 0.0)
        return np.where(inside, self.scale * (1.0 - t), 0.0)

    @property
    def sup(self):
        return self.scale

    def mass(self):
        """Integral of eta(|x|) over R^d, by quadrature in the radial variable."""
        surface = self.d * unit_ball_volume(self.d)
        val, _ = integrate.quad(lambda r: float(self(r)) * surface * r ** (self.d - 1), 0.0, 1.0)
        return val

    def scaled(self, r, eps):
        """eta_eps(r) = eps^-d eta(r / eps)."""
        eps = np.asarray(eps, dtype=np.float64)
        return self(np.asarray(r) / eps) / eps ** self.d

    def __repr__(self):
        return f"Kernel({self.name!r}, d={self.d})"


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    dist: str = "custom"
    seed: object = None
    labels: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise ArgumentError("points must be a 2-D array (n, d)")
        if pts.shape[0] < 2:
            raise ArgumentError("a point cloud needs at least 2 points")
        if not np.all(np.isfinite(pts)):
            raise ArgumentError("points must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def d(self):
        return self.points.shape[1]


@dataclass(frozen=True)
class SbmSpec:
    N0: int
    N1: int
    r: float
    q: float
    seed: int = 0

    def __post_init__(self):
        if self.N0 < 2 or self.N1 < 2:
            raise ArgumentError("block sizes must be at least 2")
        for name in ("r", "q"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ArgumentError(f"{name} must lie in [0, 1], got {v}")

    @property
    def n(self):
        return self.N0 + self.N1

    def truth(self):
        return np.r_[np.zeros(self.N0), np.ones(self.N1)]


def sample_points(dist, n, d=2, seed=None, noise=0.1):
    """Sample a point cloud.

    ``uniform_box`` draws i.i.d. uniform points on [0, 1]^d. ``two_moons`` (d = 2)
    draws the upper half circle of radius 1 centered at (0, 0) and the lower half
    circle centered at (1, 0.5), n // 2 points each (the first moon gets the
    extra point for odd n), plus isotropic Gaussian noise of standard deviation
    `noise`. The moon index is stored in `labels`.
    """
    if n < 2:
        raise ArgumentError("need n >= 2")
    rng = np.random.default_rng(seed)
    if dist == "uniform_box":
        if d < 1:
            raise ArgumentError("dimension must be >= 1")
        return PointCloud(rng.random((n, d)), dist, seed)
    if dist == "two_moons":
        if d != 2:
            raise ArgumentError("two_moons is only defined for d = 2")
        n0 = n - n // 2
        t0 = rng.random(n0) * math.pi
        t1 = rng.random(n - n0) * math.pi
        upper = np.c_[np.cos(t0), np.sin(t0)]
        lower = np.c_[1.0 - np.cos(t1), 0.5 - np.sin(t1)]
        pts = np.r_[upper, lower] + noise * rng.standard_normal((n, 2))
        labels = np.r_[np.zeros(n0, dtype=np.int64), np.ones(n - n0, dtype=np.int64)]
        return PointCloud(pts, dist, seed, labels)
    raise ArgumentError(f"unsupported distribution {dist!r} in dimension {d}")


def pairwise_distances(X, metric="euclidean"):
    """Dense (n, n) distance matrix, euclidean or angular (arccos of cosine similarity)."""
    X = np.asarray(X, dtype=np.float64)
    if metric == "euclidean":
        return cdist(X, X)
    if metric == "angular":
        norms = np.linalg.norm(X, axis=1)
        if np.any(norms == 0):
            raise ArgumentError("zero vector has no angular distance")
        U = X / norms[:, None]
        C = np.clip(U @ U.T, -1.0, 1.0)
        D = np.arccos(C)
        np.fill_diagonal(D, 0.0)
        return D
    raise ArgumentError(f"unknown metric {metric!r}")


def angular_distance(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ArgumentError("zero vector has no angular distance")
    return float(np.arccos(np.clip(a @ b / (na * nb), -1.0, 1.0)))


def build_epsilon_graph(pc, eps, kernel):
    """Epsilon-graph with w_xy = eps^-d eta(|x - y| / eps); zero weights are not stored.

    Isolated vertices are logged, not rejected; check `Graph.isolated`.
    """
    if eps <= 0:
        raise ArgumentError("eps must be positive")
    if kernel.d != pc.d:
        raise ArgumentError(f"kernel dimension {kernel.d} != point dimension {pc.d}")
    D = pairwise_distances(pc.points)
    i, j = np.nonzero(np.triu(D < eps, k=1))
    w = kernel.scaled(D[i, j], eps)
    keep = w > 0
    g = Graph.from_edges(pc.n, i[keep], j[keep], w[keep])
    if len(g.isolated):
        log.warning("epsilon-graph has %d isolated vertices", len(g.isolated))
    return g


def knn_radii(D, k):
    """Distance from each point to its k-th nearest neighbor at positive distance."""
    n = D.shape[0]
    if not (1 <= k <= n - 1):
        raise ArgumentError(f"k must satisfy 1 <= k <= n - 1 = {n - 1}")
    Dp = np.where(D > 0, D, np.inf)
    radii = np.partition(Dp, k - 1, axis=1)[:, k - 1]
    if not np.all(np.isfinite(radii)):
        raise ArgumentError("fewer than k distinct neighbors for some point")
    return radii


def _knn_graph_from_distances(D, k, kernel, mode):
    if mode not in ("symmetric", "mutual"):
        raise ArgumentError("mode must be 'symmetric' or 'mutual'")
    radii = knn_radii(D, k)
    rel = D <= radii[:, None]
    np.fill_diagonal(rel, False)
    adj = (rel | rel.T) if mode == "symmetric" else (rel & rel.T)
    i, j = np.nonzero(np.triu(adj, k=1))
    scale = np.maximum(radii[i], radii[j]) if mode == "symmetric" else np.minimum(radii[i], radii[j])
    # log-weights: high-dimensional eps^-d may overflow
    t = D[i, j] / scale
    eta = kernel(t)
    keep = eta > 0
    logw = np.log(eta[keep]) - kernel.d * np.log(scale[keep])
    return i[keep], j[keep], logw, radii


def build_knn_graph(pc, k, kernel, mode="symmetric", metric="euclidean", normalize=False):
    """Symmetric (OR) or mutual (AND) k-NN graph.

    x ~ y when 0 < |x - y| <= eps_k(x) or y is a duplicate of x; ties at the
    k-th distance all count. Edge weights are eta_s(|x - y|) with s the max
    (symmetric) or min (mutual) of eps_k(x), eps_k(y). With `normalize` the
    weights are divided by their maximum, which leaves every operator in the
    package unchanged and keeps eps^-d representable in high dimension.
    """
    if kernel.d != pc.d:
        raise ArgumentError(f"kernel dimension {kernel.d} != point dimension {pc.d}")
    D = pairwise_distances(pc.points, metric)
    i, j, logw, _ = _knn_graph_from_distances(D, k, kernel, mode)
    if normalize and len(logw):
        logw = logw - logw.max()
    return Graph.from_edges(pc.n, i, j, np.exp(logw))


def build_sbm_graph(spec):
    """Two-block SBM with unit weights. Vertices 0..N0-1 form class 0.

    Returns ``(graph, truth)``.
    """
    n = spec.n
    rng = np.random.default_rng(spec.seed)
    i, j = np.triu_indices(n, k=1)
    same = (i < spec.N0) == (j < spec.N0)
    prob = np.where(same, spec.r, spec.q)
    hit = rng.random(len(i)) < prob
    g = Graph.from_edges(n, i[hit], j[hit])
    if not g.connected:
        log.info("SBM sample (seed=%s) is disconnected", spec.seed)
    return g, spec.truth()


def sample_labels_bernoulli(truth, beta, seed=None):
    """Label each vertex independently with probability `beta`."""
    if not 0.0 <= beta <= 1.0:
        raise ArgumentError("beta must lie in [0, 1]")
    truth = np.asarray(truth, dtype=np.float64)
    rng = np.random.default_rng(seed)
    gamma = np.flatnonzero(rng.random(len(truth)) < beta)
    if len(gamma) == 0:
        log.warning("Bernoulli labeling produced an empty label set")
    return LabelSet.from_truth(truth, gamma)


def sample_labels_per_class(truth, per_class, seed=None):
    """Draw exactly `per_class` labeled vertices uniformly from each class."""
    truth = np.asarray(truth, dtype=np.float64)
    rng = np.random.default_rng(seed)
    chosen = []
    for c in np.unique(truth):
        members = np.flatnonzero(truth == c)
        if per_class > len(members):
            raise ArgumentError(f"class {c:g} has {len(members)} points, fewer than {per_class} requested")
        chosen.append(rng.choice(members, size=per_class, replace=False))
    return LabelSet.from_truth(truth, np.sort(np.concatenate(chosen)))


def read_features(path):
    """Read a feature CSV (header row, float columns, optional final `label` column)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ArgumentError(f"{path}: empty feature file") from None
        has_label = header[-1].strip() == "label"
        ncol = len(header)
        rows, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != ncol:
                raise ArgumentError(f"{path}:{lineno}: expected {ncol} fields, got {len(row)}")
            try:
                if has_label:
                    rows.append([float(v) for v in row[:-1]])
                    labels.append(int(row[-1]))
                else:
                    rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ArgumentError(f"{path}:{lineno}: {exc}") from None
    if len(rows) < 2:
        raise ArgumentError(f"{path}: need at least 2 feature rows")
    X = np.array(rows)
    return X, (np.array(labels, dtype=np.int64) if has_label else None)


def load_features_knn(path, k=10, metric="angular", kernel="triangle"):
    """Symmetric k-NN graph over feature vectors read from CSV.

    The kernel dimension is the number of feature columns; weights are
    normalized to a maximum of 1 (see `build_knn_graph`).

    Returns ``(graph, point_cloud, truth_or_None)``.
    """
    X, labels = read_features(path)
    pc = PointCloud(X, f"features:{path}", None, labels)
    g = build_knn_graph(pc, k, Kernel(kernel, pc.d), "symmetric", metric, normalize=True)
    truth = None if labels is None else labels.astype(np.float64)
    return g, pc, truth
