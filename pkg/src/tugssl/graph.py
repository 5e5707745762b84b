"""
Weighted graphs and label sets
==============================

`Graph` is an immutable, symmetric, self-loop-free weighted graph stored in
CSR form with neighbor lists sorted by vertex index. `LabelSet` holds the
labeled vertices, their boundary values and (optionally) a ground-truth
labeling of every vertex.

The remaining functions compute the purely combinatorial quantities used by
the consistency certificates: hop distances, the labeled-neighbor ratio
`delta`, the edge sup-norm of a gradient and the class boundary bands.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import ArgumentError, StructuralError


class Graph:
    """Immutable weighted undirected graph.

    Parameters
    ----------
    W : sparse or dense (n, n) array
        Symmetric nonnegative weight matrix with zero diagonal. Explicit zeros
        are dropped; only positive weights are stored.
    """

    def __init__(self, W):
        W = sparse.csr_matrix(W, dtype=np.float64)
        if W.shape[0] != W.shape[1]:
            raise ArgumentError(f"weight matrix must be square, got {W.shape}")
        if W.shape[0] < 1:
            raise ArgumentError("graph needs at least one vertex")
        W.sum_duplicates()
        W.eliminate_zeros()
        W.sort_indices()
        if not np.all(np.isfinite(W.data)):
            raise ArgumentError("weights must be finite")
        if np.any(W.data < 0):
            raise ArgumentError("weights must be nonnegative")
        if np.any(W.diagonal() != 0):
            raise ArgumentError("self-loops are not allowed")
        if (W != W.T).nnz:
            raise ArgumentError("weight matrix must be symmetric")

        self._W = W
        self.n = W.shape[0]
        self.indptr = W.indptr
        self.indices = W.indices
        self.data = W.data
        self.degrees = np.asarray(W.sum(axis=1)).ravel()
        for a in (self.indptr, self.indices, self.data, self.degrees):
            a.setflags(write=False)
        self._ncomp = None
        self._comp = None

    @classmethod
    def from_edges(cls, n, src, dst, weight=None):
        """Build a graph from an undirected edge list (each edge listed once)."""
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if weight is None:
            weight = np.ones(len(src))
        weight = np.asarray(weight, dtype=np.float64)
        if not (len(src) == len(dst) == len(weight)):
            raise ArgumentError("edge arrays must have equal length")
        if len(src):
            if src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= n:
                raise ArgumentError("edge endpoint out of range")
            if np.any(src == dst):
                raise ArgumentError("self-loops are not allowed")
            if np.any(weight <= 0):
                raise ArgumentError("edge weights must be strictly positive")
            lo, hi = np.minimum(src, dst), np.maximum(src, dst)
            keys = lo * n + hi
            if len(np.unique(keys)) != len(keys):
                raise ArgumentError("duplicate edge in edge list")
        rows = np.concatenate([src, dst])
        cols = np.concatenate([dst, src])
        vals = np.concatenate([weight, weight])
        return cls(sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)))

    @property
    def W(self):
        """Copy of the CSR weight matrix."""
        return self._W.copy()

    @property
    def num_edges(self):
        return len(self.data) // 2

    def neighbors(self, x):
        """Sorted neighbor indices of `x` (read-only view)."""
        self._check_vertex(x)
        return self.indices[self.indptr[x]:self.indptr[x + 1]]

    def neighbor_weights(self, x):
        self._check_vertex(x)
        return self.data[self.indptr[x]:self.indptr[x + 1]]

    def edges(self):
        """Arrays (src, dst, weight) listing each undirected edge once with src < dst."""
        coo = sparse.triu(self._W, k=1).tocoo()
        order = np.lexsort((coo.col, coo.row))
        return coo.row[order].astype(np.int64), coo.col[order].astype(np.int64), coo.data[order]

    def _components(self):
        if self._ncomp is None:
            self._ncomp, self._comp = csgraph.connected_components(self._W, directed=False)
        return self._ncomp, self._comp

    @property
    def components(self):
        """Connected component label of every vertex."""
        return self._components()[1]

    @property
    def connected(self):
        return self._components()[0] == 1

    @property
    def isolated(self):
        """Indices of vertices with zero degree."""
        return np.flatnonzero(self.degrees == 0)

    def _check_vertex(self, x):
        if not (isinstance(x, (int, np.integer)) and 0 <= x < self.n):
            raise ArgumentError(f"invalid vertex index {x!r} for graph with {self.n} vertices")

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.num_edges})"


class LabelSet:
    """Labeled vertices, their values, and an optional full ground truth.

    Parameters
    ----------
    gamma : array of int
        Labeled vertex indices (stored sorted, without duplicates).
    values : array of float
        Boundary value for each entry of `gamma`, in the same order as given.
    truth : array of float, optional
        Ground-truth value of every vertex. Must agree with `values` on `gamma`.
    """

    def __init__(self, gamma, values, truth=None):
        gamma = np.asarray(gamma, dtype=np.int64).ravel()
        values = np.asarray(values, dtype=np.float64).ravel()
        if len(gamma) != len(values):
            raise ArgumentError("gamma and values must have equal length")
        if len(np.unique(gamma)) != len(gamma):
            raise ArgumentError("duplicate labeled vertex")
        if len(gamma) and gamma.min() < 0:
            raise ArgumentError("negative vertex index in label set")
        order = np.argsort(gamma, kind="stable")
        self.gamma = gamma[order]
        self.values = values[order]
        if truth is not None:
            truth = np.asarray(truth, dtype=np.float64).ravel()
            if len(gamma) and self.gamma[-1] >= len(truth):
                raise ArgumentError("labeled vertex outside the truth vector")
            if not np.array_equal(truth[self.gamma], self.values):
                raise ArgumentError("boundary values disagree with truth on gamma")
            truth.setflags(write=False)
        self.truth = truth
        self.gamma.setflags(write=False)
        self.values.setflags(write=False)

    @classmethod
    def from_truth(cls, truth, gamma):
        truth = np.asarray(truth, dtype=np.float64)
        gamma = np.asarray(gamma, dtype=np.int64)
        return cls(gamma, truth[gamma], truth)

    @property
    def empty(self):
        return len(self.gamma) == 0

    def __len__(self):
        return len(self.gamma)

    def mask(self, n):
        """Boolean indicator of the labeled vertices."""
        self._check_size(n)
        m = np.zeros(n, dtype=bool)
        m[self.gamma] = True
        return m

    def full_values(self, n, fill=np.nan):
        """Length-n array with boundary values on gamma and `fill` elsewhere."""
        self._check_size(n)
        g = np.full(n, fill, dtype=np.float64)
        g[self.gamma] = self.values
        return g

    def _check_size(self, n):
        if len(self.gamma) and self.gamma[-1] >= n:
            raise ArgumentError(f"labeled vertex {self.gamma[-1]} out of range for n={n}")
        if self.truth is not None and len(self.truth) != n:
            raise ArgumentError(f"truth has length {len(self.truth)}, graph has {n} vertices")

    def __repr__(self):
        return f"LabelSet(|gamma|={len(self.gamma)}, truth={'yes' if self.truth is not None else 'no'})"


def hop_distances(g, sources):
    """Hop distance from every vertex to the nearest vertex of `sources` (inf if unreachable)."""
    sources = np.asarray(sources, dtype=np.int64).ravel()
    if len(sources) == 0:
        raise ArgumentError("source set must be nonempty")
    if sources.min() < 0 or sources.max() >= g.n:
        raise ArgumentError("source vertex out of range")
    if g.num_edges == 0:
        dist = np.full(g.n, np.inf)
        dist[sources] = 0.0
        return dist
    return csgraph.dijkstra(g._W, directed=False, indices=sources, unweighted=True, min_only=True)


def graph_distance(g, x, A):
    """Length (number of edges) of the shortest path from `x` to the set `A`.

    Returns an int, or ``math.inf`` when no vertex of `A` is reachable.
    """
    g._check_vertex(x)
    A = np.atleast_1d(np.asarray(A, dtype=np.int64))
    if len(A) == 0:
        raise ArgumentError("target set must be nonempty")
    d = hop_distances(g, A)[x]
    return math.inf if np.isinf(d) else int(d)


def _require_positive_degree(g):
    iso = g.isolated
    if len(iso):
        raise StructuralError(f"vertex {iso[0]} has zero degree")


def labeled_weight_fraction(g, labels):
    """Per-vertex weighted fraction of neighbors that are labeled."""
    _require_positive_degree(g)
    return (g._W @ labels.mask(g.n).astype(np.float64)) / g.degrees


def delta(g, labels):
    """Smallest weighted ratio of labeled neighbors to all neighbors."""
    return float(labeled_weight_fraction(g, labels).min())


def check_A1(g, labels):
    """True iff every vertex (labeled ones included) has a labeled neighbor."""
    m = labels.mask(g.n)
    has = np.zeros(g.n, dtype=bool)
    rows = np.repeat(np.arange(g.n), np.diff(g.indptr))
    has[rows[m[g.indices]]] = True
    return bool(has.all())


def grad_sup_norm(g, f):
    """Largest absolute difference of `f` across an edge (0 on an edgeless graph)."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (g.n,):
        raise ArgumentError(f"function must have shape ({g.n},), got {f.shape}")
    if g.num_edges == 0:
        return 0.0
    rows = np.repeat(np.arange(g.n), np.diff(g.indptr))
    return float(np.max(np.abs(f[rows] - f[g.indices])))


def boundary_band(g, truth, m):
    """Vertices within `m` hops of the opposite class, as a sorted index array.

    `truth` must be a 0/1 labeling with both classes present.
    """
    truth = np.asarray(truth)
    if truth.shape != (g.n,):
        raise ArgumentError(f"truth must have shape ({g.n},)")
    if not np.all((truth == 0) | (truth == 1)):
        raise ArgumentError("truth must be binary (0/1)")
    if m < 0 or int(m) != m:
        raise ArgumentError("band width m must be a nonnegative integer")
    c1 = truth == 1
    if c1.all() or not c1.any():
        raise ArgumentError("both classes must be nonempty for the band to be defined")
    to_1 = hop_distances(g, np.flatnonzero(c1))
    to_0 = hop_distances(g, np.flatnonzero(~c1))
    in_band = np.where(c1, to_0 <= m, to_1 <= m)
    return np.flatnonzero(in_band)
