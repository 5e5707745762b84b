"""
Game-theoretic p-Laplacian learning
===================================

The operator is the convex combination

    L_p u(x) = alpha * L_rw u(x) + (1 - alpha) * L_inf u(x),   alpha = 1/(p - 1),

of the random-walk Laplacian and the (unweighted) graph infinity-Laplacian.
`solve_dirichlet` finds the unique u with L_p u = 0 off the labeled set and
u = g on it, by iterating the dynamic programming principle

    u(x) <- alpha/d_x sum_y w_xy u(y) + (1 - alpha)/2 (max_{N_x} u + min_{N_x} u).

The map is monotone, so sweeps started from the label minimum (maximum)
increase (decrease) monotonically to the solution.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import spsolve

from . import _kernels
from .errors import ArgumentError, StructuralError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PValue:
    """Exponent p in [2, inf]; ``PValue(math.inf)`` is Lipschitz learning (alpha = 0)."""

    p: float

    def __post_init__(self):
        p = float(self.p)
        if math.isnan(p) or p < 2:
            raise ArgumentError(f"p must be >= 2, got {self.p}")
        object.__setattr__(self, "p", p)

    @classmethod
    def parse(cls, value):
        if isinstance(value, PValue):
            return value
        if isinstance(value, str) and value.strip().lower() in ("inf", "infinity", "∞"):
            return cls(math.inf)
        return cls(float(value))

    @property
    def is_infinite(self):
        return math.isinf(self.p)

    @property
    def alpha(self):
        return 0.0 if self.is_infinite else 1.0 / (self.p - 1.0)

    def __str__(self):
        return "inf" if self.is_infinite else f"{self.p:g}"


def _as_p(p):
    return PValue.parse(p)


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-10
    max_iterations: int = 1_000_000
    sweep: str = "gauss_seidel"
    initialization: str = "label_mean"

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ArgumentError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ArgumentError("max_iterations must be >= 1")
        if self.sweep not in ("jacobi", "gauss_seidel"):
            raise ArgumentError(f"unknown sweep {self.sweep!r}")
        if self.initialization not in ("min_label", "max_label", "label_mean"):
            raise ArgumentError(f"unknown initialization {self.initialization!r}")


@dataclass
class SolveResult:
    u: np.ndarray
    iterations: int
    residual: float
    converged: bool
    seconds: float = 0.0


def _neighbor_values(g, u, x):
    if g.degrees[x] == 0:
        raise StructuralError(f"vertex {x} is isolated")
    return u[g.neighbors(x)], g.neighbor_weights(x)


def apply_rw_laplacian(g, u, x):
    """(1/d_x) sum_y w_xy (u(x) - u(y))."""
    vals, w = _neighbor_values(g, u, x)
    return float(u[x] - w @ vals / g.degrees[x])


def apply_infty_laplacian(g, u, x):
    """u(x) minus the midrange of u over the neighbors of x."""
    vals, _ = _neighbor_values(g, u, x)
    return float(u[x] - 0.5 * (vals.max() + vals.min()))


def apply_game_p_laplacian(g, u, x, p):
    a = _as_p(p).alpha
    if a == 1.0:
        return apply_rw_laplacian(g, u, x)
    if a == 0.0:
        return apply_infty_laplacian(g, u, x)
    return a * apply_rw_laplacian(g, u, x) + (1 - a) * apply_infty_laplacian(g, u, x)


def dpp_rhs(g, u, x, p):
    """Right-hand side of the DPP at x; reads only the neighbors of x."""
    a = _as_p(p).alpha
    vals, w = _neighbor_values(g, u, x)
    return float(a * (w @ vals) / g.degrees[x] + 0.5 * (1 - a) * (vals.min() + vals.max()))


def dpp_map(g, u, p):
    """DPP right-hand side at every vertex (vectorized; no vertex may be isolated)."""
    if len(g.isolated):
        raise StructuralError(f"vertex {g.isolated[0]} is isolated")
    a = _as_p(p).alpha
    u = np.asarray(u, dtype=np.float64)
    vals = u[g.indices]
    starts = g.indptr[:-1]
    mid = 0.5 * (np.maximum.reduceat(vals, starts) + np.minimum.reduceat(vals, starts))
    avg = np.add.reduceat(g.data * vals, starts) / g.degrees
    return a * avg + (1 - a) * mid


def residual(g, labels, u, p):
    """Sup norm of L_p u over the unlabeled vertices."""
    free = ~labels.mask(g.n)
    if not free.any():
        return 0.0
    return float(np.max(np.abs(u - dpp_map(g, u, p))[free]))


def _check_solvable(g, labels):
    if labels.empty:
        raise StructuralError("label set is empty")
    m = labels.mask(g.n)
    comp = g.components
    covered = np.zeros(comp.max() + 1, dtype=bool)
    covered[comp[m]] = True
    if not covered.all():
        bad = np.flatnonzero(~covered[comp])[0]
        raise StructuralError(f"the connected component of vertex {bad} has no labeled vertex")
    return m


def _initial(g, labels, init):
    v = labels.values
    fill = {"min_label": v.min(), "max_label": v.max(), "label_mean": v.mean()}[init]
    return labels.full_values(g.n, fill=fill)


def solve_dirichlet(g, labels, p, cfg=None):
    """Solve L_p u = 0 off the labeled set with u = g on it.

    Non-convergence within `cfg.max_iterations` sweeps is reported through
    ``converged=False``, not raised.
    """
    cfg = cfg or SolverConfig()
    p = _as_p(p)
    t0 = time.perf_counter()
    m = _check_solvable(g, labels)
    u = _initial(g, labels, cfg.initialization)
    if m.all():
        return SolveResult(u, 0, 0.0, True, time.perf_counter() - t0)

    alpha = p.alpha
    gs = cfg.sweep == "gauss_seidel"
    buf = np.empty_like(u)
    indptr = np.asarray(g.indptr, dtype=np.int64)
    indices = np.asarray(g.indices, dtype=np.int64)
    done = 0
    res = math.inf
    while done < cfg.max_iterations:
        sweeps, _ = _kernels.dpp_sweeps(indptr, indices, g.data, g.degrees, m, u, alpha, gs,
                                        cfg.tolerance, cfg.max_iterations - done, buf)
        done += sweeps
        res = residual(g, labels, u, p)
        if res <= cfg.tolerance:
            break
    converged = res <= cfg.tolerance
    elapsed = time.perf_counter() - t0
    if not converged:
        log.warning("p=%s solve stopped after %d sweeps with residual %.3e", p, done, res)
    return SolveResult(u, done, res, converged, elapsed)


def laplace_learning(g, labels):
    """Harmonic extension of the labels by a direct sparse solve (the p = 2 case)."""
    m = _check_solvable(g, labels)
    u = labels.full_values(g.n, fill=0.0)
    free = np.flatnonzero(~m)
    if len(free) == 0:
        return u
    W = g.W.tocsr()
    L = (-W[free][:, free]).tolil()
    L.setdiag(g.degrees[free])
    b = W[free][:, np.flatnonzero(m)] @ labels.values
    u[free] = spsolve(L.tocsc(), b)
    return u


def classify(u):
    """Threshold at 1/2; a tie goes to class 1."""
    return (np.asarray(u) >= 0.5).astype(np.int64)
