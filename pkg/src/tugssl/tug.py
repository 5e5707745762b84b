"""
Tug-of-war with noise
=====================

Simulation of the stochastic process behind the p-Laplacian: from an
unlabeled vertex the token takes a random-walk step with probability alpha,
moves to the neighbor maximizing u (Carol) with probability (1 - alpha)/2,
and otherwise jumps to the labeled neighbor with the smallest label (Paul).
The walk stops on the labeled set. Ties go to the smallest vertex index.

Each trial draws from its own SplitMix64 stream seeded by
``trial_seed(seed, trial)``, so ``simulate_trajectory(..., seed=trial_seed(s, i))``
replays trial ``i`` of ``mc_exit_value(..., seed=s)`` exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import ArgumentError, StructuralError
from .solver import _as_p

MOVE_NAMES = ("random_walk", "carol_max", "paul_min")


def trial_seed(seed, trial):
    """Seed of the substream used by trial `trial` (SplitMix64 hash of both)."""
    return int(_kernels.trial_seed(np.uint64(int(seed) & _kernels._MASK64), np.uint64(trial)))


@dataclass
class Trajectory:
    states: np.ndarray
    moves: list
    tau: int | None
    seed: int
    truncated: bool = False

    def to_csv(self, path):
        """Write `step,vertex,move_kind` rows; the final row carries "absorbed"."""
        from .files import write_trajectory
        write_trajectory(path, self)


class McExit(NamedTuple):
    mean: float
    std_error: float
    truncated_count: int


def strategy_tables(g, labels, u):
    """Carol's and Paul's target for every vertex (-1 where Paul has no move)."""
    u = np.asarray(u, dtype=np.float64)
    gvals = labels.full_values(g.n, fill=np.inf)
    carol = np.full(g.n, -1, dtype=np.int64)
    paul = np.full(g.n, -1, dtype=np.int64)
    for x in range(g.n):
        nb = g.indices[g.indptr[x]:g.indptr[x + 1]]
        if len(nb) == 0:
            continue
        carol[x] = nb[np.argmax(u[nb])]
        gv = gvals[nb]
        if np.isfinite(gv).any():
            paul[x] = nb[np.argmin(gv)]
    return carol, paul


def _prepare(g, labels, u, start):
    g._check_vertex(start)
    if labels.empty:
        raise StructuralError("label set is empty")
    m = labels.mask(g.n)
    if len(g.isolated) and not m[g.isolated].all():
        raise StructuralError(f"vertex {g.isolated[~m[g.isolated]][0]} is isolated")
    carol, paul = strategy_tables(g, labels, u)
    return (np.asarray(g.indptr, dtype=np.int64), np.asarray(g.indices, dtype=np.int64),
            g.data, g.degrees, m, carol, paul)


def simulate_trajectory(g, labels, u, p, start, max_steps=1_000_000, seed=0):
    """One realization of the process started at `start`.

    Raises StructuralError when the walk reaches an unlabeled vertex without
    a labeled neighbor.
    """
    arrays = _prepare(g, labels, u, start)
    cap = int(max_steps)
    states = np.empty(cap + 1, dtype=np.int64)
    moves = np.empty(max(cap, 1), dtype=np.int8)
    status, last, steps = _kernels.walk(*arrays, _as_p(p).alpha, start, cap,
                                        np.uint64(int(seed) & _kernels._MASK64), states, moves, True)
    if status == 2:
        raise StructuralError(f"vertex {last} has no labeled neighbor")
    names = [MOVE_NAMES[k] for k in moves[:steps]]
    absorbed = status == 0
    if absorbed:
        names.append("absorbed")
    return Trajectory(states[:steps + 1].copy(), names, steps if absorbed else None, int(seed),
                      truncated=not absorbed)


def exit_samples(g, labels, u, p, start, trials, max_steps=1_000_000, seed=0):
    """Exit vertex and stopping time of each trial (truncated trials have status 1).

    Returns ``(exit_vertex, tau, status)`` arrays of length `trials`.
    """
    if trials < 1:
        raise ArgumentError("trials must be >= 1")
    arrays = _prepare(g, labels, u, start)
    ex = np.empty(trials, dtype=np.int64)
    taus = np.empty(trials, dtype=np.int64)
    status = np.empty(trials, dtype=np.int8)
    done = _kernels.exit_samples(*arrays, _as_p(p).alpha, start, int(max_steps),
                                 np.uint64(int(seed) & _kernels._MASK64), 0, trials, ex, taus, status)
    if done < trials:
        raise StructuralError(f"vertex {ex[done]} has no labeled neighbor")
    return ex, taus, status


def mc_exit_value(g, labels, u, p, start, trials, max_steps=1_000_000, seed=0):
    """Monte-Carlo estimate of E[g(X_tau) | X_0 = start].

    Returns ``(mean, std_error, truncated_count)``; the mean is NaN when every
    trial was truncated.
    """
    ex, _, status = exit_samples(g, labels, u, p, start, trials, max_steps, seed)
    ok = status == 0
    vals = labels.full_values(g.n)[ex[ok]]
    k = len(vals)
    if k == 0:
        return McExit(float("nan"), float("nan"), int(trials))
    se = float(vals.std(ddof=1) / np.sqrt(k)) if k > 1 else 0.0
    return McExit(float(vals.mean()), se, int(trials - k))


def one_step_expectation(g, labels, u, p, x):
    """Exact E[u(X_{i+1}) | X_i = x] for unlabeled x under the process law."""
    g._check_vertex(x)
    m = labels.mask(g.n)
    if m[x]:
        raise ArgumentError(f"vertex {x} is labeled; the process is absorbed there")
    nb = g.neighbors(x)
    if len(nb) == 0:
        raise StructuralError(f"vertex {x} is isolated")
    lab = nb[m[nb]]
    if len(lab) == 0:
        raise StructuralError(f"vertex {x} has no labeled neighbor")
    a = _as_p(p).alpha
    u = np.asarray(u, dtype=np.float64)
    gvals = labels.full_values(g.n)
    avg = g.neighbor_weights(x) @ u[nb] / g.degrees[x]
    return float(a * avg + 0.5 * (1 - a) * (u[nb].max() + gvals[lab].min()))
