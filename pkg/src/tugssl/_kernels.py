"""Compiled inner loops for the DPP sweeps and tug-of-war trajectories."""
import numpy as np
from numba import njit

MOVE_RANDOM_WALK = 0
MOVE_CAROL = 1
MOVE_PAUL = 2

_MASK64 = 0xFFFFFFFFFFFFFFFF


@njit(cache=True, nogil=True)
def dpp_sweeps(indptr, indices, data, deg, labeled, u, alpha, gauss_seidel, tol, max_sweeps, buf):
    """Run DPP sweeps until the largest update is <= tol or max_sweeps is hit.

    Gauss-Seidel updates `u` in place in ascending vertex order; Jacobi reads
    from `u` and writes into `buf`, then copies back. Returns (sweeps, last_change).
    """
    n = u.shape[0]
    beta = 0.5 * (1.0 - alpha)
    change = np.inf
    sweeps = 0
    while sweeps < max_sweeps:
        change = 0.0
        for x in range(n):
            if labeled[x]:
                continue
            lo = indptr[x]
            hi = indptr[x + 1]
            s = 0.0
            vmax = -np.inf
            vmin = np.inf
            for e in range(lo, hi):
                v = u[indices[e]]
                s += data[e] * v
                if v > vmax:
                    vmax = v
                if v < vmin:
                    vmin = v
            new = alpha * (s / deg[x]) + beta * (vmax + vmin)
            diff = abs(new - u[x])
            if diff > change:
                change = diff
            if gauss_seidel:
                u[x] = new
            else:
                buf[x] = new
        if not gauss_seidel:
            for x in range(n):
                if not labeled[x]:
                    u[x] = buf[x]
        sweeps += 1
        if change <= tol:
            break
    return sweeps, change


@njit(cache=True, nogil=True)
def splitmix64(x):
    """One SplitMix64 output for state `x` (uint64 arithmetic, wraps mod 2^64)."""
    z = np.uint64(x) + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True)
def trial_seed(seed, trial):
    """Substream seed of trial `trial` under master `seed`."""
    return splitmix64(splitmix64(np.uint64(seed)) ^ np.uint64(trial))


@njit(cache=True, nogil=True)
def _next_uniform(state):
    # returns (new_state, uniform in [0, 1)) from a SplitMix64 stream
    state = state + np.uint64(0x9E3779B97F4A7C15)
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return state, float(z >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True, nogil=True)
def walk(indptr, indices, data, deg, labeled, carol, paul, alpha, start, max_steps,
         stream_seed, states, moves, record):
    """Simulate one trajectory from `start`.

    Returns (status, last_vertex, steps): status 0 absorbed, 1 truncated,
    2 visited a vertex with no labeled neighbor (last_vertex names it).
    When `record` is set, states[0..steps] and moves[0..steps-1] are filled.
    """
    x = start
    state = np.uint64(stream_seed)
    if record:
        states[0] = x
    steps = 0
    half = 0.5 * (1.0 - alpha)
    while not labeled[x]:
        if steps >= max_steps:
            return 1, x, steps
        state, r = _next_uniform(state)
        if r < alpha:
            state, r2 = _next_uniform(state)
            target = r2 * deg[x]
            lo = indptr[x]
            hi = indptr[x + 1]
            acc = 0.0
            nxt = indices[hi - 1]
            for e in range(lo, hi):
                acc += data[e]
                if target < acc:
                    nxt = indices[e]
                    break
            kind = MOVE_RANDOM_WALK
        elif r < alpha + half:
            nxt = carol[x]
            kind = MOVE_CAROL
        else:
            nxt = paul[x]
            kind = MOVE_PAUL
            if nxt < 0:
                return 2, x, steps
        if record:
            moves[steps] = kind
            states[steps + 1] = nxt
        x = nxt
        steps += 1
    return 0, x, steps


@njit(cache=True, nogil=True)
def exit_samples(indptr, indices, data, deg, labeled, carol, paul, alpha, start, max_steps,
                 seed, first_trial, trials, exit_vertex, taus, status):
    """Run trials first_trial .. first_trial+trials-1, each on its own substream."""
    dummy_s = np.empty(1, dtype=np.int64)
    dummy_m = np.empty(1, dtype=np.int8)
    for t in range(trials):
        s = trial_seed(seed, first_trial + t)
        st, last, steps = walk(indptr, indices, data, deg, labeled, carol, paul, alpha,
                               start, max_steps, s, dummy_s, dummy_m, False)
        exit_vertex[t] = last
        taus[t] = steps
        status[t] = st
        if st == 2:
            return t
    return trials
