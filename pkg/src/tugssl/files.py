"""CSV readers and writers for graphs, labels, solutions and point clouds."""
from __future__ import annotations

import csv
import sys
from contextlib import contextmanager

import numpy as np

from .errors import ArgumentError
from .graph import Graph, LabelSet


def _read_rows(path, header):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            got = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ArgumentError(f"{path}: empty file") from None
        if got != header:
            raise ArgumentError(f"{path}: expected header {','.join(header)}, got {','.join(got)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ArgumentError(f"{path}:{lineno}: expected {len(header)} fields")
            rows.append((lineno, row))
    return rows


@contextmanager
def _output(path):
    """Open `path` for writing; None or "-" means stdout."""
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _int(path, lineno, s):
    try:
        return int(s)
    except ValueError:
        raise ArgumentError(f"{path}:{lineno}: not an integer: {s!r}") from None


def _float(path, lineno, s):
    try:
        return float(s)
    except ValueError:
        raise ArgumentError(f"{path}:{lineno}: not a number: {s!r}") from None


def read_edge_list(path, n=None):
    """Read `src,dst,weight` rows. `n` defaults to one more than the largest index."""
    rows = _read_rows(path, ["src", "dst", "weight"])
    src = np.array([_int(path, ln, r[0]) for ln, r in rows], dtype=np.int64)
    dst = np.array([_int(path, ln, r[1]) for ln, r in rows], dtype=np.int64)
    w = np.array([_float(path, ln, r[2]) for ln, r in rows], dtype=np.float64)
    if n is None:
        if len(src) == 0:
            raise ArgumentError(f"{path}: no edges and no vertex count given")
        n = int(max(src.max(), dst.max())) + 1
    return Graph.from_edges(n, src, dst, w)


def write_edge_list(g, path):
    src, dst, w = g.edges()
    with _output(path) as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["src", "dst", "weight"])
        for a, b, c in zip(src, dst, w):
            out.writerow([int(a), int(b), repr(float(c))])


def read_values(path):
    """Read `index,value` rows into (indices, values)."""
    rows = _read_rows(path, ["index", "value"])
    idx = np.array([_int(path, ln, r[0]) for ln, r in rows], dtype=np.int64)
    val = np.array([_float(path, ln, r[1]) for ln, r in rows], dtype=np.float64)
    return idx, val


def read_truth(path, n):
    idx, val = read_values(path)
    if len(idx) != n or not np.array_equal(np.sort(idx), np.arange(n)):
        raise ArgumentError(f"{path}: truth file must have exactly one row per vertex 0..{n - 1}")
    truth = np.empty(n)
    truth[idx] = val
    return truth


def read_labels(path, truth=None):
    idx, val = read_values(path)
    return LabelSet(idx, val, truth)


def write_values(path, values):
    with _output(path) as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["index", "value"])
        for i, v in enumerate(values):
            out.writerow([i, repr(float(v))])


def write_labels(path, labels):
    with _output(path) as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["index", "value"])
        for i, v in zip(labels.gamma, labels.values):
            out.writerow([int(i), repr(float(v))])


def write_solution(path, u, predicted):
    with _output(path) as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["index", "u", "label"])
        for i, (a, b) in enumerate(zip(u, predicted)):
            out.writerow([i, repr(float(a)), int(b)])


def write_points(path, points):
    points = np.asarray(points)
    with _output(path) as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow([f"x{i}" for i in range(points.shape[1])])
        for row in points:
            out.writerow([repr(float(v)) for v in row])


def read_solution(path):
    """Read an `index,u,label` solution file; returns u ordered by index."""
    rows = _read_rows(path, ["index", "u", "label"])
    idx = np.array([_int(path, ln, r[0]) for ln, r in rows], dtype=np.int64)
    u = np.array([_float(path, ln, r[1]) for ln, r in rows], dtype=np.float64)
    if not np.array_equal(np.sort(idx), np.arange(len(idx))):
        raise ArgumentError(f"{path}: indices must cover 0..{len(idx) - 1} exactly once")
    out = np.empty(len(idx))
    out[idx] = u
    return out


def write_trajectory(path, traj):
    with _output(path) as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["step", "vertex", "move_kind"])
        for i, v in enumerate(traj.states):
            out.writerow([i, int(v), traj.moves[i] if i < len(traj.moves) else ""])
