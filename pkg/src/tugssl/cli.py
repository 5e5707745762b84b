"""Command-line entry point: ``tugssl <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import files
from .builders import (Kernel, SbmSpec, build_epsilon_graph, build_knn_graph, build_sbm_graph,
                       load_features_knn, sample_labels_bernoulli, sample_labels_per_class, sample_points)
from .consistency import (sbm_rates, sbm_threshold_check, suff_condition_check, th1_certificate,
                          th2_certificate, th3_certificate)
from .errors import ArgumentError, StructuralError
from .experiments import (SBM_HEADER, ExperimentConfig, geom_header, run_geom_experiment, run_sbm_sweep,
                          write_table)
from .graph import LabelSet, check_A1, delta
from .solver import PValue, SolverConfig, classify, solve_dirichlet
from .tug import mc_exit_value, simulate_trajectory

log = logging.getLogger("tugssl")


def _u64(s):
    try:
        v = int(s, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a decimal integer: {s!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _pvalue(s):
    try:
        return PValue.parse(s)
    except (ArgumentError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _global_flags(parser, suppress):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--config", default=default(None), help="JSON config (ExperimentConfig fields)")
    parser.add_argument("--seed", type=_u64, default=default(None), help="master seed (decimal u64)")
    parser.add_argument("--out", default=default(None), help="output path (default: stdout)")
    parser.add_argument("--threads", type=_positive_int, default=default(None), help="worker threads")
    parser.add_argument("-v", "--verbose", action="count", default=default(0))


def _solver_flags(parser):
    parser.add_argument("--p", type=_pvalue, default=PValue(2.0), help="exponent p >= 2 or 'inf'")
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("--max-iter", type=int, default=None)
    parser.add_argument("--sweep", choices=["gauss_seidel", "jacobi"], default=None)
    parser.add_argument("--init", choices=["min_label", "max_label", "label_mean"], default=None)


def _problem_flags(parser, truth_required=False):
    parser.add_argument("--graph", required=True, help="edge-list CSV (src,dst,weight)")
    parser.add_argument("--labels", required=True, help="label CSV (index,value)")
    parser.add_argument("--truth", required=truth_required, help="ground-truth CSV (index,value)")
    parser.add_argument("--n", type=int, default=None, help="number of vertices (default: inferred)")


def build_parser():
    parser = argparse.ArgumentParser(prog="tugssl", description="p-Laplacian semi-supervised learning on graphs")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)

    b = sub.add_parser("build-graph", parents=[common], help="build a graph and write an edge list")
    b.add_argument("--type", choices=["epsilon", "knn", "sbm", "features"], default="knn")
    b.add_argument("--dist", choices=["uniform_box", "two_moons"], default="two_moons")
    b.add_argument("--num-points", type=int, default=500)
    b.add_argument("--dim", type=int, default=2)
    b.add_argument("--noise", type=float, default=0.1)
    b.add_argument("--eps", type=float, default=None)
    b.add_argument("--k", type=int, default=10)
    b.add_argument("--kernel", choices=["triangle", "uniform"], default="triangle")
    b.add_argument("--mode", choices=["symmetric", "mutual"], default="symmetric")
    b.add_argument("--metric", choices=["euclidean", "angular"], default="euclidean")
    b.add_argument("--features", help="feature CSV for --type features")
    b.add_argument("--N0", type=int, default=300)
    b.add_argument("--N1", type=int, default=300)
    b.add_argument("--r", type=float, default=0.5)
    b.add_argument("--q", type=float, default=0.1)
    b.add_argument("--points-out", help="write the point cloud here")
    b.add_argument("--truth-out", help="write ground-truth classes here")
    b.add_argument("--labels-out", help="write a sampled label set here")
    lab = b.add_mutually_exclusive_group()
    lab.add_argument("--beta", type=float, help="Bernoulli label rate for --labels-out")
    lab.add_argument("--labels-per-class", type=int, help="labels per class for --labels-out")

    s = sub.add_parser("solve", parents=[common], help="solve the Dirichlet problem")
    _problem_flags(s)
    _solver_flags(s)

    m = sub.add_parser("simulate", parents=[common], help="tug-of-war trajectories and MC exit values")
    _problem_flags(m)
    _solver_flags(m)
    m.add_argument("--solution", help="solution CSV for the players' strategies (default: solve)")
    m.add_argument("--start", type=int, required=True)
    m.add_argument("--trials", type=int, default=0, help="MC trials; 0 writes a single trajectory")
    m.add_argument("--max-steps", type=int, default=1_000_000)

    v = sub.add_parser("verify", parents=[common], help="run certificates and print a JSON report")
    _problem_flags(v, truth_required=True)
    _solver_flags(v)
    v.add_argument("--solution", help="solution CSV to certify (default: solve)")
    v.add_argument("--sbm", nargs=4, type=float, metavar=("N0", "N1", "R", "Q"),
                   help="also run the SBM threshold check and sufficient condition")
    v.add_argument("--beta", type=float, default=None, help="label rate for the SBM threshold")
    v.add_argument("--sigma1", type=float, default=0.0)
    v.add_argument("--sigma2", type=float, default=0.0)

    sub.add_parser("sbm-sweep", parents=[common], help="SBM error-rate sweep over r/q and p")
    sub.add_parser("geom-experiment", parents=[common], help="geometric error rate vs number of labels")
    return parser


def _solver_config(args, cfg_dict):
    opts = dict(cfg_dict.get("solver", {}))
    for key, attr in (("tolerance", "tol"), ("max_iterations", "max_iter"), ("sweep", "sweep"),
                      ("initialization", "init")):
        if getattr(args, attr, None) is not None:
            opts[key] = getattr(args, attr)
    return SolverConfig(**opts)


def _load_config(args):
    if not args.config:
        return {}
    try:
        with open(args.config) as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ArgumentError(f"{args.config}: {exc}") from None
    if not isinstance(d, dict):
        raise ArgumentError(f"{args.config}: config must be a JSON object")
    return d


def _load_problem(args):
    n = args.n
    truth = None
    if args.truth:
        idx, _ = files.read_values(args.truth)
        n = n if n is not None else int(idx.max()) + 1
        truth = files.read_truth(args.truth, n)
    g = files.read_edge_list(args.graph, n)
    if truth is not None and len(truth) != g.n:
        raise ArgumentError(f"truth has {len(truth)} rows but the graph has {g.n} vertices")
    idx, val = files.read_values(args.labels)
    labels = LabelSet(idx, val, truth)
    labels._check_size(g.n)
    return g, labels, truth


def _emit(text, out):
    with files._output(out) as fh:
        fh.write(text)


def _solve(g, labels, args, cfg_dict):
    res = solve_dirichlet(g, labels, args.p, _solver_config(args, cfg_dict))
    print(f"p={args.p} iterations={res.iterations} residual={res.residual:.3e} "
          f"converged={res.converged} seconds={res.seconds:.3f}", file=sys.stderr)
    return res


def cmd_build_graph(args, cfg_dict):
    seed = args.seed if args.seed is not None else cfg_dict.get("seed", 0)
    rng = np.random.default_rng(seed)
    point_seed, label_seed = (int(x) for x in rng.integers(0, 2 ** 63, size=2))
    pc, truth = None, None
    if args.type == "sbm":
        g, truth = build_sbm_graph(SbmSpec(args.N0, args.N1, args.r, args.q, point_seed))
    elif args.type == "features":
        if not args.features:
            raise ArgumentError("--type features needs --features")
        g, pc, truth = load_features_knn(args.features, args.k, args.metric, args.kernel)
    else:
        pc = sample_points(args.dist, args.num_points, args.dim, point_seed, noise=args.noise)
        kernel = Kernel(args.kernel, pc.d)
        if args.type == "epsilon":
            if args.eps is None:
                raise ArgumentError("--type epsilon needs --eps")
            g = build_epsilon_graph(pc, args.eps, kernel)
        else:
            g = build_knn_graph(pc, args.k, kernel, args.mode, args.metric)
        truth = (pc.labels.astype(np.float64) if pc.labels is not None
                 else (pc.points[:, 0] >= 0.5).astype(np.float64))
    files.write_edge_list(g, args.out)
    if args.points_out:
        if pc is None:
            raise ArgumentError("this graph type has no point cloud")
        files.write_points(args.points_out, pc.points)
    if args.truth_out:
        if truth is None:
            raise ArgumentError("no ground truth available for this graph")
        files.write_values(args.truth_out, truth)
    if args.labels_out:
        if truth is None:
            raise ArgumentError("sampling labels needs ground truth")
        if args.labels_per_class is not None:
            labels = sample_labels_per_class(truth, args.labels_per_class, label_seed)
        else:
            labels = sample_labels_bernoulli(truth, 0.2 if args.beta is None else args.beta, label_seed)
        files.write_labels(args.labels_out, labels)
    print(f"n={g.n} edges={g.num_edges} connected={g.connected}", file=sys.stderr)
    return 0


def cmd_solve(args, cfg_dict):
    g, labels, _ = _load_problem(args)
    res = _solve(g, labels, args, cfg_dict)
    files.write_solution(args.out, res.u, classify(res.u))
    return 0


def _solution(args, g, labels, cfg_dict):
    if args.solution:
        u = files.read_solution(args.solution)
        if len(u) != g.n:
            raise ArgumentError(f"solution has {len(u)} rows but the graph has {g.n} vertices")
        return u, None
    res = _solve(g, labels, args, cfg_dict)
    return res.u, res


def cmd_simulate(args, cfg_dict):
    g, labels, _ = _load_problem(args)
    u, _ = _solution(args, g, labels, cfg_dict)
    seed = args.seed if args.seed is not None else cfg_dict.get("seed", 0)
    if args.trials > 0:
        mc = mc_exit_value(g, labels, u, args.p, args.start, args.trials, args.max_steps, seed)
        report = {"start": args.start, "p": str(args.p), "trials": args.trials, "seed": seed,
                  "u": float(u[args.start]), "mc_mean": mc.mean, "std_error": mc.std_error,
                  "truncated": mc.truncated_count}
        _emit(json.dumps(report, indent=2) + "\n", args.out)
        return 0
    traj = simulate_trajectory(g, labels, u, args.p, args.start, args.max_steps, seed)
    files.write_trajectory(args.out, traj)
    print(f"tau={traj.tau} truncated={traj.truncated} exit={int(traj.states[-1])}", file=sys.stderr)
    return 0


def cmd_verify(args, cfg_dict):
    g, labels, truth = _load_problem(args)
    u, res = _solution(args, g, labels, cfg_dict)
    a1 = check_A1(g, labels)
    report = {
        "n": g.n,
        "p": str(args.p),
        "labeled": len(labels),
        "a1": a1,
        "delta": delta(g, labels),
        "certificates": [c(g, labels, u, args.p).to_dict()
                         for c in (th1_certificate, th3_certificate, th2_certificate)],
    }
    if res is not None:
        report["solver"] = {"iterations": res.iterations, "residual": res.residual, "converged": res.converged}
    if args.sbm:
        N0, N1, r, q = args.sbm
        if int(N0) + int(N1) != g.n:
            raise ArgumentError("SBM block sizes do not add up to the number of vertices")
        spec = SbmSpec(int(N0), int(N1), r, q)
        rates = sbm_rates(g, truth, labels)
        beta = args.beta if args.beta is not None else len(labels) / g.n
        report["sbm"] = {
            "gamma_max": rates.gamma_max,
            "beta_min": rates.beta_min,
            "suff_condition": suff_condition_check(rates),
            "threshold": sbm_threshold_check(spec, beta, args.sigma1, args.sigma2).to_dict(),
        }
        if report["sbm"]["suff_condition"]:
            report["sbm"]["all_correct"] = bool(np.all(classify(u) == truth.astype(np.int64)))
    _emit(json.dumps(report, indent=2, allow_nan=True) + "\n", args.out)
    return 0


def _experiment_config(args, cfg_dict, kind):
    d = dict(cfg_dict)
    if d.get("kind", kind) != kind:
        raise ArgumentError(f"config kind {d['kind']!r} does not match subcommand")
    d["kind"] = kind
    for key in ("seed", "out", "threads"):
        if getattr(args, key) is not None:
            d[key] = getattr(args, key)
    return ExperimentConfig.from_dict(d)


def cmd_sbm_sweep(args, cfg_dict):
    cfg = _experiment_config(args, cfg_dict, "sbm_sweep")
    write_table(SBM_HEADER, run_sbm_sweep(cfg), cfg.out)
    return 0


def cmd_geom_experiment(args, cfg_dict):
    cfg = _experiment_config(args, cfg_dict, "geom_experiment")
    write_table(geom_header(cfg), run_geom_experiment(cfg), cfg.out)
    return 0


COMMANDS = {
    "build-graph": cmd_build_graph,
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "sbm-sweep": cmd_sbm_sweep,
    "geom-experiment": cmd_geom_experiment,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose or 0, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args, _load_config(args))
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except StructuralError as exc:
        print(f"structural error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
