"""p-Laplacian semi-supervised learning on graphs via tug-of-war games."""
from .builders import (Kernel, PointCloud, SbmSpec, build_epsilon_graph, build_knn_graph, build_sbm_graph,
                       load_features_knn, sample_labels_bernoulli, sample_labels_per_class, sample_points)
from .consistency import (Certificate, delta_beta_ratio, kappa, sbm_rates, sbm_threshold_check,
                          suff_condition_check, th1_certificate, th2_certificate, th3_certificate)
from .errors import ArgumentError, StructuralError
from .experiments import ExperimentConfig, run_geom_experiment, run_sbm_sweep
from .graph import Graph, LabelSet, boundary_band, check_A1, delta, graph_distance, grad_sup_norm
from .solver import (PValue, SolveResult, SolverConfig, apply_game_p_laplacian, apply_infty_laplacian,
                     apply_rw_laplacian, classify, laplace_learning, residual, solve_dirichlet)
from .tug import McExit, Trajectory, mc_exit_value, one_step_expectation, simulate_trajectory

__version__ = "0.1.0"

__all__ = [
    "ArgumentError", "Certificate", "ExperimentConfig", "Graph", "Kernel", "LabelSet", "McExit", "PValue",
    "PointCloud", "SbmSpec", "SolveResult", "SolverConfig", "StructuralError", "Trajectory",
    "apply_game_p_laplacian", "apply_infty_laplacian", "apply_rw_laplacian", "boundary_band",
    "build_epsilon_graph", "build_knn_graph", "build_sbm_graph", "check_A1", "classify", "delta",
    "delta_beta_ratio", "grad_sup_norm", "graph_distance", "kappa", "laplace_learning", "load_features_knn",
    "mc_exit_value", "one_step_expectation", "residual", "run_geom_experiment", "run_sbm_sweep",
    "sample_labels_bernoulli", "sample_labels_per_class", "sample_points", "sbm_rates", "sbm_threshold_check",
    "simulate_trajectory", "solve_dirichlet", "suff_condition_check", "th1_certificate", "th2_certificate",
    "th3_certificate",
]
