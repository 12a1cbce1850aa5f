"""Hamiltonian paths as global minimizers of a penalty on network conductances."""

__version__ = "0.1.0"

from .errors import OhmPathError
from .graph import (
    AugmentedGraph,
    Case,
    Graph,
    HamiltonianPath,
    augment,
    brute_force_hp,
    decode_target,
    dump_graph,
    encode_hp,
    is_target_config,
    load_graph,
    parse_graph,
)
from .network import NetworkSolution, Tolerances, current_out, effective, solve_network
from .optimizer import (
    Classification,
    InitScheme,
    OptimizerConfig,
    enumerate_binary,
    optimize,
    project_box,
    project_hyperplane_box,
    verify_vertices,
)
from .penalty import PenaltyReport, PenaltyWeights, gradient, objective, objective_value

__all__ = [
    "AugmentedGraph", "Case", "Classification", "Graph", "HamiltonianPath", "InitScheme",
    "NetworkSolution", "OhmPathError", "OptimizerConfig", "PenaltyReport", "PenaltyWeights",
    "Tolerances", "augment", "brute_force_hp", "current_out", "decode_target", "dump_graph",
    "effective", "encode_hp", "enumerate_binary", "gradient", "is_target_config", "load_graph",
    "objective", "objective_value", "optimize", "parse_graph", "project_box",
    "project_hyperplane_box", "solve_network", "verify_vertices",
]
