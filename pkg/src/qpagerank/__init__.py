"""Matrix-free quantum PageRank via quantum stochastic walks."""

__version__ = "0.1.0"

from .dynamics import (LindbladRHS, dense_superoperator, devectorize, kron_element,
                       lindblad_rhs, vectorize)
from .integrator import EvolutionResult, RKF45Config, adapt_step, evolve, rkf45_step
from .netio import Network, adjacency, load_edge_list, load_edge_list_file, out_degrees
from .operators import (WalkParameters, build_operators, google_weights, hamiltonian,
                        hopping_matrix, lindblad_channels, normalized_transition)
from .rank import classical_pagerank, classify_hubs, quantum_pagerank, rank_nodes

__all__ = [
    "EvolutionResult", "LindbladRHS", "Network", "RKF45Config", "WalkParameters",
    "adapt_step", "adjacency", "build_operators", "classical_pagerank", "classify_hubs",
    "dense_superoperator", "devectorize", "evolve", "google_weights", "hamiltonian",
    "hopping_matrix", "kron_element", "lindblad_channels", "lindblad_rhs", "load_edge_list",
    "load_edge_list_file", "normalized_transition", "out_degrees", "quantum_pagerank", "rank_nodes",
    "rkf45_step", "vectorize",
]
