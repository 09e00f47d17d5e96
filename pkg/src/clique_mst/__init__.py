"""Round-accurate congested clique simulator with a constant-round deterministic MST."""
from .clique_sim import (
    AccountingError,
    CapacityError,
    Clique,
    CommunicationLedger,
    Constants,
    NonTermination,
    ProtocolViolation,
    SimulationError,
    prefix_assign,
)
from .components import ComponentAssignment, reduce_components
from .graph import Edge, Graph, GraphError, GraphParseError, WeightKey, format_graph, generate_graph, parse_graph
from .mst import MstResult, mst
from .oracle import boruvka_rounds, connected_components_bfs, kruskal
from .spanning_forest import ForestResult, InvariantViolation, spanning_forest
from .sparsify import DeltaPartition, sparsify_step, sparsify_to_sqrt_mn

__all__ = [
    "AccountingError",
    "CapacityError",
    "Clique",
    "CommunicationLedger",
    "ComponentAssignment",
    "Constants",
    "DeltaPartition",
    "Edge",
    "ForestResult",
    "Graph",
    "GraphError",
    "GraphParseError",
    "InvariantViolation",
    "MstResult",
    "NonTermination",
    "ProtocolViolation",
    "SimulationError",
    "WeightKey",
    "boruvka_rounds",
    "connected_components_bfs",
    "format_graph",
    "generate_graph",
    "kruskal",
    "mst",
    "parse_graph",
    "prefix_assign",
    "reduce_components",
    "spanning_forest",
    "sparsify_step",
    "sparsify_to_sqrt_mn",
]
