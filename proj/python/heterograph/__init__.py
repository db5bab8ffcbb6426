"""Heterophily-aware GNN toolkit: sparse graph ops, the H2GCN variant family,
synthetic benchmark generation and the closed-form robustness/spectral
analyses, backed by the C++ core."""

from ._core import (
    Graph,
    SparseOperator,
    build_graph,
    edge_homophily,
    compatibility_matrix,
    compatibility_from_h,
    exact_khop_adjacency,
    sym_normalize,
    spmm,
    unnormalized_laplacian,
    generate_graph,
    attach_synthetic_features,
    make_splits,
    load_bundle,
    write_bundle,
    train_model,
    variant_codes,
    perturbation_thresholds,
    verify_optimal_weight,
    two_hop_margin,
    smoothness,
    homophily_from_smoothness,
    spectral_energy,
    energy_dominance,
)

__all__ = [
    "Graph",
    "SparseOperator",
    "build_graph",
    "edge_homophily",
    "compatibility_matrix",
    "compatibility_from_h",
    "exact_khop_adjacency",
    "sym_normalize",
    "spmm",
    "unnormalized_laplacian",
    "generate_graph",
    "attach_synthetic_features",
    "make_splits",
    "load_bundle",
    "write_bundle",
    "train_model",
    "variant_codes",
    "perturbation_thresholds",
    "verify_optimal_weight",
    "two_hop_margin",
    "smoothness",
    "homophily_from_smoothness",
    "spectral_energy",
    "energy_dominance",
]
