"""Entropy-based filtering of retweet debates and disinformation statistics."""

from ._core import (
    BicmModel,
    BipartiteGraph,
    ConvergenceError,
    InputError,
    StageError,
    __version__,
    assign_state,
    build_bipartite,
    chi_square,
    decile_bot_classification,
    fit_bicm,
    ks_test,
    label_propagation,
    louvain,
    mann_whitney_u,
    poisson_binomial_upper_tail,
    registrable_domain,
    run_stage,
    validate_projection,
)

__all__ = [
    "BicmModel",
    "BipartiteGraph",
    "ConvergenceError",
    "InputError",
    "StageError",
    "__version__",
    "assign_state",
    "build_bipartite",
    "chi_square",
    "decile_bot_classification",
    "fit_bicm",
    "ks_test",
    "label_propagation",
    "louvain",
    "mann_whitney_u",
    "poisson_binomial_upper_tail",
    "registrable_domain",
    "run_stage",
    "validate_projection",
]
