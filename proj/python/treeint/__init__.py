"""Exact Shapley interactions for tree ensembles."""

from ._core import (
    Ensemble,
    Error,
    Explainer,
    InputError,
    InteractionResult,
    LimitError,
    SingularPointError,
    brute_force,
    load_model,
    parse_model,
    random_model,
)

__all__ = [
    "Ensemble",
    "Error",
    "Explainer",
    "InputError",
    "InteractionResult",
    "LimitError",
    "SingularPointError",
    "brute_force",
    "load_model",
    "parse_model",
    "random_model",
]
