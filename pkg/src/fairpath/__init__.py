"""Causal discovery and path-specific counterfactual fairness toolkit."""

__version__ = "0.1.0"

from ._kernels import BACKEND_NAME as kernel_backend  # noqa: F401
