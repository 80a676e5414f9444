"""Achievable rate regions of the two-user Gaussian interference channel with inputs that have memory."""

__version__ = "0.1.0"

from .model import ChannelParams, RatePair, eta, validate_channel  # noqa: E402
from .frontier import Frontier, convex_hull, corner_query, dominates  # noqa: E402
from .quadrature import QuadratureConfig, closed_form_ar, phi  # noqa: E402
from .optimizer import GridSpec, SearchBudget, grid_search, random_refine_search  # noqa: E402

__all__ = [
    "ChannelParams",
    "RatePair",
    "eta",
    "validate_channel",
    "Frontier",
    "convex_hull",
    "corner_query",
    "dominates",
    "QuadratureConfig",
    "closed_form_ar",
    "phi",
    "GridSpec",
    "SearchBudget",
    "grid_search",
    "random_refine_search",
]
