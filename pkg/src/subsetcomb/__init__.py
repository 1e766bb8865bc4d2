"""Finitary decision procedures for size classes of subsets of countable groups."""

from .errors import ConfigError, ConstructionError, ModelError, ResourceError, SubsetCombError, UsageError
from .groups import ball, make_group, support
from .sets import Window, finiteness, intersect, members, translate, union

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConstructionError",
    "ModelError",
    "ResourceError",
    "SubsetCombError",
    "UsageError",
    "Window",
    "ball",
    "finiteness",
    "intersect",
    "make_group",
    "members",
    "support",
    "translate",
    "union",
]
