"""Exact arithmetic for finite inverse semigroups, their partial actions,
groupoids of germs, Steinberg algebras, crossed products, Leavitt path
algebras, and continuous orbit equivalence."""

from . import algebra, catalog, germs, graph, invsemi, orbit, paction, rings

__all__ = [
    "algebra",
    "catalog",
    "germs",
    "graph",
    "invsemi",
    "orbit",
    "paction",
    "rings",
]

__version__ = "0.1.0"
