"""Exact toolkit for probabilistic temporal epistemic logic."""

from ptel.grammar import parse, unparse
from ptel.syntax import (
    AgentSignature, NestedContext, OrdinalRank, build_k_nested, expand,
    match_k_nested, rank, subformulas,
)

__all__ = [
    "AgentSignature", "NestedContext", "OrdinalRank", "build_k_nested",
    "expand", "match_k_nested", "parse", "rank", "subformulas", "unparse",
]
__version__ = "0.1.0"
