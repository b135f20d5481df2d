"""Learning FOC1 counting-term classifiers over bounded-degree relational databases."""

from .relstore import Signature, Structure, AccessAudit, LocalOracle, ingest, persist
from .syntax import Expr
from .parser import parse, parse_formula, parse_term, to_text
from .numpred import builtin_registry

__version__ = "0.1.0"

__all__ = [
    "Signature",
    "Structure",
    "AccessAudit",
    "LocalOracle",
    "ingest",
    "persist",
    "Expr",
    "parse",
    "parse_formula",
    "parse_term",
    "to_text",
    "builtin_registry",
]
