"""Automata kernel: declarations, expression language and network semantics."""

from .expr import Discard, EvalError, ExprSyntaxError, parse_expr, parse_update, pretty
from .network import (
    Channel,
    CheckerError,
    Edge,
    Location,
    ModelError,
    Network,
    NetworkState,
    ProcessTemplate,
    QueryError,
    TransitionLabel,
    VariableDecl,
    canonical_key,
    eval_atom,
    initial_state,
    successors,
)

__all__ = [
    "Channel", "CheckerError", "Discard", "Edge", "EvalError", "ExprSyntaxError",
    "Location", "ModelError", "Network", "NetworkState", "ProcessTemplate",
    "QueryError", "TransitionLabel", "VariableDecl", "canonical_key", "eval_atom",
    "initial_state", "parse_expr", "parse_update", "pretty", "successors",
]
