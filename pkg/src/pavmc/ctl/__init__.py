"""CTL checking over kernel networks."""

from .checker import (
    DEFAULT_BUDGET,
    ORDERS,
    ResourceError,
    Stats,
    Verdict,
    check,
    check_af,
    check_ag,
    check_ef,
    check_eg,
    check_leads_to,
    compile_body,
    explore,
)
from .formula import (
    AF, AG, AX, EF, EG, EU, EX, FALSE, TRUE, And, Atom, Deadlock, Formula, Implies, LeadsTo,
    Not, Or, fragment, is_state_formula, pretty,
)
from .labeling import Graph, Labeler, check_labeling
from .trace import Trace, TraceError, replay

__all__ = [
    "AF", "AG", "AX", "And", "Atom", "DEFAULT_BUDGET", "Deadlock", "EF", "EG", "EU", "EX",
    "FALSE", "Formula", "Graph", "Implies", "Labeler", "LeadsTo", "Not", "ORDERS", "Or",
    "ResourceError", "Stats", "TRUE", "Trace", "TraceError", "Verdict", "check", "check_af",
    "check_ag", "check_ef", "check_eg", "check_labeling", "check_leads_to", "compile_body",
    "explore", "fragment", "is_state_formula", "pretty", "replay",
]
