"""CTL formula AST.

Quantifier-free bodies are built from Atom, Deadlock, Not, And, Or and
Implies. The checker has dedicated on-the-fly routines for the top-level
forms EF/AG/AF/EG over a body and LeadsTo over two bodies; everything else
goes through graph labeling.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..kernel.expr import Expr, Num, parse_expr, pretty as pretty_expr


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Atom(Formula):
    expr: Expr

    @classmethod
    def of(cls, text: str) -> "Atom":
        return cls(parse_expr(text))


@dataclass(frozen=True)
class Deadlock(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class EF(Formula):
    operand: Formula


@dataclass(frozen=True)
class AG(Formula):
    operand: Formula


@dataclass(frozen=True)
class AF(Formula):
    operand: Formula


@dataclass(frozen=True)
class EG(Formula):
    operand: Formula


@dataclass(frozen=True)
class EX(Formula):
    operand: Formula


@dataclass(frozen=True)
class AX(Formula):
    operand: Formula


@dataclass(frozen=True)
class EU(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class LeadsTo(Formula):
    left: Formula
    right: Formula


TRUE = Atom(Num(1))
FALSE = Atom(Num(0))

_UNARY_TEMPORAL = (EF, AG, AF, EG, EX, AX)
_GLYPH = {EF: "E<>", AG: "A[]", AF: "A<>", EG: "E[]", EX: "EX", AX: "AX"}


def is_state_formula(f: Formula) -> bool:
    """True for quantifier-free bodies."""
    if isinstance(f, (Atom, Deadlock)):
        return True
    if isinstance(f, Not):
        return is_state_formula(f.operand)
    if isinstance(f, (And, Or, Implies)):
        return is_state_formula(f.left) and is_state_formula(f.right)
    return False


def fragment(f: Formula) -> str:
    """``uppaal-fragment`` or ``nested-ctl``."""
    if isinstance(f, (EF, AG, AF, EG)) and is_state_formula(f.operand):
        return "uppaal-fragment"
    if isinstance(f, LeadsTo) and is_state_formula(f.left) and is_state_formula(f.right):
        return "uppaal-fragment"
    return "nested-ctl"


def pretty(f: Formula) -> str:
    if isinstance(f, Atom):
        return pretty_expr(f.expr)
    if isinstance(f, Deadlock):
        return "deadlock"
    if isinstance(f, Not):
        return f"not {_wrap(f.operand)}"
    if isinstance(f, And):
        return f"{_wrap(f.left)} and {_wrap(f.right)}"
    if isinstance(f, Or):
        return f"{_wrap(f.left)} or {_wrap(f.right)}"
    if isinstance(f, Implies):
        return f"{_wrap(f.left)} imply {_wrap(f.right)}"
    if isinstance(f, _UNARY_TEMPORAL):
        return f"{_GLYPH[type(f)]} {_wrap(f.operand)}"
    if isinstance(f, EU):
        return f"E({pretty(f.left)} U {pretty(f.right)})"
    if isinstance(f, LeadsTo):
        return f"{_wrap(f.left)} --> {_wrap(f.right)}"
    raise TypeError(f)


def _wrap(f: Formula) -> str:
    if isinstance(f, (Atom, Deadlock)):
        return f"({pretty(f)})" if isinstance(f, Atom) and not _simple_atom(f) else pretty(f)
    return f"({pretty(f)})"


def _simple_atom(f: Atom) -> bool:
    text = pretty_expr(f.expr)
    return all(ch.isalnum() or ch in "_.()[]" for ch in text)


def subformulas(f: Formula):
    yield f
    for name in ("operand", "left", "right"):
        child = getattr(f, name, None)
        if isinstance(child, Formula):
            yield from subformulas(child)
