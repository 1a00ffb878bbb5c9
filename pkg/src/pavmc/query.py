"""Query language: UPPAAL-style top-level forms plus nested CTL.

    query   := leads
    leads   := imply ('-->' imply)?
    imply   := or ('imply' imply)?
    or      := and (('or' | '||') and)*
    and     := unary (('and' | '&&') unary)*
    unary   := ('not' | '!') unary
             | ('E<>' | 'A[]' | 'A<>' | 'E[]' | 'EX' | 'AX') imply
             | 'E' '(' leads 'U' leads ')'
             | primary
    primary := 'deadlock' | 'true' | 'false' | atom | '(' leads ')'

Atoms are kernel expressions at comparison level: ``Voter(0).punished``,
``mixes == 2``, ``vote_sum[1] > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ctl.formula import (
    AF, AG, AX, EF, EG, EU, EX, FALSE, TRUE, And, Atom, Deadlock, Formula, Implies, LeadsTo,
    Not, Or, fragment, pretty,
)
from .kernel.expr import ExprSyntaxError, Parser, tokenize

_PREFIX = {"E<>": EF, "A[]": AG, "A<>": AF, "E[]": EG}
_KEYWORDS = {"not", "and", "or", "imply", "deadlock", "true", "false", "EX", "AX"}


@dataclass(frozen=True)
class Query:
    text: str
    formula: Formula
    fragment: str

    def pretty(self) -> str:
        return pretty(self.formula)


class _QueryParser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text, query=True)
        self.pos = 0

    @property
    def tok(self):
        return self.tokens[self.pos]

    def error(self, msg: str) -> ExprSyntaxError:
        return ExprSyntaxError(msg, self.text, self.tok.pos)

    def _is(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("id", "op", "qop") and t.text in texts

    def _take(self, *texts: str) -> bool:
        if self._is(*texts):
            self.pos += 1
            return True
        return False

    def _expect(self, text: str) -> None:
        if not self._take(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")

    def parse(self) -> Formula:
        f = self.leads()
        if self.tok.kind != "end":
            if self._is(")"):
                raise self.error("unbalanced parentheses")
            raise self.error(f"unexpected {self.tok.text!r}")
        return f

    def leads(self) -> Formula:
        left = self.imply()
        if self._take("-->"):
            return LeadsTo(left, self.imply())
        return left

    def imply(self) -> Formula:
        left = self.disj()
        if self._take("imply"):
            return Implies(left, self.imply())
        return left

    def disj(self) -> Formula:
        left = self.conj()
        while self._take("or", "||"):
            left = Or(left, self.conj())
        return left

    def conj(self) -> Formula:
        left = self.unary()
        while self._take("and", "&&"):
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        if self._take("not", "!"):
            return Not(self.unary())
        t = self.tok
        if t.kind == "qop" and t.text in _PREFIX:
            self.pos += 1
            return _PREFIX[t.text](self.imply())
        if t.kind == "qop":
            raise self.error(f"operator {t.text!r} needs a left operand")
        if t.kind == "id" and t.text in ("EX", "AX"):
            self.pos += 1
            return (EX if t.text == "EX" else AX)(self.imply())
        if t.kind == "id" and t.text == "E" and self.tokens[self.pos + 1].text == "(":
            save = self.pos
            self.pos += 2
            left = self.leads()
            if self._take("U"):
                right = self.leads()
                self._expect(")")
                return EU(left, right)
            self.pos = save
        return self.primary()

    def primary(self) -> Formula:
        t = self.tok
        if t.kind == "id" and t.text == "deadlock":
            self.pos += 1
            return Deadlock()
        if t.kind == "id" and t.text in ("true", "false"):
            self.pos += 1
            return TRUE if t.text == "true" else FALSE
        if t.kind == "id" and t.text in _KEYWORDS:
            raise self.error(f"unexpected keyword {t.text!r}")
        save = self.pos
        try:
            return self.atom()
        except ExprSyntaxError:
            if not self._is("("):
                raise
            self.pos = save
        self._expect("(")
        inner = self.leads()
        if not self._take(")"):
            raise self.error("unbalanced parentheses")
        return inner

    def atom(self) -> Atom:
        p = Parser(self.text, self.tokens, self.pos)
        expr = p.expression(logical=False)
        self.pos = p.pos
        nxt = self.tok
        if nxt.kind in ("num", "id") and nxt.text not in _KEYWORDS and nxt.text != "U":
            raise self.error(f"unexpected {nxt.text!r}")
        return Atom(expr)


def parse_formula(text: str) -> Formula:
    return _QueryParser(text).parse()


def parse_query(text: str) -> Query:
    f = parse_formula(text)
    return Query(text, f, fragment(f))
