"""C-like integer expression language used by guards, updates and atoms.

Expressions are parsed into small frozen dataclasses and compiled to Python
source, so that evaluation during exploration is a plain function call.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Sequence


class ExprSyntaxError(ValueError):
    def __init__(self, msg: str, text: str = "", pos: int = 0):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{msg} at line {line}, column {col}")
        self.line = line
        self.column = col


class EvalError(RuntimeError):
    """Raised when an expression cannot be evaluated (bad index, div by 0)."""


class Discard(Exception):
    """A write left its variable's declared range; the transition is dropped."""


# ---------------------------------------------------------------- tokens

_WS = r"(?P<ws>\s+)|(?P<num>\d+)|"
_ID_OP = (
    r"(?P<id>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\+\+|--|\+=|-=|\*=|==|!=|<=|>=|&&|\|\||[-+*/%<>!=()\[\],.;?:])"
)
_EXPR_RE = re.compile(_WS + _ID_OP)
_QUERY_RE = re.compile(_WS + r"(?P<qop>E<>|A\[\]|A<>|E\[\]|-->)|" + _ID_OP)


@dataclass(frozen=True)
class Token:
    kind: str  # num | id | op | qop | end
    text: str
    pos: int


def tokenize(text: str, query: bool = False) -> list[Token]:
    """Split ``text``; ``query=True`` also recognises E<> A[] A<> E[] -->."""
    regex = _QUERY_RE if query else _EXPR_RE
    out: list[Token] = []
    pos = 0
    while pos < len(text):
        m = regex.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        if m.lastgroup != "ws":
            out.append(Token(m.lastgroup, m.group(0), pos))
        pos = m.end()
    out.append(Token("end", "", len(text)))
    return out


# ---------------------------------------------------------------- AST


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Num(Expr):
    value: int


@dataclass(frozen=True)
class Name(Expr):
    ident: str


@dataclass(frozen=True)
class Index(Expr):
    base: Expr
    index: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Member(Expr):
    """``Name(i).member`` or ``Name.member``: a location or a local variable."""

    template: str
    index: Expr | None
    member: str


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    operand: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Ternary(Expr):
    cond: Expr
    then: Expr
    other: Expr


@dataclass(frozen=True)
class Assign:
    target: Expr
    op: str  # = += -= *= ++ --
    value: Expr | None


@dataclass(frozen=True)
class CallStmt:
    call: Call


Stmt = Assign | CallStmt

_BINARY_PREC = {
    "||": 1,
    "&&": 2,
    "==": 3, "!=": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6, "%": 6,
}
LOGICAL_OPS = frozenset({"||", "&&"})
COMPARE_OPS = frozenset({"==", "!=", "<", "<=", ">", ">="})


# ---------------------------------------------------------------- parser


class Parser:
    """Recursive-descent/precedence-climbing parser over a token list.

    ``logical=False`` restricts the grammar to comparison level and below
    (no ``&&``, ``||``, ``!``, ``?:``); the query parser uses this so the
    boolean structure of formulas stays at the formula level.
    """

    def __init__(self, text: str, tokens: list[Token] | None = None, pos: int = 0):
        self.text = text
        self.tokens = tokens if tokens is not None else tokenize(text)
        self.pos = pos

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, msg: str) -> ExprSyntaxError:
        return ExprSyntaxError(msg, self.text, self.tok.pos)

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind in ("op", "qop"):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")

    def expression(self, logical: bool = True) -> Expr:
        if not logical:
            return self._binary(3, logical)
        cond = self._binary(1, logical)
        if self.accept("?"):
            then = self.expression()
            self.expect(":")
            other = self.expression()
            return Ternary(cond, then, other)
        return cond

    def _binary(self, min_prec: int, logical: bool) -> Expr:
        left = self._unary(logical)
        while True:
            t = self.tok
            prec = _BINARY_PREC.get(t.text) if t.kind == "op" else None
            if prec is None or prec < min_prec:
                return left
            if not logical and t.text in LOGICAL_OPS:
                return left
            self.pos += 1
            right = self._binary(prec + 1, logical)
            left = Binary(t.text, left, right)

    def _unary(self, logical: bool) -> Expr:
        if self.tok.kind == "op" and self.tok.text in ("-", "+") or (
            logical and self.tok.text == "!" and self.tok.kind == "op"
        ):
            op = self.tok.text
            self.pos += 1
            operand = self._unary(logical)
            if op == "-" and isinstance(operand, Num):
                return Num(-operand.value)
            return operand if op == "+" else Unary(op, operand)
        return self._postfix(logical)

    def _postfix(self, logical: bool) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.pos += 1
            return Num(int(t.text))
        if t.kind == "op" and t.text == "(":
            self.pos += 1
            inner = self.expression(logical)
            self.expect(")")
            node = inner
        elif t.kind == "id":
            self.pos += 1
            node = Name(t.text)
            if self.accept("("):
                args: list[Expr] = []
                if not self.accept(")"):
                    args.append(self.expression())
                    while self.accept(","):
                        args.append(self.expression())
                    self.expect(")")
                if self.tok.text == "." and self.tok.kind == "op":
                    self.pos += 1
                    member = self._ident()
                    if len(args) != 1:
                        raise self.error("instance reference takes one index")
                    node = Member(t.text, args[0], member)
                else:
                    node = Call(t.text, tuple(args))
            elif self.tok.text == "." and self.tok.kind == "op":
                self.pos += 1
                node = Member(t.text, None, self._ident())
        else:
            found = t.text or "end of input"
            raise self.error(f"unexpected {found!r}")
        while self.accept("["):
            idx = self.expression()
            self.expect("]")
            node = Index(node, idx)
        return node

    def _ident(self) -> str:
        if self.tok.kind != "id":
            raise self.error("expected identifier")
        self.pos += 1
        return self.tokens[self.pos - 1].text

    def statement(self) -> Stmt:
        target = self._postfix(True)
        if isinstance(target, Call):
            return CallStmt(target)
        if not isinstance(target, (Name, Index)):
            raise self.error("invalid assignment target")
        for op in ("++", "--"):
            if self.accept(op):
                return Assign(target, op, None)
        for op in ("=", "+=", "-=", "*="):
            if self.accept(op):
                return Assign(target, op, self.expression())
        raise self.error("expected assignment operator")

    def end(self) -> None:
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")


def parse_expr(text: str) -> Expr:
    p = Parser(text)
    e = p.expression()
    p.end()
    return e


def parse_update(text: str) -> tuple[Stmt, ...]:
    """Parse ``a = 1, b++, proc(x)`` (``,`` or ``;`` separated)."""
    if not text.strip():
        return ()
    p = Parser(text)
    stmts = [p.statement()]
    while p.accept(",") or p.accept(";"):
        if p.tok.kind == "end":
            break
        stmts.append(p.statement())
    p.end()
    return tuple(stmts)


# ---------------------------------------------------------------- printing


def pretty(e: Expr) -> str:
    if isinstance(e, Num):
        return str(e.value)
    if isinstance(e, Name):
        return e.ident
    if isinstance(e, Index):
        return f"{pretty(e.base)}[{pretty(e.index)}]"
    if isinstance(e, Call):
        return f"{e.fn}({', '.join(pretty(a) for a in e.args)})"
    if isinstance(e, Member):
        if e.index is None:
            return f"{e.template}.{e.member}"
        return f"{e.template}({pretty(e.index)}).{e.member}"
    if isinstance(e, Unary):
        return f"{e.op}{_wrap(e.operand)}"
    if isinstance(e, Binary):
        return f"{_wrap(e.left)} {e.op} {_wrap(e.right)}"
    if isinstance(e, Ternary):
        return f"({pretty(e.cond)} ? {pretty(e.then)} : {pretty(e.other)})"
    raise TypeError(e)


def _wrap(e: Expr) -> str:
    s = pretty(e)
    if isinstance(e, (Binary, Ternary)) or (isinstance(e, Num) and e.value < 0):
        return f"({s})"
    return s


def pretty_stmt(s: Stmt) -> str:
    if isinstance(s, CallStmt):
        return pretty(s.call)
    if s.op in ("++", "--"):
        return f"{pretty(s.target)}{s.op}"
    return f"{pretty(s.target)} {s.op} {pretty(s.value)}"


# ---------------------------------------------------------------- compiling


def c_div(a: int, b: int) -> int:
    if b == 0:
        raise EvalError("division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def c_mod(a: int, b: int) -> int:
    return a - b * c_div(a, b)


def check_index(i: int, size: int) -> int:
    if 0 <= i < size:
        return i
    raise EvalError(f"index {i} out of range [0, {size})")


@dataclass(frozen=True)
class VarRef:
    """Where a variable lives in the flat valuation vector."""

    offset: int
    shape: tuple[int, ...]
    lower: int
    upper: int


class Scope:
    """Name resolution for compiling one instance's expressions.

    ``consts`` maps names to ints or nested tuples of ints; ``variables`` maps
    names to VarRef; ``functions`` maps procedure names to Python callables
    ``fn(v, *args)``; ``member`` resolves ``Name(i).x`` references (atoms only).
    """

    def __init__(
        self,
        consts: dict,
        variables: dict[str, VarRef],
        functions: dict[str, Callable] | None = None,
        member: Callable[[str, int | None, str], tuple[str, object]] | None = None,
    ):
        self.consts = consts
        self.variables = variables
        self.functions = functions or {}
        self.member = member


class Compiler:
    """Turns expressions into Python source over ``v`` (valuation) and ``L``
    (location vector, atoms only). Selection names become function params."""

    def __init__(self, scope: Scope, selections: Sequence[str] = ()):
        self.scope = scope
        self.selections = {s: f"s_{s}" for s in selections}
        self.namespace: dict[str, object] = {
            "_div": c_div,
            "_mod": c_mod,
            "_ix": check_index,
            "Discard": Discard,
            "EvalError": EvalError,
        }
        self._n = 0

    def _bind(self, obj: object, hint: str) -> str:
        self._n += 1
        name = f"_{hint}{self._n}"
        self.namespace[name] = obj
        return name

    # ---- values

    def const_value(self, e: Expr):
        """Fold ``e`` to a constant if it only involves constants."""
        if isinstance(e, Num):
            return e.value
        if isinstance(e, Name) and e.ident not in self.selections and e.ident in self.scope.consts:
            return self.scope.consts[e.ident]
        if isinstance(e, Index):
            base = self.const_value(e.base)
            idx = self.const_value(e.index)
            if isinstance(base, tuple) and isinstance(idx, int):
                return base[check_index(idx, len(base))]
        if isinstance(e, Binary) and e.op in "+-*":
            a, b = self.const_value(e.left), self.const_value(e.right)
            if isinstance(a, int) and isinstance(b, int):
                return {"+": a + b, "-": a - b, "*": a * b}[e.op]
        if isinstance(e, Unary) and e.op == "-":
            a = self.const_value(e.operand)
            if isinstance(a, int):
                return -a
        return None

    def expr(self, e: Expr) -> str:
        c = self.const_value(e)
        if isinstance(c, int):
            return str(c) if c >= 0 else f"({c})"
        if isinstance(e, Name):
            if e.ident in self.selections:
                return self.selections[e.ident]
            ref = self.scope.variables.get(e.ident)
            if ref is None:
                raise NameError(f"unresolved name {e.ident!r}")
            if ref.shape:
                raise NameError(f"array {e.ident!r} used without index")
            return f"v[{ref.offset}]"
        if isinstance(e, Index):
            return self._index(e)[0]
        if isinstance(e, Call):
            fn = self.scope.functions.get(e.fn)
            if fn is None:
                raise NameError(f"unknown function {e.fn!r}")
            name = self._bind(fn, "fn")
            args = "".join(", " + self.expr(a) for a in e.args)
            return f"{name}(v{args})"
        if isinstance(e, Member):
            if self.scope.member is None:
                raise NameError(f"instance reference {pretty(e)} not allowed here")
            idx = None
            if e.index is not None:
                idx = self.const_value(e.index)
                if not isinstance(idx, int):
                    raise NameError(f"instance index of {pretty(e)} must be constant")
            kind, payload = self.scope.member(e.template, idx, e.member)
            if kind == "location":
                inst, loc = payload
                return f"(1 if L[{inst}] == {loc} else 0)"
            return f"v[{payload.offset}]"
        if isinstance(e, Unary):
            inner = self.expr(e.operand)
            if e.op == "!":
                return f"(0 if {inner} else 1)"
            return f"(-{inner})"
        if isinstance(e, Binary):
            a, b = self.expr(e.left), self.expr(e.right)
            if e.op == "&&":
                return f"(1 if ({a} and {b}) else 0)"
            if e.op == "||":
                return f"(1 if ({a} or {b}) else 0)"
            if e.op in COMPARE_OPS:
                return f"(1 if {a} {e.op} {b} else 0)"
            if e.op == "/":
                return f"_div({a}, {b})"
            if e.op == "%":
                return f"_mod({a}, {b})"
            return f"({a} {e.op} {b})"
        if isinstance(e, Ternary):
            return f"({self.expr(e.then)} if {self.expr(e.cond)} else {self.expr(e.other)})"
        raise TypeError(e)

    def _index(self, e: Index) -> tuple[str, VarRef | None]:
        """Returns (source, ref); for variable arrays the source reads ``v``."""
        chain: list[Expr] = []
        base: Expr = e
        while isinstance(base, Index):
            chain.append(base.index)
            base = base.base
        chain.reverse()
        if isinstance(base, Name) and base.ident in self.scope.variables:
            ref = self.scope.variables[base.ident]
            if len(chain) != len(ref.shape):
                raise NameError(f"{base.ident!r} expects {len(ref.shape)} indices")
            return f"v[{self._flat(ref, chain)}]", ref
        if isinstance(base, Name) and base.ident in self.scope.consts:
            src = self._bind(self.scope.consts[base.ident], "c")
            for idx in chain:
                src = f"{src}[_ix({self.expr(idx)}, len({src}))]"
            return src, None
        raise NameError(f"cannot index {pretty(base)}")

    def _flat(self, ref: VarRef, idxs: list[Expr]) -> str:
        strides = []
        acc = 1
        for d in reversed(ref.shape):
            strides.append(acc)
            acc *= d
        strides.reverse()
        parts = [str(ref.offset)]
        const = 0
        for idx, dim, stride in zip(idxs, ref.shape, strides):
            c = self.const_value(idx)
            if isinstance(c, int):
                const += check_index(c, dim) * stride
            else:
                term = f"_ix({self.expr(idx)}, {dim})"
                parts.append(term if stride == 1 else f"{term} * {stride}")
        if const:
            parts[0] = str(ref.offset + const)
        return " + ".join(parts)

    def target(self, e: Expr) -> tuple[str, VarRef]:
        if isinstance(e, Name):
            ref = self.scope.variables.get(e.ident)
            if ref is None:
                raise NameError(f"cannot assign to {e.ident!r}")
            if ref.shape:
                raise NameError(f"array {e.ident!r} assigned without index")
            return str(ref.offset), ref
        if isinstance(e, Index):
            src, ref = self._index(e)
            if ref is None:
                raise NameError(f"cannot assign to constant {pretty(e)}")
            return src[2:-1], ref
        raise NameError(f"invalid assignment target {pretty(e)}")

    # ---- functions

    def guard_fn(self, e: Expr | None) -> Callable:
        params = "".join(", " + p for p in self.selections.values())
        body = "1" if e is None else self.expr(e)
        return self._make(f"def _g(v{params}):\n    return {body}\n", "_g")

    def atom_fn(self, e: Expr) -> Callable:
        return self._make(f"def _a(L, v):\n    return {self.expr(e)}\n", "_a")

    def value_fn(self, e: Expr) -> Callable:
        params = "".join(", " + p for p in self.selections.values())
        return self._make(f"def _e(v{params}):\n    return {self.expr(e)}\n", "_e")

    def update_fn(self, stmts: Sequence[Stmt]) -> Callable | None:
        if not stmts:
            return None
        params = "".join(", " + p for p in self.selections.values())
        lines = [f"def _u(v{params}):"]
        for s in stmts:
            if isinstance(s, CallStmt):
                lines.append(f"    {self.expr(s.call)}")
                continue
            slot, ref = self.target(s.target)
            lines.append(f"    _k = {slot}")
            if s.op == "++":
                val = "v[_k] + 1"
            elif s.op == "--":
                val = "v[_k] - 1"
            elif s.op == "=":
                val = self.expr(s.value)
            else:
                val = f"v[_k] {s.op[0]} {self.expr(s.value)}"
            lines.append(f"    _t = {val}")
            lines.append(f"    if _t < {ref.lower} or _t > {ref.upper}: raise Discard")
            lines.append("    v[_k] = _t")
        return self._make("\n".join(lines) + "\n", "_u")

    def _make(self, src: str, name: str) -> Callable:
        ns = dict(self.namespace)
        exec(compile(src, f"<pavmc:{name}>", "exec"), ns)
        fn = ns[name]
        fn.source = src
        return fn
