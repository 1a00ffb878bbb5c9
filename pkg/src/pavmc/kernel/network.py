"""Networks of processes with UPPAAL-style discrete semantics.

A network is a list of instances of process templates sharing global bounded
integer variables and channels. States are explored explicitly; committed
locations, binary and broadcast synchronisation, selections and
out-of-range discarding follow the usual UPPAAL rules (without clocks).
"""

from __future__ import annotations

import itertools
import operator
import struct
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Sequence

from .expr import (
    CallStmt,
    Compiler,
    Discard,
    EvalError,
    Expr,
    Name,
    Parser,
    Scope,
    VarRef,
    parse_expr,
    parse_update,
    pretty,
)


class ModelError(ValueError):
    """Malformed network: duplicate names, bad bounds, unresolved references."""


class CheckerError(RuntimeError):
    """Expression evaluation failed while firing an edge."""

    def __init__(self, msg: str, edge: str = ""):
        super().__init__(f"{msg} (edge {edge})" if edge else msg)
        self.edge = edge


class QueryError(ValueError):
    """An atom references an unknown instance, location or variable."""


# ---------------------------------------------------------------- declarations


@dataclass(frozen=True)
class VariableDecl:
    name: str
    lower: int
    upper: int
    initial: int | tuple[int, ...] = 0
    shape: tuple[int, ...] = ()

    @property
    def size(self) -> int:
        n = 1
        for d in self.shape:
            n *= d
        return n

    def initial_values(self) -> tuple[int, ...]:
        if isinstance(self.initial, int):
            vals = (self.initial,) * self.size
        else:
            vals = tuple(self.initial)
            if len(vals) != self.size:
                raise ModelError(f"{self.name}: initializer has {len(vals)} values, need {self.size}")
        for x in vals:
            if not self.lower <= x <= self.upper:
                raise ModelError(f"{self.name}: initial value {x} outside [{self.lower}, {self.upper}]")
        return vals


@dataclass(frozen=True)
class Location:
    name: str
    kind: str = "normal"  # initial | normal | committed

    @property
    def committed(self) -> bool:
        return self.kind == "committed"


@dataclass(frozen=True)
class Edge:
    """An edge; ``guard``/``update`` are expression-language strings and
    ``sync`` is ``""``, ``"ch!"``, ``"ch?"`` or ``"ch[expr]!"``.

    The ``inverse_*`` fields are only consulted when building the reversed
    model for epistemic checks. ``inverse_select`` binds extra names for
    recovering values the forward update discards; ``inverse_sync`` names the
    channel when its index depends on variables the update changes.
    """

    source: str
    target: str
    select: tuple[tuple[str, int, int], ...] = ()
    guard: str = ""
    sync: str = ""
    update: str = ""
    inverse_guard: str | None = None
    inverse_update: str | None = None
    inverse_select: tuple[tuple[str, int, int], ...] = ()
    inverse_sync: str | None = None


@dataclass(frozen=True)
class Channel:
    name: str
    mode: str = "binary"  # binary | broadcast
    size: int | None = None  # channel array length


@dataclass
class ProcessTemplate:
    name: str
    locations: list[Location]
    edges: list[Edge]
    locals: list[VariableDecl] = field(default_factory=list)
    parameters: tuple[str, ...] = ()
    initial: str | None = None

    def __post_init__(self):
        names = [loc.name for loc in self.locations]
        if len(set(names)) != len(names):
            raise ModelError(f"template {self.name}: duplicate location names")
        inits = [loc.name for loc in self.locations if loc.kind == "initial"]
        if self.initial is None:
            if len(inits) != 1:
                raise ModelError(f"template {self.name}: needs exactly one initial location")
            self.initial = inits[0]
        elif self.initial not in names:
            raise ModelError(f"template {self.name}: unknown initial location {self.initial}")
        for e in self.edges:
            for end in (e.source, e.target):
                if end not in names:
                    raise ModelError(f"template {self.name}: edge refers to unknown location {end}")
        local_names = [d.name for d in self.locals]
        if len(set(local_names)) != len(local_names):
            raise ModelError(f"template {self.name}: duplicate local variables")

    def location_index(self, name: str) -> int:
        for i, loc in enumerate(self.locations):
            if loc.name == name:
                return i
        raise KeyError(name)


class NetworkState(NamedTuple):
    locations: tuple[int, ...]
    valuation: tuple[int, ...]


class TransitionLabel(NamedTuple):
    kind: str  # internal | binary-sync | broadcast
    participants: tuple[tuple[int, int], ...]  # (instance, edge index)
    bindings: tuple[tuple[str, int], ...] = ()
    channel: str = ""


_PACKERS: dict[tuple[int, int], Callable] = {}


def canonical_key(state: NetworkState) -> bytes:
    """Injective byte encoding: lengths, then little-endian int32 payload."""
    locs, vals = state
    shape = (len(locs), len(vals))
    pack = _PACKERS.get(shape)
    if pack is None:
        pack = _PACKERS[shape] = struct.Struct(f"<II{shape[0]}i{shape[1]}i").pack
    return pack(*shape, *locs, *vals)


# ---------------------------------------------------------------- compiled form


class _Sync(NamedTuple):
    base: int  # first channel id of the (array) channel
    index: Callable | int | None
    size: int
    send: bool
    broadcast: bool


@dataclass
class _CEdge:
    instance: int
    index: int
    edge: Edge
    bindings: tuple[tuple[int, ...], ...]
    sel_names: tuple[str, ...]
    guard: Callable
    update: Callable | None
    full_check: bool
    sync: _Sync | None
    desc: str
    target: int


@dataclass(frozen=True)
class Instance:
    template: ProcessTemplate
    index: int  # id among instances of the same template
    params: dict

    @property
    def name(self) -> str:
        return f"{self.template.name}({self.index})"


class Network:
    """Immutable once built; ``successors`` is a pure function of the state.

    ``processes`` lists ``(template, [param dict per instance])``; instance
    ids are assigned 0..n-1 per template in list order. ``functions`` maps
    procedure names to factories ``factory(layout) -> fn(v, *args)`` where
    ``layout`` is the instance's :class:`Layout`.
    """

    def __init__(
        self,
        processes: Sequence[tuple[ProcessTemplate, Sequence[dict]]],
        globals: Sequence[VariableDecl] = (),
        channels: Sequence[Channel] = (),
        consts: dict | None = None,
        functions: dict[str, Callable] | None = None,
    ):
        self.globals = list(globals)
        self.channels = list(channels)
        self.consts = dict(consts or {})
        self.function_factories = dict(functions or {})
        self.instances: list[Instance] = []
        self.templates: dict[str, ProcessTemplate] = {}
        for tpl, params_list in processes:
            if tpl.name in self.templates:
                raise ModelError(f"duplicate template {tpl.name}")
            self.templates[tpl.name] = tpl
            for i, params in enumerate(params_list):
                missing = set(tpl.parameters) - set(params)
                if missing:
                    raise ModelError(f"{tpl.name}({i}): missing parameters {sorted(missing)}")
                self.instances.append(Instance(tpl, i, dict(params)))
        self._layout()
        self._compile()

    # ---- layout

    def _layout(self) -> None:
        seen: set[str] = set()
        for d in self.globals:
            if d.name in seen or d.name in self.consts:
                raise ModelError(f"duplicate global name {d.name}")
            seen.add(d.name)
        self.global_refs: dict[str, VarRef] = {}
        self.var_names: list[str] = []  # flat slot names, for traces
        lower: list[int] = []
        upper: list[int] = []
        init: list[int] = []

        def place(d: VariableDecl, prefix: str, table: dict) -> None:
            if d.lower > d.upper:
                raise ModelError(f"{d.name}: empty range")
            vals = d.initial_values()
            table[d.name] = VarRef(len(init), d.shape, d.lower, d.upper)
            for flat, x in enumerate(vals):
                self.var_names.append(prefix + d.name + _suffix(flat, d.shape))
                lower.append(d.lower)
                upper.append(d.upper)
                init.append(x)

        for d in self.globals:
            place(d, "", self.global_refs)
        self.local_refs: list[dict[str, VarRef]] = []
        for inst in self.instances:
            refs: dict[str, VarRef] = {}
            for d in inst.template.locals:
                place(d, inst.name + ".", refs)
            self.local_refs.append(refs)
        self.lower = tuple(lower)
        self.upper = tuple(upper)
        self._initial_vals = tuple(init)
        self.channel_ids: dict[str, tuple[int, Channel]] = {}
        self.channel_names: list[str] = []
        for ch in self.channels:
            if ch.name in self.channel_ids:
                raise ModelError(f"duplicate channel {ch.name}")
            self.channel_ids[ch.name] = (len(self.channel_names), ch)
            if ch.size is None:
                self.channel_names.append(ch.name)
            else:
                self.channel_names.extend(f"{ch.name}[{i}]" for i in range(ch.size))
        self.broadcast_ids = frozenset(
            cid
            for cid, name in enumerate(self.channel_names)
            if self.channel_ids[name.split("[")[0]][1].mode == "broadcast"
        )

    def layout(self, instance: int | None) -> "Layout":
        return Layout(self, instance)

    def scope(self, instance: int | None, member: bool = False) -> Scope:
        lay = self.layout(instance)
        variables = dict(self.global_refs)
        consts = dict(self.consts)
        if instance is not None:
            inst = self.instances[instance]
            consts.update(inst.params)
            variables.update(self.local_refs[instance])
        functions = _LazyFunctions(self.function_factories, lay)
        return Scope(consts, variables, functions, self._resolve_member if member else None)

    def _resolve_member(self, template: str, index: int | None, member: str):
        inst = self.instance_id(template, index)
        tpl = self.instances[inst].template
        for k, loc in enumerate(tpl.locations):
            if loc.name == member:
                return "location", (inst, k)
        ref = self.local_refs[inst].get(member)
        if ref is None or ref.shape:
            raise QueryError(f"{template}: no location or scalar local named {member!r}")
        return "variable", ref

    def instance_id(self, template: str, index: int | None) -> int:
        matches = [k for k, inst in enumerate(self.instances) if inst.template.name == template]
        if not matches:
            raise QueryError(f"unknown template {template!r}")
        if index is None:
            if len(matches) != 1:
                raise QueryError(f"{template} has {len(matches)} instances; give an index")
            return matches[0]
        if not 0 <= index < len(matches):
            raise QueryError(f"no instance {template}({index})")
        return matches[index]

    # ---- compilation

    def _compile(self) -> None:
        self.out: list[list[list[_CEdge]]] = []
        self.committed: list[tuple[bool, ...]] = []
        self.initial_locs = tuple(
            inst.template.location_index(inst.template.initial) for inst in self.instances
        )
        for k, inst in enumerate(self.instances):
            tpl = inst.template
            scope = self.scope(k)
            per_loc: list[list[_CEdge]] = [[] for _ in tpl.locations]
            for ei, e in enumerate(tpl.edges):
                ce = self._compile_edge(k, ei, e, scope)
                per_loc[tpl.location_index(e.source)].append(ce)
            self.out.append(per_loc)
            self.committed.append(tuple(loc.committed for loc in tpl.locations))

    def _compile_edge(self, k: int, ei: int, e: Edge, scope: Scope) -> _CEdge:
        inst = self.instances[k]
        desc = f"{inst.name}: {e.source} -> {e.target} #{ei}"
        sel_names = tuple(s[0] for s in e.select)
        consts = scope.consts
        ranges = []
        for name, lo, hi in e.select:
            lo = _const_int(lo, consts)
            hi = _const_int(hi, consts)
            ranges.append(range(lo, hi + 1))
        comp = Compiler(scope, sel_names)
        try:
            guard = comp.guard_fn(parse_expr(e.guard) if e.guard.strip() else None)
            stmts = parse_update(e.update)
            update = comp.update_fn(stmts)
            sync = self._compile_sync(e.sync, comp) if e.sync.strip() else None
        except (NameError, SyntaxError, ValueError, EvalError) as exc:
            raise ModelError(f"{desc}: {exc}") from exc
        return _CEdge(
            instance=k,
            index=ei,
            edge=e,
            bindings=tuple(itertools.product(*ranges)),
            sel_names=sel_names,
            guard=guard,
            update=update,
            full_check=any(isinstance(s, CallStmt) for s in stmts),
            sync=sync,
            desc=desc,
            target=inst.template.location_index(e.target),
        )

    def _compile_sync(self, text: str, comp: Compiler) -> _Sync:
        text = text.strip()
        if text[-1] not in "!?":
            raise ModelError(f"sync {text!r} must end with ! or ?")
        send = text[-1] == "!"
        p = Parser(text[:-1])
        target = p._postfix(True)
        p.end()
        index_expr: Expr | None = None
        if isinstance(target, Name):
            name = target.ident
        elif hasattr(target, "base") and isinstance(target.base, Name):
            name = target.base.ident
            index_expr = target.index
        else:
            raise ModelError(f"bad channel reference {text!r}")
        if name not in self.channel_ids:
            raise ModelError(f"undeclared channel {name!r}")
        base, ch = self.channel_ids[name]
        if (ch.size is None) != (index_expr is None):
            raise ModelError(f"channel {name!r} indexing mismatch")
        index: Callable | int | None = None
        if index_expr is not None:
            c = comp.const_value(index_expr)
            index = c if isinstance(c, int) else comp.value_fn(index_expr)
        return _Sync(base, index, ch.size or 1, send, ch.mode == "broadcast")

    # ---- semantics

    def initial_state(self) -> NetworkState:
        return NetworkState(self.initial_locs, self._initial_vals)

    def _channel(self, ce: _CEdge, vals, b) -> int:
        s = ce.sync
        if s.index is None:
            return s.base
        i = s.index if isinstance(s.index, int) else s.index(vals, *b)
        if not 0 <= i < s.size:
            raise EvalError(f"channel index {i} out of range [0, {s.size})")
        return s.base + i

    def enabled(self, state: NetworkState):
        """Enabled (edge, binding, channel) triples, in deterministic order."""
        locs, vals = state
        result = []
        append = result.append
        ce = None
        try:
            for out, loc in zip(self.out, locs):
                for ce in out[loc]:
                    guard = ce.guard
                    for b in ce.bindings:
                        if guard(vals, *b):
                            sync = ce.sync
                            if sync is None:
                                append((ce, b, None))
                            elif sync.index is None:
                                append((ce, b, sync.base))
                            else:
                                append((ce, b, self._channel(ce, vals, b)))
        except (EvalError, IndexError, ZeroDivisionError, TypeError) as exc:
            raise CheckerError(str(exc), ce.desc if ce is not None else "") from exc
        return result

    def successors(self, state: NetworkState) -> list[tuple[TransitionLabel, NetworkState]]:
        locs, vals = state
        committed = self.committed
        any_committed = any(map(tuple.__getitem__, committed, locs))
        enabled = self.enabled(state)
        receivers: dict[int, list] = {}
        for item in enabled:
            ce = item[0]
            if ce.sync is not None and not ce.sync.send:
                receivers.setdefault(item[2], []).append(item)
        out = []
        for item in enabled:
            ce, b, ch = item
            if ce.sync is None:
                # common case, kept off the generic combo path
                if any_committed and not committed[ce.instance][locs[ce.instance]]:
                    continue
                nxt = self._fire(state, (item,))
                if nxt is not None:
                    out.append((TransitionLabel("internal", ((ce.instance, ce.index),),
                                                tuple(zip(ce.sel_names, b))), nxt))
                continue
            elif not ce.sync.send:
                continue
            elif ch in self.broadcast_ids:
                kind = "broadcast"
                groups: dict[int, list] = {}
                for r in receivers.get(ch, ()):
                    if r[0].instance != ce.instance:
                        groups.setdefault(r[0].instance, []).append(r)
                combos = [
                    (item,) + rest for rest in itertools.product(*(groups[i] for i in sorted(groups)))
                ]
            else:
                kind = "binary-sync"
                combos = [
                    (item, r) for r in receivers.get(ch, ()) if r[0].instance != ce.instance
                ]
            for combo in combos:
                if any_committed and not any(
                    committed[p[0].instance][locs[p[0].instance]] for p in combo
                ):
                    continue
                nxt = self._fire(state, combo)
                if nxt is None:
                    continue
                label = TransitionLabel(
                    kind,
                    tuple((p[0].instance, p[0].index) for p in combo),
                    tuple(pair for p in combo for pair in zip(p[0].sel_names, p[1])),
                    "" if ch is None else self.channel_names[ch],
                )
                out.append((label, nxt))
        return out

    def _fire(self, state: NetworkState, combo) -> NetworkState | None:
        locs, vals = state
        w = list(vals)
        new_locs = list(locs)
        full = False
        for ce, b, _ in combo:
            new_locs[ce.instance] = ce.target
            if ce.update is not None:
                try:
                    ce.update(w, *b)
                except Discard:
                    return None
                except (EvalError, IndexError, ZeroDivisionError, TypeError) as exc:
                    raise CheckerError(str(exc), ce.desc) from exc
                full = full or ce.full_check
        if full:
            if not (all(map(operator.le, self.lower, w)) and all(map(operator.le, w, self.upper))):
                return None
        return NetworkState(tuple(new_locs), tuple(w))

    # ---- atoms and introspection

    @cached_property
    def _atom_cache(self) -> dict:
        return {}

    def compile_atom(self, atom: str | Expr) -> Callable:
        key = atom if isinstance(atom, str) else pretty(atom)
        fn = self._atom_cache.get(key)
        if fn is None:
            expr = parse_expr(atom) if isinstance(atom, str) else atom
            try:
                fn = Compiler(self.scope(None, member=True)).atom_fn(expr)
            except NameError as exc:
                raise QueryError(str(exc)) from exc
            self._atom_cache[key] = fn
        return fn

    def eval_atom(self, state: NetworkState, atom: str | Expr) -> bool:
        try:
            return bool(self.compile_atom(atom)(state.locations, state.valuation))
        except (EvalError, IndexError) as exc:
            raise QueryError(f"cannot evaluate {atom!r}: {exc}") from exc

    def value(self, state: NetworkState, name: str, instance: int | None = None):
        """Read a variable (scalar or flattened array) by name."""
        refs = self.global_refs if instance is None else self.local_refs[instance]
        ref = refs[name]
        n = 1
        for d in ref.shape:
            n *= d
        vals = state.valuation[ref.offset : ref.offset + n]
        return vals[0] if not ref.shape else vals

    def location_name(self, state: NetworkState, instance: int) -> str:
        return self.instances[instance].template.locations[state.locations[instance]].name

    def describe(self, state: NetworkState) -> dict[str, int | str]:
        """Flat name -> value map (locations under ``Inst.location``)."""
        d: dict[str, int | str] = {}
        for k, inst in enumerate(self.instances):
            d[f"{inst.name}.location"] = self.location_name(state, k)
        for name, x in zip(self.var_names, state.valuation):
            d[name] = x
        return d

    def edge(self, instance: int, index: int) -> Edge:
        return self.instances[instance].template.edges[index]

    def check_state(self, state: NetworkState) -> bool:
        return all(lo <= x <= hi for x, lo, hi in zip(state.valuation, self.lower, self.upper))


class _LazyFunctions:
    """Builds a procedure for an instance only when a compiled edge uses it."""

    def __init__(self, factories: dict, layout: "Layout"):
        self.factories = factories
        self.layout = layout
        self.built: dict = {}

    def get(self, name: str, default=None):
        if name not in self.factories:
            return default
        if name not in self.built:
            self.built[name] = self.factories[name](self.layout)
        return self.built[name]

    def __contains__(self, name: str) -> bool:
        return name in self.factories


class Layout:
    """Variable/constant lookup handed to procedure factories."""

    def __init__(self, network: Network, instance: int | None):
        self.network = network
        self.instance = instance
        self.params = {} if instance is None else network.instances[instance].params

    def ref(self, name: str) -> VarRef:
        if self.instance is not None and name in self.network.local_refs[self.instance]:
            return self.network.local_refs[self.instance][name]
        return self.network.global_refs[name]

    def offset(self, name: str, *idx: int) -> int:
        """Flat slot of ``name[idx...]``; a prefix of indices gives the row start."""
        ref = self.ref(name)
        off = ref.offset
        for k, i in enumerate(idx):
            stride = 1
            for d in ref.shape[k + 1 :]:
                stride *= d
            off += i * stride
        return off

    def const(self, name: str):
        if name in self.params:
            return self.params[name]
        return self.network.consts[name]


def _suffix(flat: int, shape: tuple[int, ...]) -> str:
    if not shape:
        return ""
    idx = []
    for d in reversed(shape):
        idx.append(flat % d)
        flat //= d
    return "".join(f"[{i}]" for i in reversed(idx))


def _const_int(x, consts: dict) -> int:
    if isinstance(x, int):
        return x
    c = Compiler(Scope(consts, {})).const_value(parse_expr(str(x)))
    if not isinstance(c, int):
        raise ModelError(f"selection bound {x!r} is not constant")
    return c


def initial_state(network: Network) -> NetworkState:
    return network.initial_state()


def successors(network: Network, state: NetworkState):
    return network.successors(state)


def eval_atom(network: Network, state: NetworkState, atom: str | Expr) -> bool:
    return network.eval_atom(state, atom)
