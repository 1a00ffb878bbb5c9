"""Epistemic reduction: turn coercer-knowledge questions into reachability.

The augmented network holds every base location plus a reverse copy
(``<name>_rev``) whose outgoing edges undo the base edges entering the
original. From a real state satisfying the jump condition, an epistemic
jump moves every process to its reverse copy, re-selects the voter-private
variables and clears ``real``. Knowledge then reads as "a reverse path leads
back to the initial state": the coercer cannot rule out the re-selected world
if the run can be undone to the start.

Reverse edges apply the declared (or automatic) inverse update under the
declared inverse guard. A reverse step is kept only if the reconstructed
state mirrors a base-reachable state and the matching base transition
really leads from it to the current one, with the re-selected variables left
out of both checks (unless strict mode is on). Reverse runs thus retrace
base runs backwards, and what the coercer can observe enters only through
the inverse guards.

Persistent flags are extra 0/1 globals. They are set (never cleared) when
their trigger holds in the named phase: ``forward`` on real states,
``reverse`` on reverse states, ``jump`` on the state a jump produces.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

from .crypto import CryptoError
from .ctl.formula import AG, EF, And, Atom, Formula, Implies
from .kernel import (
    CheckerError, Edge, Location, ModelError, Network, NetworkState, ProcessTemplate, TransitionLabel,
    VariableDecl, parse_update,
)
from .kernel.expr import CallStmt, Index, Name, Num, Stmt, Unary, pretty

REV = "_rev"
PHASES = ("forward", "reverse", "jump")


@dataclass(frozen=True)
class FlagSpec:
    name: str
    triggers: tuple[tuple[str, str], ...]  # (phase, atom)


@dataclass(frozen=True)
class ObservableSpec:
    flags: tuple[FlagSpec, ...] = ()
    # (template, index, variable) re-selected over its declared range on the jump
    reselect: tuple[tuple[str, int | None, str], ...] = ()
    jump_condition: str = "Sys.results"
    # strict: reverse runs must also agree with the re-selected values, so the
    # jump lands only on base-reachable worlds
    strict: bool = False

    @classmethod
    def pretavoter(cls, v_total: int, c_total: int, reselect_voters=None,
                   strict: bool = False) -> "ObservableSpec":
        """Vote flags for every (voter, candidate); the jump re-selects the
        ``chosen`` value of each voter in ``reselect_voters`` (default all)."""
        flags = []
        for i in range(v_total):
            marked = f"!Voter({i}).idle && !Voter({i}).has_ballot"
            for j in range(c_total):
                flags.append(FlagSpec(f"voted_{i}_{j}", (
                    ("forward", f"{marked} && Voter({i}).chosen == {j}"),
                    ("jump", f"Voter({i}).chosen == {j}"),
                )))
                flags.append(FlagSpec(f"negvoted_{i}_{j}", (
                    ("forward", f"{marked} && Voter({i}).chosen != {j}"),
                )))
                flags.append(FlagSpec(f"epist_voted_{i}_{j}", (
                    ("jump", f"Voter({i}).chosen == {j}"),
                )))
        flags.append(FlagSpec("results", (("forward", "Sys.results"),)))
        voters = range(v_total) if reselect_voters is None else reselect_voters
        return cls(tuple(flags), tuple(("Voter", i, "chosen") for i in voters), strict=strict)


# ---------------------------------------------------------------- inversion


def _is_pure(e) -> bool:
    """Constants, variables, selections and indexing of those."""
    if isinstance(e, (Num, Name)):
        return True
    if isinstance(e, Unary) and e.op == "-":
        return isinstance(e.operand, Num)
    if isinstance(e, Index):
        return _is_pure(e.base) and _is_pure(e.index)
    return False


def invert_update(stmts: tuple[Stmt, ...], initial_of) -> str | None:
    """Automatic inverse for flag-sets, transfers and counters, else None.

    Assignments are undone by restoring the variable's initial value, so
    they must be write-once from the initial value along any run.
    """
    out = []
    for s in reversed(stmts):
        if isinstance(s, CallStmt):
            return None
        target = pretty(s.target)
        if s.op == "++":
            out.append(f"{target}--")
        elif s.op == "--":
            out.append(f"{target}++")
        elif s.op in ("+=", "-=") and isinstance(s.value, Num):
            out.append(f"{target} {'-=' if s.op == '+=' else '+='} {s.value.value}")
        elif s.op == "=" and _is_pure(s.value):
            base = s.target
            while isinstance(base, Index):
                base = base.base
            init = initial_of(base.ident)
            if init is None:
                return None
            out.append(f"{target} = {init}")
        else:
            return None
    return ", ".join(out)


def _assigned(update: str) -> set[str]:
    out = set()
    for s in parse_update(update):
        if not isinstance(s, CallStmt):
            base = s.target
            while isinstance(base, Index):
                base = base.base
            out.add(base.ident)
    return out


def _names(text: str) -> set[str]:
    return set(re.findall(r"[A-Za-z_][A-Za-z_0-9]*", text or ""))


def reverse_template(tpl: ProcessTemplate, initial_of) -> ProcessTemplate:
    if tpl.name.endswith(REV) or any(loc.name.endswith(REV) for loc in tpl.locations):
        raise ModelError(f"{tpl.name}: location names may not end in {REV}")
    locs = list(tpl.locations)
    for loc in tpl.locations:
        kind = "committed" if loc.committed else "normal"
        locs.append(Location(loc.name + REV, kind))
    edges = list(tpl.edges)
    local_init = {d.name: d for d in tpl.locals}

    def init_of(name):
        if name in local_init:
            d = local_init[name]
            return d.initial if isinstance(d.initial, int) else None
        return initial_of(name)

    for ei, e in enumerate(tpl.edges):
        where = f"{tpl.name}: {e.source} -> {e.target} #{ei}"
        if e.inverse_update is not None:
            inv = e.inverse_update
        else:
            inv = invert_update(parse_update(e.update), init_of)
            if inv is None:
                raise ModelError(f"{where}: update {e.update!r} needs a declared inverse")
        update = inv
        guard = e.inverse_guard or ""
        sync = e.sync
        if e.inverse_sync is not None:
            sync = e.inverse_sync
        elif "[" in sync and _names(sync.split("[", 1)[1]) & _assigned(e.update):
            raise ModelError(f"{where}: channel index changes with the update; declare inverse_sync")
        used = _names(update) | _names(guard) | _names(sync)
        select = tuple(s for s in e.select if s[0] in used) + tuple(e.inverse_select)
        edges.append(Edge(e.target + REV, e.source + REV, select, guard, sync, update))
    return ProcessTemplate(tpl.name, locs, edges, list(tpl.locals), tpl.parameters, tpl.initial)


# ---------------------------------------------------------------- network


class AugmentedNetwork(Network):
    def __init__(self, base: Network, spec: ObservableSpec):
        self.base = base
        self.spec = spec
        names = {d.name for d in base.globals}
        for f in spec.flags:
            if f.name in names or f.name in ("real", "initial"):
                raise ModelError(f"flag {f.name!r} clashes with an existing variable")
            for phase, _ in f.triggers:
                if phase not in PHASES:
                    raise ModelError(f"flag {f.name}: unknown phase {phase!r}")
        init_globals = {
            d.name: (d.initial if isinstance(d.initial, int) else None) for d in base.globals
        }
        rev = {}
        processes = []
        for inst in base.instances:
            tpl = inst.template
            if tpl.name not in rev:
                rev[tpl.name] = reverse_template(tpl, init_globals.get)
                processes.append((rev[tpl.name], []))
            processes[-1][1].append(inst.params)
        flag_names = list(dict.fromkeys(f.name for f in spec.flags))
        extra = [VariableDecl(n, 0, 1) for n in flag_names] + [
            VariableDecl("real", 0, 1, 1),
            VariableDecl("initial", 0, 1),
        ]
        super().__init__(
            processes,
            globals=list(base.globals) + extra,
            channels=base.channels,
            consts=base.consts,
            functions=base.function_factories,
        )
        self.config = getattr(base, "config", None)
        self.n_base_locs = [len(inst.template.locations) for inst in base.instances]
        self.flag_slots = {n: self.global_refs[n].offset for n in flag_names}
        self.real_slot = self.global_refs["real"].offset
        self.initial_slot = self.global_refs["initial"].offset
        aux = set(self.flag_slots.values()) | {self.real_slot, self.initial_slot}
        self.base_slots = tuple(k for k in range(len(self.lower)) if k not in aux)
        base_init = Network.initial_state(self)
        self._base_init_vals = tuple(base_init.valuation[k] for k in self.base_slots)
        self._rev_init_locs = tuple(
            loc + n for loc, n in zip(base_init.locations, self.n_base_locs)
        )
        self._triggers = {p: [] for p in PHASES}
        for f in spec.flags:
            for phase, atom in f.triggers:
                self._triggers[phase].append((self.flag_slots[f.name], self.compile_atom(atom)))
        self._jump = self.compile_atom(spec.jump_condition)
        self._reselect = []
        for tname, idx, var in spec.reselect:
            k = self.instance_id(tname, idx)
            ref = self.local_refs[k].get(var)
            if ref is None or ref.shape:
                raise ModelError(f"{tname}({idx}): no scalar local {var!r} to re-select")
            self._reselect.append((f"{self.instances[k].name}.{var}", ref.offset,
                                   range(ref.lower, ref.upper + 1)))
        skip = set() if spec.strict else {slot for _, slot, _ in self._reselect}
        self._cmp_slots = tuple(k for k in self.base_slots if k not in skip)
        self._base_reach = None

    def is_real(self, state: NetworkState) -> bool:
        return state.valuation[self.real_slot] == 1

    def _settle(self, locs, vals: list, phase: str) -> NetworkState:
        for slot, fn in self._triggers[phase]:
            if not vals[slot] and fn(locs, vals):
                vals[slot] = 1
        at_start = (
            vals[self.real_slot] == 0
            and locs == self._rev_init_locs
            and all(vals[k] == x for k, x in zip(self.base_slots, self._base_init_vals))
        )
        vals[self.initial_slot] = 1 if at_start else 0
        return NetworkState(locs, tuple(vals))

    def initial_state(self) -> NetworkState:
        s = Network.initial_state(self)
        return self._settle(s.locations, list(s.valuation), "forward")

    def _mirror_key(self, locs, vals) -> tuple:
        return locs, tuple(vals[k] for k in self._cmp_slots)

    @property
    def base_reachable(self) -> set:
        """Mirror keys of every base-reachable state, built on first use."""
        if self._base_reach is None:
            s0 = Network.initial_state(self)
            seen = {self._mirror_key(s0.locations, s0.valuation)}
            todo = [s0]
            while todo:
                for _, t in Network.successors(self, todo.pop()):
                    k = self._mirror_key(t.locations, t.valuation)
                    if k not in seen:
                        seen.add(k)
                        todo.append(t)
            self._base_reach = seen
        return self._base_reach

    def _undoes(self, pre: NetworkState, post: NetworkState) -> bool:
        """A reverse step ``post -> pre`` must undo a base transition between
        base-reachable states: the mirror of ``pre`` is reachable and some
        base edge leads from it to the mirror of ``post``. Re-selected slots
        are left out of both checks."""
        locs = tuple(loc - n for loc, n in zip(pre.locations, self.n_base_locs))
        if self._mirror_key(locs, pre.valuation) not in self.base_reachable:
            return False
        want_locs = tuple(loc - n for loc, n in zip(post.locations, self.n_base_locs))
        want = tuple(post.valuation[k] for k in self._cmp_slots)
        try:
            succ = Network.successors(self, NetworkState(locs, pre.valuation))
        except (CheckerError, CryptoError):
            # the reconstructed state is not one the base model can be in
            return False
        for _, t in succ:
            if t.locations == want_locs and tuple(t.valuation[k] for k in self._cmp_slots) == want:
                return True
        return False

    def successors(self, state: NetworkState):
        out = []
        real = self.is_real(state)
        for label, s in Network.successors(self, state):
            if real:
                out.append((label, self._settle(s.locations, list(s.valuation), "forward")))
            elif self._undoes(s, state):
                out.append((label, self._settle(s.locations, list(s.valuation), "reverse")))
        if real and self._jump(state.locations, state.valuation):
            locs = tuple(loc + n for loc, n in zip(state.locations, self.n_base_locs))
            for choice in itertools.product(*(r for _, _, r in self._reselect)):
                vals = list(state.valuation)
                vals[self.real_slot] = 0
                for (_, slot, _), x in zip(self._reselect, choice):
                    vals[slot] = x
                label = TransitionLabel(
                    "epistemic-jump", (),
                    tuple((name, x) for (name, _, _), x in zip(self._reselect, choice)), "",
                )
                out.append((label, self._settle(locs, vals, "jump")))
        return out


def augment(network: Network, spec: ObservableSpec | None = None,
            jump_condition: str | None = None) -> AugmentedNetwork:
    if spec is None:
        cfg = getattr(network, "config", None)
        if cfg is None:
            raise ModelError("no observable spec given and the network has no model config")
        spec = ObservableSpec.pretavoter(cfg.v_total, cfg.c_total)
    if jump_condition is not None:
        spec = ObservableSpec(spec.flags, spec.reselect, jump_condition, spec.strict)
    return AugmentedNetwork(network, spec)


def build_rf_weak(i: int, j: int) -> Formula:
    return EF(And(And(And(Atom.of("results"), Atom.of(f"negvoted_{i}_{j}")),
                      Atom.of(f"epist_voted_{i}_{j}")), Atom.of("initial")))


def build_rf_strong(i: int, j: int) -> Formula:
    return AG(Implies(And(Atom.of("results"), Atom.of("real")),
                      EF(And(Atom.of(f"voted_{i}_{j}"), Atom.of("initial")))))
