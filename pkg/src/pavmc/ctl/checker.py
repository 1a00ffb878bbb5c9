"""On-the-fly checking of the top-level fragment; nested CTL is delegated to
:mod:`pavmc.ctl.labeling`."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from ..kernel import EvalError, Network, NetworkState, QueryError, canonical_key
from .formula import (
    AF, AG, EF, EG, And, Atom, Deadlock, Formula, Implies, LeadsTo, Not, Or, fragment,
)
from .trace import Trace, path_to

ORDERS = ("bfs", "dfs", "rdfs")
DEFAULT_BUDGET = 10_000_000


@dataclass
class Stats:
    states: int = 0
    transitions: int = 0
    deadlocks: int = 0
    max_frontier: int = 0
    truncated: bool = False

    def as_dict(self) -> dict:
        return dict(self.__dict__)


class ResourceError(RuntimeError):
    def __init__(self, msg: str, stats: Stats):
        super().__init__(f"{msg} ({stats.states} states, {stats.transitions} transitions)")
        self.stats = stats


@dataclass
class Verdict:
    satisfied: bool
    trace: Trace | None = None
    states_explored: int = 0
    transitions: int = 0
    method: str = "on-the-fly"
    stats: Stats = field(default_factory=Stats)


def compile_body(network: Network, f: Formula) -> Callable[[NetworkState], bool]:
    """Predicate for a quantifier-free formula."""
    if isinstance(f, Atom):
        fn = network.compile_atom(f.expr)

        def atom(s):
            try:
                return bool(fn(s.locations, s.valuation))
            except (EvalError, IndexError) as exc:
                raise QueryError(f"cannot evaluate atom: {exc}") from exc
        return atom
    if isinstance(f, Deadlock):
        return lambda s: not network.successors(s)
    if isinstance(f, Not):
        inner = compile_body(network, f.operand)
        return lambda s: not inner(s)
    if isinstance(f, (And, Or, Implies)):
        a, b = compile_body(network, f.left), compile_body(network, f.right)
        if isinstance(f, And):
            return lambda s: a(s) and b(s)
        if isinstance(f, Or):
            return lambda s: a(s) or b(s)
        return lambda s: (not a(s)) or b(s)
    raise QueryError(f"{type(f).__name__} is not a state formula")


class Search:
    """Shared machinery: visited map with parent keys, ordering, budget."""

    def __init__(self, network: Network, order: str = "bfs", seed: int = 0,
                 budget: int = DEFAULT_BUDGET):
        if order not in ORDERS:
            raise ValueError(f"unknown search order {order!r}")
        if budget < 1:
            raise ValueError("budget must be >= 1")
        self.net = network
        self.order = order
        self.rng = random.Random(seed)
        self.budget = budget
        self.stats = Stats()

    def successors(self, state):
        succ = self.net.successors(state)
        self.stats.transitions += len(succ)
        if self.order == "rdfs":
            succ = list(succ)
            self.rng.shuffle(succ)
        return succ

    def _grow(self, n: int) -> None:
        self.stats.states = max(self.stats.states, n)
        if n > self.budget:
            self.stats.truncated = True
            raise ResourceError(f"state budget {self.budget} exceeded", self.stats)

    def reach(self, pred, start: NetworkState | None = None, on_state=None):
        """Find a reachable state satisfying ``pred``; returns its key chain
        from the initial state or None. ``on_state`` sees every new state and
        may return a result to stop the search early."""
        s0 = start if start is not None else self.net.initial_state()
        k0 = canonical_key(s0)
        parent: dict[bytes, bytes | None] = {k0: None}
        self.stats.states = 1
        if pred(s0):
            return [k0]
        if on_state is not None and (hit := on_state(s0, k0, parent)) is not None:
            return hit
        frontier = deque([(s0, k0)])
        bfs = self.order == "bfs"
        key, budget = canonical_key, self.budget
        try:
            return self._reach_loop(frontier, parent, pred, on_state, bfs, key, budget)
        finally:
            self.stats.states = max(self.stats.states, len(parent))

    def _reach_loop(self, frontier, parent, pred, on_state, bfs, key, budget):
        while frontier:
            s, ks = frontier.popleft() if bfs else frontier.pop()
            succ = self.successors(s)
            if not succ:
                self.stats.deadlocks += 1
            if not bfs:
                # the stack pops the last push: push in reverse so the first
                # successor is expanded first
                succ = succ[::-1]
            for _, t in succ:
                kt = key(t)
                if kt in parent:
                    continue
                parent[kt] = ks
                if len(parent) > budget:
                    self._grow(len(parent))
                if pred(t):
                    return _chain(parent, kt)
                if on_state is not None and (hit := on_state(t, kt, parent)) is not None:
                    return hit
                frontier.append((t, kt))
            self.stats.max_frontier = max(self.stats.max_frontier, len(frontier))
        return None

    def fair_path(self, pred, start: NetworkState, done: set[bytes]):
        """Colored DFS inside the ``pred`` subgraph from ``start`` (which must
        satisfy ``pred``): find a reachable deadlock or cycle.

        Returns ``(steps, loop_start)`` relative to ``start`` or None. States
        fully explored without success are added to ``done`` so later calls
        can skip them.
        """
        k0 = canonical_key(start)
        if k0 in done:
            return None
        stack = [(None, start, k0, None)]  # (label, state, key, iterator)
        on_stack = {k0: 0}
        while stack:
            label, s, k, it = stack[-1]
            if it is None:
                succ = self.successors(s)
                if not succ:
                    return [(lab, st) for lab, st, _, _ in stack], None
                it = iter(succ)
                stack[-1] = (label, s, k, it)
            for lab, t in it:
                if not pred(t):
                    continue
                kt = canonical_key(t)
                if kt in on_stack:
                    steps = [(lb, st) for lb, st, _, _ in stack]
                    steps.append((lab, t))
                    return steps, on_stack[kt]
                if kt in done:
                    continue
                on_stack[kt] = len(stack)
                stack.append((lab, t, kt, None))
                self._grow(len(done) + len(on_stack))
                break
            else:
                stack.pop()
                del on_stack[k]
                done.add(k)
        return None


def _chain(parent: dict, k: bytes) -> list[bytes]:
    keys = [k]
    while (k := parent[k]) is not None:
        keys.append(k)
    keys.reverse()
    return keys


def _finish(search: Search, satisfied: bool, trace: Trace | None) -> Verdict:
    st = search.stats
    return Verdict(satisfied, trace, st.states, st.transitions, "on-the-fly", st)


def check_ef(network: Network, body: Formula, order="bfs", seed=0, budget=DEFAULT_BUDGET) -> Verdict:
    search = Search(network, order, seed, budget)
    keys = search.reach(compile_body(network, body))
    if keys is None:
        return _finish(search, False, None)
    return _finish(search, True, path_to(network, keys))


def check_ag(network: Network, body: Formula, order="bfs", seed=0, budget=DEFAULT_BUDGET) -> Verdict:
    v = check_ef(network, Not(body), order, seed, budget)
    v.satisfied = not v.satisfied
    return v


def check_eg(network: Network, body: Formula, order="bfs", seed=0, budget=DEFAULT_BUDGET) -> Verdict:
    search = Search(network, order, seed, budget)
    pred = compile_body(network, body)
    s0 = network.initial_state()
    found = search.fair_path(pred, s0, set()) if pred(s0) else None
    search.stats.states = max(search.stats.states, 1)
    if found is None:
        return _finish(search, False, None)
    steps, loop = found
    return _finish(search, True, Trace(steps, loop))


def check_af(network: Network, body: Formula, order="bfs", seed=0, budget=DEFAULT_BUDGET) -> Verdict:
    v = check_eg(network, Not(body), order, seed, budget)
    v.satisfied = not v.satisfied
    return v


def check_leads_to(network: Network, p: Formula, q: Formula, order="bfs", seed=0,
                   budget=DEFAULT_BUDGET) -> Verdict:
    """p --> q, i.e. AG(p imply AF q)."""
    search = Search(network, order, seed, budget)
    pp, pq = compile_body(network, p), compile_body(network, q)
    not_q = lambda s: not pq(s)
    done: set[bytes] = set()
    witness = {}

    def probe(s, k, parent):
        if pp(s) and not pq(s):
            found = search.fair_path(not_q, s, done)
            if found is not None:
                witness["suffix"] = found
                return _chain(parent, k)
        return None

    keys = search.reach(lambda s: False, on_state=probe)
    if keys is None:
        return _finish(search, True, None)
    prefix = path_to(network, keys)
    steps, loop = witness["suffix"]
    offset = len(prefix.steps) - 1
    trace = Trace(prefix.steps + steps[1:], None if loop is None else loop + offset)
    return _finish(search, False, trace)


def explore(network: Network, order="bfs", seed=0, budget=DEFAULT_BUDGET) -> Stats:
    """Reachable-set statistics; truncation is flagged, never raised."""
    search = Search(network, order, seed, budget)
    try:
        search.reach(lambda s: False)
    except ResourceError:
        pass
    return search.stats


def check(network: Network, formula: Formula, order="bfs", seed=0, budget=DEFAULT_BUDGET,
          method: str = "auto") -> Verdict:
    """Dispatch on the formula's shape; ``method="labeling"`` forces the
    nested-CTL path even for fragment formulas."""
    if method not in ("auto", "labeling"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto" and fragment(formula) == "uppaal-fragment":
        if isinstance(formula, EF):
            return check_ef(network, formula.operand, order, seed, budget)
        if isinstance(formula, AG):
            return check_ag(network, formula.operand, order, seed, budget)
        if isinstance(formula, AF):
            return check_af(network, formula.operand, order, seed, budget)
        if isinstance(formula, EG):
            return check_eg(network, formula.operand, order, seed, budget)
        return check_leads_to(network, formula.left, formula.right, order, seed, budget)
    from .labeling import check_labeling

    return check_labeling(network, formula, order, seed, budget)
