"""Bottom-up CTL labeling over the materialized reachable graph.

Deadlocks get a self-loop so every path is infinite; the deadlock fact is
kept separately for the ``deadlock`` atom.
"""

from __future__ import annotations

from collections import deque

from ..kernel import Network, QueryError, canonical_key
from .checker import DEFAULT_BUDGET, Search, Stats, Verdict, compile_body
from .formula import (
    AF, AG, AX, EF, EG, EU, EX, TRUE, And, Atom, Deadlock, Formula, Implies, LeadsTo, Not, Or,
)


class Graph:
    def __init__(self, network: Network, order="bfs", seed=0, budget=DEFAULT_BUDGET):
        self.network = network
        search = Search(network, order, seed, budget)
        s0 = network.initial_state()
        index = {canonical_key(s0): 0}
        states = [s0]
        succ: list[list[int]] = []
        i = 0
        while i < len(states):
            out = []
            for _, t in search.successors(states[i]):
                k = canonical_key(t)
                j = index.get(k)
                if j is None:
                    j = index[k] = len(states)
                    states.append(t)
                    search._grow(len(states))
                out.append(j)
            succ.append(out)
            i += 1
        self.states = states
        self.deadlock = [not out for out in succ]
        # totalize
        self.succ = [out if out else [i] for i, out in enumerate(succ)]
        self.pred: list[list[int]] = [[] for _ in states]
        for i, out in enumerate(self.succ):
            for j in set(out):
                self.pred[j].append(i)
        self.stats = search.stats
        self.stats.states = len(states)
        self.stats.deadlocks = sum(self.deadlock)

    def __len__(self) -> int:
        return len(self.states)


class Labeler:
    def __init__(self, graph: Graph):
        self.g = graph
        self.all = frozenset(range(len(graph)))
        self.cache: dict[Formula, frozenset[int]] = {}

    def sat(self, f: Formula) -> frozenset[int]:
        hit = self.cache.get(f)
        if hit is None:
            hit = self.cache[f] = frozenset(self._sat(f))
        return hit

    def _sat(self, f: Formula):
        g = self.g
        if isinstance(f, Atom):
            pred = compile_body(g.network, f)
            return {i for i, s in enumerate(g.states) if pred(s)}
        if isinstance(f, Deadlock):
            return {i for i, d in enumerate(g.deadlock) if d}
        if isinstance(f, Not):
            return self.all - self.sat(f.operand)
        if isinstance(f, And):
            return self.sat(f.left) & self.sat(f.right)
        if isinstance(f, Or):
            return self.sat(f.left) | self.sat(f.right)
        if isinstance(f, Implies):
            return (self.all - self.sat(f.left)) | self.sat(f.right)
        if isinstance(f, EX):
            target = self.sat(f.operand)
            return {i for i, out in enumerate(g.succ) if any(j in target for j in out)}
        if isinstance(f, AX):
            return self.sat(Not(EX(Not(f.operand))))
        if isinstance(f, EU):
            return self._eu(self.sat(f.left), self.sat(f.right))
        if isinstance(f, EF):
            return self._eu(self.all, self.sat(f.operand))
        if isinstance(f, AG):
            return self.all - self._eu(self.all, self.all - self.sat(f.operand))
        if isinstance(f, EG):
            return self._eg(self.sat(f.operand))
        if isinstance(f, AF):
            return self.all - self._eg(self.all - self.sat(f.operand))
        if isinstance(f, LeadsTo):
            return self.sat(AG(Implies(f.left, AF(f.right))))
        raise QueryError(f"unsupported formula {type(f).__name__}")

    def _eu(self, left, right) -> set[int]:
        out = set(right)
        work = deque(right)
        while work:
            j = work.popleft()
            for i in self.g.pred[j]:
                if i not in out and i in left:
                    out.add(i)
                    work.append(i)
        return out

    def _eg(self, body) -> set[int]:
        # greatest fixpoint: drop states with no successor left inside
        alive = set(body)
        count = {i: sum(1 for j in self.g.succ[i] if j in alive) for i in alive}
        work = deque(i for i, c in count.items() if c == 0)
        while work:
            j = work.popleft()
            if j not in alive:
                continue
            alive.discard(j)
            for i in self.g.pred[j]:
                if i in alive:
                    count[i] -= self.g.succ[i].count(j)
                    if count[i] == 0:
                        work.append(i)
        return alive


def check_labeling(network: Network, formula: Formula, order="bfs", seed=0,
                   budget=DEFAULT_BUDGET) -> Verdict:
    graph = Graph(network, order, seed, budget)
    sat = Labeler(graph).sat(formula)
    st: Stats = graph.stats
    return Verdict(0 in sat, None, st.states, st.transitions, "labeling", st)


__all__ = ["Graph", "Labeler", "check_labeling", "TRUE"]
