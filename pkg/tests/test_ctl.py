import random

import pytest

from pavmc.ctl import (
    AF, AG, EF, EG, EU, EX, AX, TRUE, And, Atom, Deadlock, Graph, LeadsTo, Not, Or,
    ResourceError, check, check_labeling, explore, replay,
)
from pavmc.kernel import Channel, Edge, Location, Network, ProcessTemplate, VariableDecl
from pavmc.ctl.labeling import Labeler

ORDERS = ("bfs", "dfs", "rdfs")


def toggle():
    tpl = ProcessTemplate("T", [Location("a", "initial"), Location("b")],
                          [Edge("a", "b"), Edge("b", "a")])
    return Network([(tpl, [{}])])


def self_loop():
    tpl = ProcessTemplate("S", [Location("s", "initial")], [Edge("s", "s")])
    return Network([(tpl, [{}])])


A, B = Atom.of("T(0).a"), Atom.of("T(0).b")


def holds(net, f, **kw):
    return check(net, f, **kw).satisfied


# ---------------------------------------------------------------- toggle


def test_toggle_ef_b_witness_length_one():
    v = check(toggle(), EF(B))
    assert v.satisfied
    assert len(v.trace) == 2
    replay(toggle(), v.trace)


def test_toggle_ag_a_counterexample_to_b():
    net = toggle()
    v = check(net, AG(A))
    assert not v.satisfied
    assert net.location_name(v.trace.last, 0) == "b"
    replay(net, v.trace)


def test_toggle_leads_to():
    assert holds(toggle(), LeadsTo(A, B))


def test_toggle_explore_counts():
    for order in ORDERS:
        st = explore(toggle(), order=order)
        assert (st.states, st.transitions) == (2, 2)


def test_self_loop_lasso():
    net = self_loop()
    v = check(net, EG(TRUE))
    assert v.satisfied and v.trace.loop_start == 0
    replay(net, v.trace)
    assert not holds(net, AF(Not(TRUE)))


def test_leads_to_escape_loop():
    tpl = ProcessTemplate("P", [Location("p", "initial"), Location("q")],
                          [Edge("p", "p"), Edge("p", "q")])
    net = Network([(tpl, [{}])])
    v = check(net, LeadsTo(Atom.of("P(0).p"), Atom.of("P(0).q")))
    assert not v.satisfied
    assert v.trace.loop_start is not None
    replay(net, v.trace)


def test_deadlock_totalization():
    tpl = ProcessTemplate("D", [Location("x", "initial")], [])
    net = Network([(tpl, [{}])])
    assert holds(net, EG(TRUE))
    assert holds(net, EG(TRUE), method="labeling")
    assert holds(net, EF(Deadlock()))
    assert not holds(net, AF(Not(TRUE)))


def test_budget_raises_resource_error():
    tpl = ProcessTemplate("C", [Location("c", "initial")], [Edge("c", "c", update="n = n + 1")])
    net = Network([(tpl, [{}])], globals=[VariableDecl("n", 0, 100)])
    with pytest.raises(ResourceError):
        check(net, AG(TRUE), budget=10)
    assert explore(net, budget=10).truncated


def test_nested_operators():
    net = toggle()
    assert holds(net, AG(Or(EX(B), EX(A))))
    assert holds(net, AG(AX(Or(A, B))))
    assert holds(net, EU(A, B))
    # a holds at once, so any E(_ U a) is immediate
    assert holds(net, EU(B, A))
    assert not holds(net, EU(A, And(A, B)))


# ---------------------------------------------------------------- random networks


def random_network(seed: int) -> Network:
    rng = random.Random(seed)
    locs = [Location("l0", "initial"), Location("l1"), Location("l2"), Location("l3")]
    if rng.random() < 0.3:
        locs[3] = Location("l3", "committed")
    names = [loc.name for loc in locs]
    guards = ["", "", "x < 3", "y == 0", "x != y", "x >= 1", "z < 2"]
    updates = ["", "x = x + 1", "x = 0", "y = 1 - y", "x = y", "y = y + 1, x = x - 1",
               "z = z + 1", "z = 0, x = x + 2"]
    syncs = ["", "", "", "c!", "c?", "b!", "b?"]
    edges = [Edge("l0", rng.choice(names[1:]), update=rng.choice(updates))]
    for _ in range(rng.randint(3, 8)):
        edges.append(Edge(rng.choice(names), rng.choice(names), guard=rng.choice(guards),
                          sync=rng.choice(syncs), update=rng.choice(updates)))
    tpl = ProcessTemplate("P", locs, edges, [VariableDecl("z", 0, 2)])
    n = rng.randint(1, 3)
    return Network([(tpl, [{} for _ in range(n)])],
                   globals=[VariableDecl("x", 0, 4), VariableDecl("y", 0, 3)],
                   channels=[Channel("c"), Channel("b", "broadcast")])


BODIES = [
    Atom.of("P(0).l1"),
    Atom.of("x == 2"),
    Atom.of("y >= 1 && P(0).l0"),
    Or(Atom.of("P(0).l2"), Atom.of("x == 0")),
    Not(Deadlock()),
    Atom.of("x + y == 3"),
]


def _seeds(count=30, min_states=8):
    # skip generated networks too small to say anything
    out, seed = [], 0
    while len(out) < count:
        if len(Graph(random_network(seed))) >= min_states:
            out.append(seed)
        seed += 1
    return out


SEEDS = _seeds()


def formulas(rng):
    p, q = rng.sample(BODIES, 2)
    return [EF(p), AG(p), AF(p), EG(p), LeadsTo(p, q), EF(And(p, q))]


@pytest.mark.parametrize("seed", SEEDS)
def test_random_network_oracles(seed):
    net = random_network(seed)
    graph = Graph(net)
    assert len(graph) <= 5000
    lab = Labeler(graph)
    rng = random.Random(seed)
    for f in formulas(rng):
        ref = 0 in lab.sat(f)
        for order in ORDERS:
            v = check(net, f, order=order, seed=seed)
            assert v.satisfied == ref, (seed, f, order)
            if v.trace is not None:
                replay(net, v.trace)
                check_trace_end(net, f, v)
        assert check_labeling(net, f).satisfied == ref


def check_trace_end(net, f, v):
    from pavmc.ctl import compile_body
    last = v.trace.last
    if isinstance(f, EF):
        assert compile_body(net, f.operand)(last)
    elif isinstance(f, AG):
        assert not compile_body(net, f.operand)(last)
    elif isinstance(f, EG):
        body = compile_body(net, f.operand)
        assert all(body(s) for s in v.trace.states)
        assert v.trace.loop_start is not None or not net.successors(last)


@pytest.mark.parametrize("seed", SEEDS)
def test_random_network_duality(seed):
    net = random_network(seed)
    for p in BODIES:
        assert holds(net, EF(p)) == (not holds(net, AG(Not(p))))
        assert holds(net, AF(p)) == (not holds(net, EG(Not(p))))


@pytest.mark.parametrize("seed", range(5))
def test_explore_order_invariant(seed):
    net = random_network(seed)
    counts = {explore(net, order=o, seed=seed).states for o in ORDERS}
    assert len(counts) == 1
