"""JSON traces and run reports.

A trace step holds ``action``, ``participants``, ``bindings`` and ``state``.
The first state is complete; later ones list only the names whose value
changed. :func:`replay_json` rebuilds the full states and checks each step
against the network.
"""

from __future__ import annotations

import json

from .ctl import Trace, TraceError
from .kernel import Network, TransitionLabel


def _action(label: TransitionLabel | None) -> str:
    if label is None:
        return "initial"
    return f"{label.kind} {label.channel}" if label.channel else label.kind


def _participants(network: Network, label: TransitionLabel | None) -> list[dict]:
    if label is None:
        return []
    out = []
    for inst, idx in label.participants:
        e = network.edge(inst, idx)
        out.append({"process": network.instances[inst].name, "edge": idx,
                    "from": e.source, "to": e.target})
    return out


def trace_steps(network: Network, trace: Trace) -> list[dict]:
    steps, prev = [], None
    for label, state in trace.steps:
        full = network.describe(state)
        shown = full if prev is None else {k: v for k, v in full.items() if prev.get(k) != v}
        steps.append({
            "action": _action(label),
            "participants": _participants(network, label),
            "bindings": {} if label is None else dict(label.bindings),
            "state": shown,
        })
        prev = full
    return steps


def trace_document(network: Network, trace: Trace | None, config: dict, query: str,
                   verdict: str) -> dict:
    return {
        "config": config,
        "query": query,
        "verdict": verdict,
        "steps": [] if trace is None else trace_steps(network, trace),
        "loop_start": None if trace is None else trace.loop_start,
    }


def replay_json(network: Network, doc: dict) -> list[dict]:
    """Check a trace document step by step; return the full state maps."""
    steps = doc.get("steps") or []
    if not steps:
        raise TraceError("trace has no steps")
    state = network.initial_state()
    full = network.describe(state)
    if steps[0]["state"] != full:
        raise TraceError("first step is not the initial state")
    states = [full]
    for i, step in enumerate(steps[1:], 1):
        want = dict(full)
        want.update(step["state"])
        for label, nxt in network.successors(state):
            if (_action(label) == step["action"]
                    and _participants(network, label) == step["participants"]
                    and dict(label.bindings) == step["bindings"]
                    and network.describe(nxt) == want):
                state, full = nxt, want
                break
        else:
            raise TraceError(f"step {i} is not a transition of the network")
        states.append(full)
    loop = doc.get("loop_start")
    if loop is not None:
        if not 0 <= loop < len(states) - 1:
            raise TraceError("loop_start out of range")
        if states[loop] != states[-1]:
            raise TraceError("lasso does not close")
    return states


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
