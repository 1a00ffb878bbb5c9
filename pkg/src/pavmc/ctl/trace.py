from __future__ import annotations

from dataclasses import dataclass, field

from ..kernel import Network, NetworkState, TransitionLabel, canonical_key


class TraceError(ValueError):
    pass


@dataclass
class Trace:
    """``steps[0]`` is ``(None, initial state)``; later steps carry the label
    of the transition that produced the state. ``loop_start`` marks a lasso:
    the final state equals ``steps[loop_start]``'s state."""

    steps: list[tuple[TransitionLabel | None, NetworkState]] = field(default_factory=list)
    loop_start: int | None = None

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def states(self) -> list[NetworkState]:
        return [s for _, s in self.steps]

    @property
    def last(self) -> NetworkState:
        return self.steps[-1][1]


def replay(network: Network, trace: Trace, start: NetworkState | None = None) -> None:
    """Check every step against ``successors``; raise TraceError otherwise."""
    if not trace.steps:
        raise TraceError("empty trace")
    first = trace.steps[0][1]
    expected = start if start is not None else network.initial_state()
    if first != expected:
        raise TraceError("trace does not start in the initial state")
    for i in range(1, len(trace.steps)):
        label, state = trace.steps[i]
        prev = trace.steps[i - 1][1]
        if (label, state) not in network.successors(prev):
            raise TraceError(f"step {i} is not a transition of the network")
    if trace.loop_start is not None:
        if not 0 <= trace.loop_start < len(trace.steps) - 1:
            raise TraceError("loop_start out of range")
        if canonical_key(trace.steps[trace.loop_start][1]) != canonical_key(trace.last):
            raise TraceError("lasso does not close")


def path_to(network: Network, keys: list[bytes]) -> Trace:
    """Rebuild a trace from a chain of state keys by re-running successors."""
    state = network.initial_state()
    if canonical_key(state) != keys[0]:
        raise TraceError("key chain does not start at the initial state")
    steps: list[tuple[TransitionLabel | None, NetworkState]] = [(None, state)]
    for k in keys[1:]:
        for label, nxt in network.successors(state):
            if canonical_key(nxt) == k:
                steps.append((label, nxt))
                state = nxt
                break
        else:
            raise TraceError("key chain has no matching transition")
    return Trace(steps)
