"""Deadlock peeling over the flow/channel bipartite graph.

Each path becomes a flow node attached to its directed channels (an edge
index plus a direction). Single-hop flows guarantee their channel's reverse
direction can always be refilled, so those reverse directions seed a ripple
of known-good directed channels. Processing a channel deletes it from every
flow; flows shrinking to one hop vouch for that hop's reverse, and flows
shrinking to zero vouch for the reverses of everything they initially used.

Peeling every directed channel proves the instance deadlock-free. A stall
proves nothing by itself: the unpeeled edge set is only an upper bound on
the deadlock-prone region (exact answers live in the oracle module).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .model import BACKWARD, FORWARD, CreditNetwork, PathSet

SUCCESS = "Success"
FAILURE = "Failure"

DirectedChannel = tuple[int, int]


def opposite(channel: DirectedChannel) -> DirectedChannel:
    edge, direction = channel
    return (edge, BACKWARD if direction == FORWARD else FORWARD)


@dataclass
class PeelingGraph:
    """Mutable bipartite state: flows on one side, directed channels on the other."""

    edge_count: int
    initial_hops: tuple[tuple[DirectedChannel, ...], ...]
    flow_hops: list[list[DirectedChannel]]
    alive: list[bool]
    channel_flows: dict[DirectedChannel, set[int]]

    def degrees(self) -> dict[int, int]:
        """Current degree of every live flow node."""
        return {i: len(h) for i, h in enumerate(self.flow_hops) if self.alive[i]}

    @property
    def flow_count(self) -> int:
        return sum(self.alive)


@dataclass(frozen=True)
class PeelResult:
    processed: frozenset[DirectedChannel]
    unpeeled_edges: frozenset[int]
    ripple_trace: tuple[tuple[int, int, int], ...]
    outcome: str


def build_peeling_graph(network: CreditNetwork, paths: PathSet) -> PeelingGraph:
    initial = []
    for pi, path in enumerate(paths):
        for edge, _ in path.hops:
            if not 0 <= edge < network.edge_count:
                raise ValueError(f"path {pi}: edge index {edge} out of range")
        initial.append(tuple(path.hops))
    channel_flows: dict[DirectedChannel, set[int]] = {}
    for i, hops in enumerate(initial):
        for channel in hops:
            channel_flows.setdefault(channel, set()).add(i)
    return PeelingGraph(
        edge_count=network.edge_count,
        initial_hops=tuple(initial),
        flow_hops=[list(h) for h in initial],
        alive=[True] * len(initial),
        channel_flows=channel_flows,
    )


def peel(graph: PeelingGraph, seed: int, pairing: bool = False) -> PeelResult:
    """Run the ripple process to exhaustion; the input graph is left untouched.

    Pop order over the ripple is uniform via the seeded generator. With
    `pairing` on, a processed channel whose reverse is already rippling pulls
    that reverse forward to be processed immediately after it.
    """
    rng = random.Random(seed)
    hops = [list(h) for h in graph.flow_hops]
    alive = list(graph.alive)
    channel_flows = {c: set(s) for c, s in graph.channel_flows.items()}
    total = 2 * graph.edge_count
    processed: set[DirectedChannel] = set()
    ripple: set[DirectedChannel] = set()

    def release(channel: DirectedChannel) -> None:
        if channel not in processed and channel not in ripple:
            ripple.add(channel)

    for i, initial in enumerate(graph.initial_hops):
        if alive[i] and len(initial) == 1:
            alive[i] = False
            channel = hops[i][0]
            channel_flows[channel].discard(i)
            hops[i] = []
            release(opposite(channel))

    trace = [(0, len(ripple), total)]
    step = 0
    forced: list[DirectedChannel] = []
    while ripple:
        if forced:
            current = forced.pop()
        else:
            current = rng.choice(sorted(ripple))
        ripple.discard(current)
        processed.add(current)
        step += 1
        for i in sorted(channel_flows.get(current, ())):
            hops[i] = [c for c in hops[i] if c != current]
            degree = len(hops[i])
            if degree == 1:
                release(opposite(hops[i][0]))
            elif degree == 0:
                alive[i] = False
                for channel in graph.initial_hops[i]:
                    release(opposite(channel))
        channel_flows.pop(current, None)
        trace.append((step, len(ripple), total - step))
        if pairing:
            twin = opposite(current)
            if twin in ripple:
                forced.append(twin)

    unpeeled = frozenset(
        e
        for e in range(graph.edge_count)
        if (e, FORWARD) not in processed or (e, BACKWARD) not in processed
    )
    outcome = SUCCESS if len(processed) == total else FAILURE
    return PeelResult(
        processed=frozenset(processed),
        unpeeled_edges=unpeeled,
        ripple_trace=tuple(trace),
        outcome=outcome,
    )


def ripple_trace_csv(result: PeelResult) -> str:
    lines = ["unprocessed_symbols,ripple_size"]
    for _, ripple_size, unprocessed in result.ripple_trace:
        lines.append(f"{unprocessed},{ripple_size}")
    return "\n".join(lines) + "\n"
