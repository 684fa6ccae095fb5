"""Random graph generation for credit network experiments.

Every generator hands back a connected CreditNetwork whose channel
capacities split a fixed collateral pool evenly, so throughput numbers
stay comparable across topologies of different density.  Draws that come
out disconnected are retried with the seed shifted by one; the retry
count is part of the deterministic contract, not a tuning knob.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import networkx as nx

from .fileio import read_graph
from .model import CreditNetwork, make_network

ERDOS_RENYI = "ErdosRenyi"
RANDOM_REGULAR = "RandomRegular"
SCALE_FREE_BA = "ScaleFreeBA"
POWER_LAW_CONFIG = "PowerLawConfig"
SMALL_WORLD = "SmallWorld"
STAR = "Star"
IMPORTED = "Imported"

KINDS = (ERDOS_RENYI, RANDOM_REGULAR, SCALE_FREE_BA, POWER_LAW_CONFIG,
         SMALL_WORLD, STAR, IMPORTED)

# Give up after this many reseeded draws; a spec that keeps producing
# disconnected graphs is almost certainly too sparse to ever connect.
CONNECTIVITY_RETRIES = 100

# Kinds whose edge count may drift from the budget (degree rounding in the
# scale-free generators) must still land within this relative band.
EDGE_BUDGET_SLACK = 0.02

DEFAULT_TOTAL_COLLATERAL = 10_000


@dataclass(frozen=True)
class TopologySpec:
    """Parameters for one topology draw.

    Which fields matter depends on ``kind``: edge_budget drives the
    ErdosRenyi / ScaleFreeBA / PowerLawConfig generators, degree drives
    RandomRegular and SmallWorld, rewire_prob only affects SmallWorld,
    exponent only PowerLawConfig, and graph_path only Imported.
    """

    kind: str
    node_count: int = 0
    edge_budget: int | None = None
    degree: int | None = None
    rewire_prob: float = 0.1
    exponent: float = 2.5
    total_collateral: int | Fraction = DEFAULT_TOTAL_COLLATERAL
    graph_path: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown topology kind {self.kind!r}")


def gen_topology(spec: TopologySpec) -> CreditNetwork:
    """Draw a connected network and spread the collateral pool evenly."""
    if spec.kind == IMPORTED:
        if spec.graph_path is None:
            raise ValueError("imported topology needs a graph_path")
        base = read_graph(Path(spec.graph_path))
        return _with_uniform_capacities(
            base.node_count, base.edges, spec.total_collateral)

    _validate(spec)
    graph = None
    for attempt in range(CONNECTIVITY_RETRIES):
        graph = _realize(spec, spec.seed + attempt)
        if nx.is_connected(graph):
            break
    else:
        raise RuntimeError(
            f"no connected {spec.kind} graph in {CONNECTIVITY_RETRIES} "
            f"attempts from seed {spec.seed}; the requested topology "
            f"is too sparse")
    edges = [tuple(sorted(e)) for e in graph.edges()]
    return _with_uniform_capacities(spec.node_count, edges,
                                    spec.total_collateral)


def _with_uniform_capacities(node_count, edges, total_collateral):
    if not edges:
        raise ValueError("topology has no channels to carry collateral")
    cap = Fraction(total_collateral) / len(edges)
    return make_network(node_count, edges, [cap] * len(edges))


def _validate(spec: TopologySpec) -> None:
    n = spec.node_count
    if n < 2:
        raise ValueError("need at least two nodes")
    if spec.kind in (ERDOS_RENYI, SCALE_FREE_BA, POWER_LAW_CONFIG):
        m = spec.edge_budget
        if m is None or m < n - 1:
            raise ValueError(
                f"{spec.kind} needs an edge budget of at least {n - 1}")
        if m > n * (n - 1) // 2:
            raise ValueError("edge budget exceeds the simple-graph maximum")
    if spec.kind == RANDOM_REGULAR:
        d = spec.degree
        if d is None or d < 1 or d >= n:
            raise ValueError("regular degree must be in [1, node_count)")
        if (n * d) % 2:
            raise ValueError("node_count * degree must be even")
    if spec.kind == SMALL_WORLD:
        d = spec.degree
        if d is None or d < 2 or d % 2 or d >= n:
            raise ValueError(
                "small-world ring degree must be even, >= 2 and < node_count")
        if not 0.0 <= spec.rewire_prob <= 1.0:
            raise ValueError("rewire_prob must lie in [0, 1]")
    if spec.kind == POWER_LAW_CONFIG and spec.exponent <= 2.0:
        # The target mean degree is finite only above exponent 2.
        raise ValueError("power-law exponent must exceed 2")


def _realize(spec: TopologySpec, seed: int) -> nx.Graph:
    n = spec.node_count
    if spec.kind == ERDOS_RENYI:
        return nx.gnm_random_graph(n, spec.edge_budget, seed=seed)
    if spec.kind == RANDOM_REGULAR:
        return nx.random_regular_graph(spec.degree, n, seed=seed)
    if spec.kind == SCALE_FREE_BA:
        return _scale_free(n, spec.edge_budget, seed)
    if spec.kind == POWER_LAW_CONFIG:
        return _power_law(n, spec.edge_budget, spec.exponent, seed)
    if spec.kind == SMALL_WORLD:
        return nx.watts_strogatz_graph(n, spec.degree, spec.rewire_prob,
                                       seed=seed)
    if spec.kind == STAR:
        return nx.star_graph(n - 1)
    raise AssertionError(spec.kind)


def _scale_free(n: int, budget: int, seed: int) -> nx.Graph:
    attach = max(1, round(budget / n))
    produced = (n - attach) * attach
    if abs(produced - budget) > EDGE_BUDGET_SLACK * budget:
        raise ValueError(
            f"preferential attachment can only produce {produced} edges "
            f"here, outside the +-{EDGE_BUDGET_SLACK:.0%} band around "
            f"{budget}")
    return nx.barabasi_albert_graph(n, attach, seed=seed)


def _power_law(n: int, budget: int, exponent: float, seed: int) -> nx.Graph:
    """Heavy-tailed degree sequence realized with exact edge count.

    A plain configuration model loses close to a tenth of its stubs to
    self-loops and parallel edges at these densities, far outside the
    edge band.  Instead the drawn sequence is clamped so its stub total
    is exactly twice the budget, repaired until graphical, laid out by
    Havel-Hakimi, and then shuffled with connectivity-preserving double
    edge swaps so the deterministic layout does not leak structure.
    """
    rng = random.Random(seed)
    mean_degree = 2 * budget / n
    scale = mean_degree * (exponent - 2) / (exponent - 1)
    seq = []
    for _ in range(n):
        draw = scale * (1 - rng.random()) ** (-1 / (exponent - 1))
        seq.append(max(1, min(n - 1, round(draw))))

    order = list(range(n))
    rng.shuffle(order)
    i = 0
    while sum(seq) > 2 * budget:
        j = order[i % n]
        if seq[j] > 1:
            seq[j] -= 1
        i += 1
    i = 0
    while sum(seq) < 2 * budget:
        j = order[i % n]
        if seq[j] < n - 1:
            seq[j] += 1
        i += 1
    while not nx.is_graphical(seq):
        seq[max(range(n), key=seq.__getitem__)] -= 1
        seq[min(range(n), key=seq.__getitem__)] += 1

    graph = nx.havel_hakimi_graph(seq)
    if nx.is_connected(graph):
        nx.connected_double_edge_swap(graph, nswap=2 * budget, seed=seed)
    return graph


def snowball_sample(network: CreditNetwork, target_nodes: int,
                    seed: int) -> CreditNetwork:
    """Cut out a breadth-first neighborhood around a random root.

    Expansion stops the moment the sample holds target_nodes nodes, so
    the result hits the target exactly whenever the root's component is
    large enough; a smaller component is returned whole.  Kept nodes are
    relabeled to 0..k-1 in ascending original order and kept channels
    retain their capacities.
    """
    if not 1 <= target_nodes <= network.node_count:
        raise ValueError("target_nodes must lie in [1, node_count]")
    rng = random.Random(seed)
    root = rng.randrange(network.node_count)
    adj = network.adjacency()

    member = {root}
    queue = [root]
    while queue and len(member) < target_nodes:
        u = queue.pop(0)
        neighbours = sorted(adj[u])
        rng.shuffle(neighbours)
        for v in neighbours:
            if v in member:
                continue
            member.add(v)
            queue.append(v)
            if len(member) == target_nodes:
                break

    relabel = {old: new for new, old in enumerate(sorted(member))}
    edges = []
    caps = []
    for k, (u, v) in enumerate(network.edges):
        if u in member and v in member:
            edges.append((relabel[u], relabel[v]))
            caps.append(network.capacities[k])
    return make_network(len(member), edges, caps)
