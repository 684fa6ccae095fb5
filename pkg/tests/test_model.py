from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from creditnet.model import (
    BACKWARD,
    BOUNDARY,
    CORNER,
    FORWARD,
    INTERIOR,
    FlowVector,
    Path,
    PathSet,
    apply_flow,
    build_routing_system,
    center_state,
    check_feasible,
    classify_state,
    make_flow,
    make_network,
    make_state,
    path_from_nodes,
    path_nodes,
)


def test_canonical_edge_order_and_orientation():
    net = make_network(4, [(3, 1), (0, 2), (1, 0)], [5, 7, 9])
    assert net.edges == ((0, 1), (0, 2), (1, 3))
    assert net.capacities == (Fraction(9), Fraction(7), Fraction(5))


def test_network_rejects_bad_input():
    with pytest.raises(ValueError):
        make_network(3, [(0, 0)], [1])
    with pytest.raises(ValueError):
        make_network(3, [(0, 1), (1, 0)], [1, 1])
    with pytest.raises(ValueError):
        make_network(2, [(0, 5)], [1])
    with pytest.raises(ValueError):
        make_network(2, [(0, 1)], [0])
    with pytest.raises(TypeError):
        make_network(2, [(0, 1)], [0.5])


def test_routing_matrices_match_line_example(line):
    net, paths, routing = line
    assert routing.forward == ((1, 0, 0, 0), (1, 0, 1, 0))
    assert routing.backward == ((0, 1, 0, 1), (0, 1, 0, 0))
    assert routing.delta == ((1, -1, 0, -1), (1, -1, 1, 0))


def test_routing_empty_and_single_hop():
    net = make_network(2, [(0, 1)], [4])
    empty = build_routing_system(net, PathSet(()))
    assert empty.forward == ((0,) * 0,) * 1 or empty.forward == ((),)
    assert empty.path_count == 0
    single = build_routing_system(
        net, PathSet((Path(0, 1, ((0, FORWARD),)),))
    )
    assert single.forward == ((1,),)
    assert single.backward == ((0,),)
    assert single.delta == ((1,),)


def test_routing_rejects_malformed_paths():
    net = make_network(3, [(0, 1), (1, 2)], [1, 1])
    broken = PathSet((Path(0, 2, ((0, FORWARD), (1, BACKWARD))),))
    with pytest.raises(ValueError, match="path 0"):
        build_routing_system(net, broken)
    oob = PathSet((Path(0, 1, ((7, FORWARD),)),))
    with pytest.raises(ValueError, match="out of range"):
        build_routing_system(net, oob)


def test_check_feasible_line_cases(line):
    net, paths, routing = line
    b = make_state(net, [15, 5])
    assert check_feasible(net, routing, b, make_flow([3, 0, 2, 0]))
    # forward row of channel (1,2) is [1,0,1,0]: 6 tokens needed, only 5 held
    assert not check_feasible(net, routing, b, make_flow([6, 0, 0, 0]))
    assert check_feasible(net, routing, b, make_flow([0, 0, 0, 0]))


def test_check_feasible_float_tolerance(line):
    net, paths, routing = line
    b = make_state(net, [15, 5])
    slightly_over = FlowVector((3.0000000001, 0.0, 2.0, 0.0))
    assert check_feasible(net, routing, b, slightly_over)
    assert check_feasible(net, routing, b, FlowVector((3.1, 0.0, 0.0, 0.0)))
    assert not check_feasible(net, routing, b, FlowVector((0.0, 0.0, 5.1, 0.0)))


def test_apply_flow_table_values(line):
    net, paths, routing = line
    b = make_state(net, [15, 5])
    after = apply_flow(net, routing, b, make_flow([3, 0, 2, 0]))
    assert after.balances == (Fraction(12), Fraction(0))
    same = apply_flow(net, routing, b, make_flow([0, 0, 0, 0]))
    assert same.balances == b.balances


def test_apply_flow_circulation_identity(line):
    net, paths, routing = line
    b = make_state(net, [10, 10])
    after = apply_flow(net, routing, b, make_flow([10, 10, 0, 0]))
    assert after.balances == (Fraction(10), Fraction(10))


def test_apply_flow_rejects_infeasible(line):
    net, paths, routing = line
    b = make_state(net, [15, 5])
    with pytest.raises(ValueError, match="channel 1.*forward"):
        apply_flow(net, routing, b, make_flow([6, 0, 0, 0]))


def test_apply_flow_additivity(line):
    net, paths, routing = line
    b = make_state(net, [15, 5])
    f1 = make_flow([2, 1, 0, 0])
    f2 = make_flow([1, 0, 2, 1])
    two_step = apply_flow(net, routing, apply_flow(net, routing, b, f1), f2)
    combined = make_flow([3, 1, 2, 1])
    one_step = apply_flow(net, routing, b, combined)
    assert two_step.balances == one_step.balances


def test_classify_state(line):
    net, paths, routing = line
    assert classify_state(net, make_state(net, [10, 10])).kind == INTERIOR
    assert classify_state(net, make_state(net, [15, 5])).kind == INTERIOR
    corner = classify_state(net, make_state(net, [20, 0]))
    assert corner.kind == CORNER
    assert corner.imbalanced == ((0, BACKWARD), (1, FORWARD))
    boundary = classify_state(net, make_state(net, [20, 5]))
    assert boundary.kind == BOUNDARY
    assert boundary.imbalanced == ((0, BACKWARD),)


def test_classify_symmetry_under_orientation_flip():
    # flipping the stored endpoint convention maps b to C - b; the class and
    # the imbalanced edge set must not change
    net = make_network(3, [(0, 1), (1, 2)], [8, 8])
    b = make_state(net, [0, 3])
    flipped = make_state(net, [8, 5])
    assert classify_state(net, b).kind == classify_state(net, flipped).kind
    assert {e for e, _ in classify_state(net, b).imbalanced} == {
        e for e, _ in classify_state(net, flipped).imbalanced
    }


def test_center_state(line):
    net, _, _ = line
    assert center_state(net).balances == (Fraction(10), Fraction(10))


def test_path_node_round_trip(line):
    net, paths, routing = line
    for p in paths:
        nodes = path_nodes(net, p)
        assert path_from_nodes(net, nodes) == p


@st.composite
def small_instance(draw):
    n = draw(st.integers(min_value=3, max_value=6))
    # spanning tree first so every graph is connected
    edges = set()
    for v in range(1, n):
        u = draw(st.integers(min_value=0, max_value=v - 1))
        edges.add((u, v))
    extra = draw(st.integers(min_value=0, max_value=3))
    for _ in range(extra):
        u = draw(st.integers(min_value=0, max_value=n - 2))
        v = draw(st.integers(min_value=u + 1, max_value=n - 1))
        edges.add((u, v))
    caps = [draw(st.integers(min_value=2, max_value=12)) for _ in edges]
    net = make_network(n, sorted(edges), caps)

    adj = net.adjacency()
    paths = []
    for _ in range(draw(st.integers(min_value=1, max_value=4))):
        start = draw(st.integers(min_value=0, max_value=n - 1))
        walk = [start]
        used = set()
        steps = draw(st.integers(min_value=1, max_value=3))
        for _ in range(steps):
            options = [
                w
                for w in adj[walk[-1]]
                if net.edge_between(walk[-1], w)[0] not in used
            ]
            if not options:
                break
            nxt = draw(st.sampled_from(sorted(options)))
            used.add(net.edge_between(walk[-1], nxt)[0])
            walk.append(nxt)
        if len(walk) >= 2:
            paths.append(path_from_nodes(net, walk))
    if not paths:
        u, v = net.edges[0]
        paths = [path_from_nodes(net, [u, v])]
    pathset = PathSet(tuple(paths))
    routing = build_routing_system(net, pathset)

    balances = [
        Fraction(draw(st.integers(min_value=0, max_value=int(c))))
        for c in net.capacities
    ]
    b = make_state(net, balances)
    return net, pathset, routing, b


@given(small_instance(), st.data())
@settings(max_examples=60, deadline=None)
def test_apply_flow_stays_in_polytope(instance, data):
    net, pathset, routing, b = instance
    amounts = [
        Fraction(data.draw(st.integers(min_value=0, max_value=3)))
        for _ in range(len(pathset))
    ]
    f = FlowVector(tuple(amounts))
    if check_feasible(net, routing, b, f):
        after = apply_flow(net, routing, b, f)
        for k, bal in enumerate(after.balances):
            assert 0 <= bal <= net.capacities[k]


@given(small_instance())
@settings(max_examples=40, deadline=None)
def test_zero_flow_is_identity(instance):
    net, pathset, routing, b = instance
    zero = make_flow([0] * len(pathset))
    assert check_feasible(net, routing, b, zero)
    assert apply_flow(net, routing, b, zero).balances == b.balances
