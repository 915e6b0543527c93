import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icfd.core import InstanceError, is_connected
from icfd.motif import (
    ColoredWeightedGraph,
    GuardExceeded,
    MotifCounters,
    brute_force_motif,
    feasible_color_sets,
    max_colorful_connected,
    motif_table,
)


def graph(vertices, edges, weights, classes):
    return ColoredWeightedGraph.build(vertices, edges, dict(zip(vertices, weights)), classes)


def random_colored_graph(rng, max_v=10, max_k=4, max_w=20, density=None):
    nv = rng.randint(1, max_v)
    vs = [f"x{i}" for i in range(nv)]
    dens = rng.random() if density is None else density
    es = [(vs[i], vs[j]) for i in range(nv) for j in range(i + 1, nv) if rng.random() < dens]
    k = rng.randint(0, max_k)
    if k == 0:
        classes = []
    else:
        labels = [rng.randrange(k) for _ in vs]
        classes = [[v for v, c in zip(vs, labels) if c == i] for i in range(k)]
    return graph(vs, es, [rng.randint(0, max_w) for _ in vs], classes) if k else graph(vs, es, [rng.randint(0, max_w) for _ in vs], [vs])


def check_solution(g, res):
    chosen, weight = res
    assert is_connected(g.adjacency, chosen)
    for c in g.classes:
        assert len(chosen & set(c)) == 1
    assert sum(g.weight[v] for v in chosen) == weight


def test_path_example():
    g = graph(["a", "b", "c"], [("a", "b"), ("b", "c")], [1, 1, 5], [["a", "c"], ["b"]])
    assert max_colorful_connected(g) == (frozenset({"b", "c"}), 6)
    assert brute_force_motif(g) == (frozenset({"b", "c"}), 6)


def test_no_classes():
    g = ColoredWeightedGraph.build(["a"], [], {"a": 3}, [["a"]])
    empty = ColoredWeightedGraph(g.vertices, g.edges, g.weight, ())
    assert max_colorful_connected(empty) == (frozenset(), 0)
    assert brute_force_motif(empty) == (frozenset(), 0)


def test_isolated_pair_infeasible():
    g = graph(["a", "b"], [], [1, 1], [["a"], ["b"]])
    assert max_colorful_connected(g) is None
    assert brute_force_motif(g) is None


def test_single_vertex():
    g = graph(["a"], [], [7], [["a"]])
    assert max_colorful_connected(g) == (frozenset({"a"}), 7)
    assert brute_force_motif(g) == (frozenset({"a"}), 7)


def test_empty_class_infeasible():
    g = graph(["a", "b"], [("a", "b")], [1, 1], [["a", "b"], []])
    assert max_colorful_connected(g) is None
    assert brute_force_motif(g) is None


@pytest.mark.parametrize("classes,msg", [
    ([["a", "b"], ["b"]], "two classes"),
    ([["a"]], "do not cover"),
    ([["a", "b", "z"]], "not a vertex"),
])
def test_malformed_partition(classes, msg):
    with pytest.raises(InstanceError, match=msg):
        graph(["a", "b"], [("a", "b")], [1, 1], classes)


def test_brute_force_guard():
    vs = [f"x{i}" for i in range(12)]
    g = graph(vs, [], [1] * 12, [vs[i::3] for i in range(3)])
    with pytest.raises(GuardExceeded):
        brute_force_motif(g, guard=10)


def test_random_against_enumeration():
    rng = random.Random(7)
    for _ in range(300):
        g = random_colored_graph(rng)
        fast, slow = max_colorful_connected(g), brute_force_motif(g)
        assert (fast is None) == (slow is None)
        if fast is not None:
            assert fast[1] == slow[1]
            check_solution(g, fast)


def test_table_semantics_against_enumeration():
    rng = random.Random(11)
    for _ in range(60):
        g = random_colored_graph(rng, max_v=8, max_k=3)
        adj = g.adjacency
        k = len(g.classes)
        table = motif_table(g)
        for (v, S), value in table.items():
            pools = [g.classes[i] for i in sorted(S)]
            best = None
            for pick in itertools.product(*pools):
                if v in pick and is_connected(adj, pick):
                    w = sum(g.weight[x] for x in pick)
                    best = w if best is None else max(best, w)
            assert value == best, (v, S)
        assert len(table) <= len(g.vertices) * 2**k


def test_counters_within_bounds():
    rng = random.Random(3)
    for _ in range(200):
        g = random_colored_graph(rng)
        ctr = MotifCounters()
        max_colorful_connected(g, ctr)
        nv, k = len(g.vertices), len(g.classes)
        assert ctr.entries <= nv * 2**k
        assert ctr.work <= 3**k * nv**2


def test_feasible_color_sets_matches_solver():
    rng = random.Random(5)
    for _ in range(100):
        g = random_colored_graph(rng, max_v=8, max_k=3)
        idx = {v: i for i, v in enumerate(g.vertices)}
        masks = [0] * len(g.vertices)
        for u, v in g.edges:
            masks[idx[u]] |= 1 << idx[v]
            masks[idx[v]] |= 1 << idx[u]
        classes = [[idx[v] for v in c] for c in g.classes]
        found = feasible_color_sets(masks, classes)
        for s in range(1 << len(classes)):
            sub = ColoredWeightedGraph(g.vertices, g.edges, g.weight,
                                       tuple(g.classes[i] for i in range(len(classes)) if s >> i & 1))
            assert (s in found) == (brute_force_motif(sub) is not None)


def test_json_round_trip():
    g = graph(["a", "b"], [("a", "b")], [2**70, 1], [["a"], ["b"]])
    again = ColoredWeightedGraph.from_dict(g.to_dict())
    assert again == g
    assert max_colorful_connected(again)[1] == 2**70 + 1


@st.composite
def colored_graphs(draw):
    size = draw(st.integers(1, 8))
    k = draw(st.integers(1, min(4, size)))
    vs = [f"x{i}" for i in range(size)]
    pairs = [(vs[i], vs[j]) for i in range(size) for j in range(i + 1, size)]
    edges = [e for e in pairs if draw(st.booleans())]
    labels = draw(st.lists(st.integers(0, k - 1), min_size=size, max_size=size))
    weights = {v: draw(st.integers(0, 20)) for v in vs}
    classes = [[v for v, c in zip(vs, labels) if c == j] for j in range(k)]
    return ColoredWeightedGraph.build(vs, edges, weights, classes)


@settings(max_examples=150, deadline=None)
@given(colored_graphs())
def test_dp_matches_enumeration_property(g):
    got, want = max_colorful_connected(g), brute_force_motif(g)
    assert (got is None) == (want is None)
    if got is not None:
        assert got[1] == want[1] == sum(g.weight[v] for v in got[0])
