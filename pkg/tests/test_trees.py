"""Ordered trees, closures, and exit/nonexit classification."""

from __future__ import annotations

import random

import pytest

from mgcolor.coloring import PartialColoring, UNCOLORED, greedy_partial_color
from mgcolor.errors import InputError
from mgcolor.graph import Multigraph
from mgcolor.oracle import gen
from mgcolor.trees import (
    OrderedTree,
    closure,
    exit_partition,
    first_collision,
    is_closed,
    is_elementary,
)

from conftest import k3


def k3a_coloring():
    """Triangle with the 0-1 edge uncolored, 1-2 colored 1, 2-0 colored 2."""
    g = k3()
    phi = PartialColoring(g, 3)
    phi.assign(1, 1)
    phi.assign(2, 2)
    return g, phi


def test_ordered_tree_prefixes_and_queries():
    g = Multigraph.from_edge_list(4, [(0, 1), (1, 2), (2, 3)])
    t = OrderedTree(g, [0, 1, 2])
    assert t.order == [0, 1, 2, 3]
    assert t.prefix_containing(2) == 2
    assert t.intro_edge(3) == 2
    assert t.minus_last().edges == [0, 1]
    with pytest.raises(InputError):
        OrderedTree(g, [0, 2])  # edge 2 does not touch the prefix


def test_tree_path_between():
    g = Multigraph.from_edge_list(5, [(0, 1), (1, 2), (1, 3), (3, 4)])
    t = OrderedTree(g, [0, 1, 2, 3])
    assert t.path_between(2, 4) == [1, 2, 3]


def test_closure_k3a_absorbs_whole_triangle():
    g, phi = k3a_coloring()
    t = closure(phi, OrderedTree.from_edge(g, 0))
    assert t.vset == {0, 1, 2}
    # edge (1,2) colored 1 is in missing(0) = {1,3}; it joins; (2,0) is a chord then
    assert len(t) == 2


def test_closure_fixpoint():
    g, phi = k3a_coloring()
    t = closure(phi, OrderedTree.from_edge(g, 0))
    again = closure(phi, t)
    assert again.edges == t.edges


def test_closure_is_closed_and_vertexset_order_independent():
    rng = random.Random(1)
    g = gen(9, 1)
    k = g.max_degree + 1
    phi = greedy_partial_color(g, k)
    uncolored = phi.uncolored_edges()
    if not uncolored:
        phi.clear(0)
        uncolored = [0]
    seed = uncolored[0]
    base = closure(phi, OrderedTree.from_edge(g, seed))
    assert is_closed(phi, base)
    for _ in range(100):
        # randomized insertion order: absorb any eligible edge, not the smallest
        t = OrderedTree.from_edge(g, seed)
        while True:
            elig = []
            missing = phi.missing_union(t.vset)
            for v in t.vset:
                for eid in g.incident[v]:
                    c = phi.colors[eid]
                    if c != UNCOLORED and missing & (1 << (c - 1)) and g.other_end(eid, v) not in t.vset:
                        elig.append(eid)
            if not elig:
                break
            t.append(rng.choice(sorted(set(elig))))
        assert t.vset == base.vset


def test_first_collision_and_elementary():
    g, phi = k3a_coloring()
    t = closure(phi, OrderedTree.from_edge(g, 0))
    assert not is_elementary(phi, t.vset)
    a, b, c = first_collision(phi, t)
    assert c == 3  # both ends of the uncolored edge miss color 3
    assert {a, b} == {0, 1}


def test_exit_partition_closed_tree_both_colors_missing():
    # a closed elementary tree with both chain colors missing inside has no
    # boundary edges in those colors at all
    g, phi = k3a_coloring()
    t = closure(phi, OrderedTree.from_edge(g, 0))
    report = exit_partition(phi, t, 3, 1)
    assert report.exit_edges == ()
    assert report.nonexit_edges == ()


def test_exit_partition_pendant_exit():
    # tree = {0,1} via uncolored edge; pendant (1,2) colored 1; far end misses 1
    g = Multigraph.from_edge_list(3, [(0, 1), (1, 2)])
    phi = PartialColoring(g, 2)
    phi.assign(1, 1)
    t = OrderedTree.from_edge(g, 0)
    report = exit_partition(phi, t, 2, 1)
    assert report.exit_edges == (1,)
    assert report.exit_paths == ((1, 2),)


def test_exit_partition_tree_path():
    # chain leaves the tree at 0 and returns at 1: a tree path, both edges nonexit
    g = Multigraph.from_edge_list(4, [(0, 1), (0, 2), (2, 3), (3, 1)])
    phi = PartialColoring(g, 3)
    phi.assign(1, 2)  # (0,2) delta
    phi.assign(2, 1)  # (2,3) alpha
    phi.assign(3, 2)  # (3,1) delta
    t = OrderedTree.from_edge(g, 0)
    report = exit_partition(phi, t, 1, 2)
    assert report.exit_edges == ()
    assert set(report.nonexit_edges) == {1, 3}
    assert report.tree_paths == ((1, 2, 3),)
