"""Shared fixtures: named small instances and the deterministic corpus."""

from __future__ import annotations

import pytest

from mgcolor.graph import Multigraph
from mgcolor.oracle import gen


def shannon_triangle(mu: int) -> Multigraph:
    """Three vertices, every pair joined by mu parallel edges."""
    pairs = []
    for u, v in ((0, 1), (0, 2), (1, 2)):
        pairs.extend([(u, v)] * mu)
    return Multigraph.from_edge_list(3, pairs)


def petersen() -> Multigraph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    return Multigraph.from_edge_list(10, outer + inner + spokes)


def k3() -> Multigraph:
    return Multigraph.from_edge_list(3, [(0, 1), (1, 2), (2, 0)])


def corpus_instances(limit: int = 200, max_edges: int = 30) -> list[tuple[int, int, Multigraph]]:
    """First `limit` generated instances with at most `max_edges` edges,
    scanning n = 5..10 and seeds 1..200 in lexicographic order."""
    out = []
    for n in range(5, 11):
        for seed in range(1, 201):
            g = gen(n, seed)
            if g.edge_count <= max_edges:
                out.append((n, seed, g))
                if len(out) >= limit:
                    return out
    return out


@pytest.fixture(scope="session")
def sh2() -> Multigraph:
    return shannon_triangle(2)


@pytest.fixture(scope="session")
def petersen_graph() -> Multigraph:
    return petersen()


@pytest.fixture(scope="session")
def triangle() -> Multigraph:
    return k3()


@pytest.fixture(scope="session")
def small_corpus() -> list[tuple[int, int, Multigraph]]:
    return corpus_instances(limit=40)
