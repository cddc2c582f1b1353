"""Oracles: exact chromatic index, Kempe reachability, deterministic generator."""

from __future__ import annotations

import pytest

from mgcolor.coloring import PartialColoring, greedy_partial_color, validate
from mgcolor.errors import CapacityError
from mgcolor.graph import parse_graph, serialize_graph
from mgcolor.oracle import (
    OracleReport,
    apply_moves,
    chromatic_index_exact,
    gen,
    kempe_reach_search,
)

from conftest import k3, petersen, shannon_triangle


def test_chi_k3():
    assert chromatic_index_exact(k3()) == 3


def test_chi_sh2():
    # cross-checked by the density lower bound (6) plus an explicit 6-coloring
    g = shannon_triangle(2)
    assert chromatic_index_exact(g) == 6
    phi = PartialColoring(g, 6)
    for eid, c in enumerate([1, 2, 3, 4, 5, 6]):
        phi.assign(eid, c)
    assert validate(phi, g) is None


def test_chi_petersen():
    assert chromatic_index_exact(petersen()) == 4


def test_chi_shannon_family():
    for mu in range(1, 5):
        assert chromatic_index_exact(shannon_triangle(mu)) == 3 * mu


def test_chi_cap():
    with pytest.raises(CapacityError):
        chromatic_index_exact(gen(10, 4), cap=10)


def test_gen_range_and_determinism():
    g1 = gen(2, 7)
    assert 0 <= g1.edge_count <= 3
    for n in (3, 6, 9):
        for seed in (0, 1, 42):
            assert gen(n, seed) == gen(n, seed)
    assert gen(6, 1) != gen(6, 2)


def test_gen_round_trip_corpus():
    for n in range(5, 9):
        for seed in range(1, 26):
            g = gen(n, seed)
            assert parse_graph(serialize_graph(g)) == g


def test_reach_search_triangle_missing_pair():
    # K3A: one flip suffices to give the uncolored edge a shared missing color
    g = k3()
    phi = PartialColoring(g, 3)
    phi.assign(1, 1)
    phi.assign(2, 2)

    def colorable(p: PartialColoring) -> bool:
        return bool(p.missing_mask(0) & p.missing_mask(1))

    result = kempe_reach_search(g, phi, colorable, budget=1000)
    assert result.found is not None
    assert len(result.moves) <= 2
    live = phi.copy()
    apply_moves(live, result.moves)
    assert live.signature() == result.found
    assert colorable(live)


def test_reach_search_sh2_insufficient_palette_is_conclusive():
    g = shannon_triangle(2)
    phi = greedy_partial_color(g, 5)
    gaps = phi.uncolored_edges()
    assert gaps  # five colors cannot finish the Shannon triangle

    def colorable(p: PartialColoring) -> bool:
        for eid in gaps:
            u, v = g.ends(eid)
            if p.missing_mask(u) & p.missing_mask(v):
                return True
        return False

    result = kempe_reach_search(g, phi, colorable, budget=200_000)
    assert result.found is None
    assert result.complete  # the whole class was explored: genuinely unreachable


def test_oracle_report_invariants():
    for graph in (k3(), shannon_triangle(2), petersen(), gen(6, 3)):
        report = OracleReport.for_graph(graph)
        assert report.delta <= report.chromatic_index <= report.bound
