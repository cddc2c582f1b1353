"""Graph core: boundaries, density, exact gamma, witnesses, text round trip."""

from __future__ import annotations

from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mgcolor.errors import CapacityError, InputError
from mgcolor.graph import (
    DensityWitness,
    Multigraph,
    density_ceiling,
    gamma_exact,
    gamma_witness,
    parse_graph,
    serialize_graph,
    validate_witness,
)
from mgcolor.oracle import gen

from conftest import k3, petersen, shannon_triangle


def brute_boundary(g: Multigraph, inside: set[int]) -> set[int]:
    return {e for e, (u, v) in enumerate(g.edges) if (u in inside) != (v in inside)}


def test_loops_rejected():
    with pytest.raises(InputError):
        Multigraph.from_edge_list(2, [(1, 1)])


def test_boundary_k3_single_vertex():
    g = k3()
    assert g.boundary({0}) == {0, 2}


def test_boundary_full_set_empty():
    g = petersen()
    assert g.boundary(range(10)) == set()


def test_boundary_sh2_pair():
    # direct enumeration oracle: the four edges meeting vertex 2
    g = shannon_triangle(2)
    expect = {e for e, (u, v) in enumerate(g.edges) if 2 in (u, v)}
    assert g.boundary({0, 1}) == expect
    assert len(g.boundary({0, 1})) == 4


def test_boundary_out_of_range():
    with pytest.raises(InputError):
        k3().boundary({7})


@given(st.integers(2, 8), st.integers(0, 300), st.data())
@settings(max_examples=60, deadline=None)
def test_boundary_complement_symmetry(n, seed, data):
    g = gen(n, seed)
    subset = set(data.draw(st.lists(st.integers(0, n - 1), max_size=n)))
    rest = set(range(n)) - subset
    assert g.boundary(subset) == g.boundary(rest)


def test_density_k3():
    assert density_ceiling(k3(), {0, 1, 2}) == 3


def test_density_sh2():
    assert density_ceiling(shannon_triangle(2), {0, 1, 2}) == 6


def test_density_rejects_even_and_small():
    g = petersen()
    with pytest.raises(InputError):
        density_ceiling(g, {0, 1})
    with pytest.raises(InputError):
        density_ceiling(g, {0})


def test_density_petersen_nine_subsets():
    # independent enumeration: every 9-subset induces 12 edges, ceil(24/8) = 3
    g = petersen()
    for subset in combinations(range(10), 9):
        assert g.induced_edge_count(subset) == 12
        assert density_ceiling(g, subset) == 3


def test_gamma_k2_is_zero():
    assert gamma_exact(Multigraph.from_edge_list(2, [(0, 1)])) == 0


def test_gamma_sh2():
    assert gamma_exact(shannon_triangle(2)) == 6


def test_gamma_petersen():
    assert gamma_exact(petersen()) == 3


def test_gamma_cap():
    g = Multigraph.from_edge_list(20, [(0, 1)])
    with pytest.raises(CapacityError):
        gamma_exact(g)


def brute_gamma(g: Multigraph) -> int:
    best = 0
    for size in range(3, g.vertex_count + 1, 2):
        for subset in combinations(range(g.vertex_count), size):
            m = g.induced_edge_count(subset)
            best = max(best, -((-2 * m) // (size - 1)))
    return best


@given(st.integers(2, 7), st.integers(0, 500))
@settings(max_examples=40, deadline=None)
def test_gamma_matches_bruteforce_and_envelope(n, seed):
    g = gen(n, seed)
    value = gamma_exact(g)
    assert value == brute_gamma(g)
    assert value <= 2 * max(g.max_degree, 1)


def test_witness_validation():
    g = shannon_triangle(2)
    w = DensityWitness(frozenset({0, 1, 2}), 6, 5)
    validate_witness(g, w)
    with pytest.raises(InputError):
        validate_witness(g, DensityWitness(frozenset({0, 1, 2}), 6, 6))
    with pytest.raises(InputError):
        validate_witness(g, DensityWitness(frozenset({0, 1, 2}), 5, 5))
    with pytest.raises(InputError):
        validate_witness(g, DensityWitness(frozenset({0, 1}), 2, 1))


def test_gamma_witness_is_valid():
    g = shannon_triangle(3)
    value, wset = gamma_witness(g)
    assert value == 9
    validate_witness(g, DensityWitness(wset, g.induced_edge_count(wset), value - 1))


def test_parse_serialize_round_trip():
    g = shannon_triangle(2)
    text = serialize_graph(g)
    again = parse_graph(text)
    assert again == g
    assert serialize_graph(again) == text


def test_parse_ignores_comments_and_blanks():
    text = "# a comment\n\np multigraph 3 2\ne 0 1\n# another\ne 1 2\n"
    g = parse_graph(text)
    assert g.vertex_count == 3
    assert g.edges == ((0, 1), (1, 2))


def test_parse_errors():
    with pytest.raises(InputError):
        parse_graph("e 0 1\n")
    with pytest.raises(InputError):
        parse_graph("p multigraph 2 2\ne 0 1\n")
    with pytest.raises(InputError):
        parse_graph("p multigraph 2 1\ne 0 2\n")


@given(st.integers(2, 9), st.integers(0, 400))
@settings(max_examples=60, deadline=None)
def test_round_trip_on_generated(n, seed):
    g = gen(n, seed)
    assert parse_graph(serialize_graph(g)) == g
