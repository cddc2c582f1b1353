"""Loopless multigraph with stable edge ids, boundary queries, and odd-set density.

Edge ids are dense integers assigned at construction and never reused; parallel
edges are distinguished purely by id.  Colorings elsewhere key on edge id.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable

from .errors import CapacityError, InputError

GAMMA_ENUMERATION_CAP = 16


@dataclass(frozen=True)
class Multigraph:
    """Immutable loopless multigraph. Safe to share across threads."""

    vertex_count: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for eid, (u, v) in enumerate(self.edges):
            if u == v:
                raise InputError(f"edge {eid} is a loop at vertex {u}")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise InputError(f"edge {eid} endpoint out of range: ({u}, {v})")

    @staticmethod
    def from_edge_list(n: int, pairs: Iterable[tuple[int, int]]) -> "Multigraph":
        return Multigraph(n, tuple((int(u), int(v)) for u, v in pairs))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def ends(self, eid: int) -> tuple[int, int]:
        return self.edges[eid]

    def other_end(self, eid: int, v: int) -> int:
        u, w = self.edges[eid]
        if v == u:
            return w
        if v == w:
            return u
        raise InputError(f"vertex {v} is not an end of edge {eid}")

    @cached_property
    def incident(self) -> tuple[tuple[int, ...], ...]:
        """incident[v] = ids of edges with v as an end, ascending."""
        out: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for eid, (u, v) in enumerate(self.edges):
            out[u].append(eid)
            out[v].append(eid)
        return tuple(tuple(lst) for lst in out)

    def degree(self, v: int) -> int:
        return len(self.incident[v])

    @cached_property
    def max_degree(self) -> int:
        if self.vertex_count == 0:
            return 0
        return max(self.degree(v) for v in range(self.vertex_count))

    def boundary(self, subset: Iterable[int]) -> set[int]:
        """Edges with exactly one end in `subset`."""
        inside = _checked_vertex_set(self, subset)
        return {
            eid
            for eid, (u, v) in enumerate(self.edges)
            if (u in inside) != (v in inside)
        }

    def induced_edge_count(self, subset: Iterable[int]) -> int:
        inside = _checked_vertex_set(self, subset)
        return sum(1 for u, v in self.edges if u in inside and v in inside)


def _checked_vertex_set(graph: Multigraph, subset: Iterable[int]) -> frozenset[int]:
    out = frozenset(subset)
    for v in out:
        if not (0 <= v < graph.vertex_count):
            raise InputError(f"vertex {v} out of range 0..{graph.vertex_count - 1}")
    return out


def density_ceiling(graph: Multigraph, subset: Iterable[int]) -> int:
    """ceil(2*|E(G[W])| / (|W|-1)) for an odd vertex set W, |W| >= 3."""
    inside = _checked_vertex_set(graph, subset)
    if len(inside) < 3 or len(inside) % 2 == 0:
        raise InputError(f"density needs an odd vertex set of size >= 3, got {len(inside)}")
    m = graph.induced_edge_count(inside)
    return -((-2 * m) // (len(inside) - 1))


def gamma_exact(graph: Multigraph, cap: int = GAMMA_ENUMERATION_CAP) -> int:
    """Max density ceiling over all odd vertex subsets of size >= 3; 0 if none exist."""
    value, _ = gamma_witness(graph, cap=cap)
    return value


def gamma_witness(graph: Multigraph, cap: int = GAMMA_ENUMERATION_CAP) -> tuple[int, frozenset[int] | None]:
    """Like gamma_exact but also returns a subset attaining the maximum."""
    n = graph.vertex_count
    if n > cap:
        raise CapacityError(
            f"gamma enumeration capped at {cap} vertices (graph has {n}); "
            "use witness-based bounds instead"
        )
    best, best_set = 0, None
    for size in range(3, n + 1, 2):
        for subset in combinations(range(n), size):
            inside = frozenset(subset)
            m = graph.induced_edge_count(inside)
            value = -((-2 * m) // (size - 1))
            if value > best:
                best, best_set = value, inside
    return best, best_set


@dataclass(frozen=True)
class DensityWitness:
    """Odd vertex set proving a palette of `palette_size_refuted` colors cannot suffice."""

    witness_vertices: frozenset[int]
    induced_edge_count: int
    palette_size_refuted: int

    def ceiling(self) -> int:
        return -((-2 * self.induced_edge_count) // (len(self.witness_vertices) - 1))


def validate_witness(graph: Multigraph, witness: DensityWitness) -> None:
    """Re-check all witness invariants against the graph; raise InputError on failure."""
    w = witness.witness_vertices
    if len(w) < 3 or len(w) % 2 == 0:
        raise InputError(f"witness set size {len(w)} is not odd >= 3")
    actual = graph.induced_edge_count(w)
    if actual != witness.induced_edge_count:
        raise InputError(
            f"witness edge count {witness.induced_edge_count} != actual {actual}"
        )
    if witness.ceiling() <= witness.palette_size_refuted:
        raise InputError(
            f"witness ceiling {witness.ceiling()} does not refute k={witness.palette_size_refuted}"
        )


# Text format: `p multigraph <n> <m>` header, then one `e <u> <v>` line per edge
# in id order.  `#` comments and blank lines are ignored on input.

def parse_graph(text: str) -> Multigraph:
    n = m = None
    pairs: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if fields[0] == "p":
            if n is not None:
                raise InputError(f"line {lineno}: duplicate header")
            if len(fields) != 4 or fields[1] != "multigraph":
                raise InputError(f"line {lineno}: bad header {line!r}")
            n, m = int(fields[2]), int(fields[3])
        elif fields[0] == "e":
            if n is None:
                raise InputError(f"line {lineno}: edge before header")
            if len(fields) != 3:
                raise InputError(f"line {lineno}: bad edge line {line!r}")
            pairs.append((int(fields[1]), int(fields[2])))
        else:
            raise InputError(f"line {lineno}: unknown record {fields[0]!r}")
    if n is None:
        raise InputError("missing `p multigraph` header")
    if m != len(pairs):
        raise InputError(f"header declares {m} edges, found {len(pairs)}")
    return Multigraph.from_edge_list(n, pairs)


def serialize_graph(graph: Multigraph) -> str:
    lines = [f"p multigraph {graph.vertex_count} {graph.edge_count}"]
    lines.extend(f"e {u} {v}" for u, v in graph.edges)
    return "\n".join(lines) + "\n"
