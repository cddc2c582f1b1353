"""Ordered trees, closures, and exit/nonexit classification of boundary chains.

An ordered tree lists its edges so that every prefix is itself a tree.  The
closure of a tree under a coloring repeatedly absorbs boundary edges whose
color is missing somewhere in the current tree; its vertex set is independent
of the insertion order, which the test suite checks by permutation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .coloring import UNCOLORED, PartialColoring
from .errors import InputError
from .graph import Multigraph


class OrderedTree:
    """Edge-ordered tree; every prefix of the edge sequence is a tree."""

    __slots__ = ("graph", "edges", "order", "vset", "intro", "intro_edge_index")

    def __init__(self, graph: Multigraph, edges: Iterable[int]):
        self.graph = graph
        self.edges: list[int] = []
        self.order: list[int] = []  # vertices in discovery order
        self.vset: set[int] = set()
        self.intro: dict[int, int] = {}  # vertex -> index in `order`
        self.intro_edge_index: dict[int, int] = {}  # vertex -> index into `edges` of introducing edge
        for eid in edges:
            self.append(eid)

    @staticmethod
    def from_edge(graph: Multigraph, eid: int) -> "OrderedTree":
        return OrderedTree(graph, [eid])

    def append(self, eid: int) -> int:
        """Add the next edge; returns the newly introduced vertex."""
        u, v = self.graph.ends(eid)
        if not self.edges:
            self.edges.append(eid)
            for pos, w in enumerate((u, v)):
                self.order.append(w)
                self.vset.add(w)
                self.intro[w] = pos
                self.intro_edge_index[w] = 0
            return v
        inside_u, inside_v = u in self.vset, v in self.vset
        if inside_u == inside_v:
            raise InputError(f"edge {eid} does not extend the tree by one vertex")
        new = v if inside_u else u
        self.edges.append(eid)
        self.intro[new] = len(self.order)
        self.order.append(new)
        self.vset.add(new)
        self.intro_edge_index[new] = len(self.edges) - 1
        return new

    def __len__(self) -> int:
        return len(self.edges)

    def __contains__(self, v: int) -> bool:
        return v in self.vset

    def copy(self) -> "OrderedTree":
        return OrderedTree(self.graph, self.edges)

    def prefix(self, edge_count: int) -> "OrderedTree":
        if not (1 <= edge_count <= len(self.edges)):
            raise InputError(f"prefix length {edge_count} out of range")
        return OrderedTree(self.graph, self.edges[:edge_count])

    def minus_last(self) -> "OrderedTree":
        return self.prefix(len(self.edges) - 1)

    def last_vertex(self) -> int:
        return self.order[-1]

    def prefix_containing(self, v: int) -> int:
        """Edge count of the minimal prefix containing v."""
        return self.intro_edge_index[v] + 1

    def intro_edge(self, v: int) -> int:
        """The edge whose insertion introduced v."""
        return self.edges[self.intro_edge_index[v]]

    def is_prefix_of(self, other: "OrderedTree") -> bool:
        return len(self.edges) <= len(other.edges) and other.edges[: len(self.edges)] == self.edges

    def boundary(self) -> set[int]:
        return self.graph.boundary(self.vset)

    def path_between(self, a: int, b: int) -> list[int]:
        """Edge ids of the unique tree path from a to b."""
        adj: dict[int, list[tuple[int, int]]] = {v: [] for v in self.vset}
        for eid in self.edges:
            u, v = self.graph.ends(eid)
            adj[u].append((v, eid))
            adj[v].append((u, eid))
        prev: dict[int, tuple[int, int]] = {}
        stack, seen = [a], {a}
        while stack:
            here = stack.pop()
            if here == b:
                break
            for nxt, eid in adj[here]:
                if nxt not in seen:
                    seen.add(nxt)
                    prev[nxt] = (here, eid)
                    stack.append(nxt)
        out: list[int] = []
        here = b
        while here != a:
            here, eid = prev[here]
            out.append(eid)
        out.reverse()
        return out


def tree_missing_mask(phi: PartialColoring, tree: OrderedTree) -> int:
    return phi.missing_union(tree.vset)


def tree_edge_colors(phi: PartialColoring, edge_ids: Iterable[int]) -> set[int]:
    return {phi.colors[e] for e in edge_ids if phi.colors[e] != UNCOLORED}


def is_elementary(phi: PartialColoring, vertices: Iterable[int]) -> bool:
    seen = 0
    for v in vertices:
        m = phi.missing_mask(v)
        if seen & m:
            return False
        seen |= m
    return True


def first_collision(phi: PartialColoring, tree: OrderedTree) -> Optional[tuple[int, int, int]]:
    """First (earlier_vertex, later_vertex, color) sharing a missing color, by discovery order."""
    for j, v in enumerate(tree.order):
        mv = phi.missing_mask(v)
        for i in range(j):
            both = phi.missing_mask(tree.order[i]) & mv
            if both:
                c = (both & -both).bit_length()
                return tree.order[i], v, c
    return None


def is_closed(phi: PartialColoring, tree: OrderedTree) -> bool:
    missing = tree_missing_mask(phi, tree)
    for eid in tree.boundary():
        c = phi.colors[eid]
        if c != UNCOLORED and missing & (1 << (c - 1)):
            return False
    return True


def closure(
    phi: PartialColoring,
    tree: OrderedTree,
    admit: Optional[Callable[[OrderedTree, int], bool]] = None,
    stop: Optional[Callable[[OrderedTree], bool]] = None,
) -> OrderedTree:
    """Maximal guarded extension of `tree` by boundary edges with tree-missing colors.

    `admit(tree_so_far, eid)` can veto candidate edges (used by guarded phase
    growth); `stop(tree_so_far)` ends growth early.  Candidates are absorbed
    smallest edge id first, which fixes a deterministic edge order; the
    resulting vertex set does not depend on that choice.
    """
    out = tree.copy()
    graph = phi.graph
    missing = tree_missing_mask(phi, out)
    while True:
        if stop is not None and stop(out):
            return out
        best = -1
        for v in out.vset:
            for eid in graph.incident[v]:
                c = phi.colors[eid]
                if c == UNCOLORED or not missing & (1 << (c - 1)):
                    continue
                if graph.other_end(eid, v) in out.vset:
                    continue
                if best == -1 or eid < best:
                    if admit is None or admit(out, eid):
                        best = eid
        if best == -1:
            return out
        new = out.append(best)
        missing |= phi.missing_mask(new)


@dataclass(frozen=True)
class ExitReport:
    """Classification of the boundary edges of a tree in two chain colors.

    Exit paths leave the tree and terminate at an outside vertex missing one
    of the two colors; every other boundary chain segment returns to the tree
    and is recorded as a tree path (both ends inside, interior outside).
    """

    alpha: int
    delta: int
    exit_edges: tuple[int, ...]
    nonexit_edges: tuple[int, ...]
    exit_paths: tuple[tuple[int, ...], ...]  # vertex sequences, starting inside the tree
    tree_paths: tuple[tuple[int, ...], ...]  # edge sequences between two tree vertices


def exit_partition(phi: PartialColoring, tree: OrderedTree, alpha: int, delta: int) -> ExitReport:
    if alpha == delta:
        raise InputError("exit partition needs two distinct colors")
    graph = phi.graph
    pair = (alpha, delta)
    boundary = sorted(e for e in tree.boundary() if phi.colors[e] in pair)
    exit_edges: list[int] = []
    nonexit_edges: list[int] = []
    exit_paths: list[tuple[int, ...]] = []
    tree_paths: list[tuple[int, ...]] = []
    handled: set[int] = set()
    for start in boundary:
        if start in handled:
            continue
        handled.add(start)
        u, v = graph.ends(start)
        inside = u if u in tree.vset else v
        here = graph.other_end(start, inside)
        vertices = [inside, here]
        edges = [start]
        want = delta if phi.colors[start] == alpha else alpha
        while here not in tree.vset:
            nxt = phi.edge_at(here, want)
            if nxt is None:
                break
            edges.append(nxt)
            here = graph.other_end(nxt, here)
            vertices.append(here)
            want = delta if want == alpha else alpha
        if here in tree.vset:
            handled.add(edges[-1])
            nonexit_edges.append(start)
            if edges[-1] != start:
                nonexit_edges.append(edges[-1])
            tree_paths.append(tuple(edges))
        else:
            exit_edges.append(start)
            exit_paths.append(tuple(vertices))
    return ExitReport(
        alpha,
        delta,
        tuple(sorted(exit_edges)),
        tuple(sorted(nonexit_edges)),
        tuple(exit_paths),
        tuple(tree_paths),
    )
