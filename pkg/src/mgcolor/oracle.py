"""Independent ground truth for tests: exact chromatic index, exhaustive
Kempe-class search, and the deterministic instance generator.

These are written against the public contracts only; none of the tree-growth
machinery is shared with the engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Optional

from .coloring import (
    KempeComponent,
    PartialColoring,
    UNCOLORED,
    component_of_edge,
    kempe_component,
    low_color,
    swap_component,
)
from .errors import CapacityError, InputError
from .graph import Multigraph, gamma_witness

CHI_EDGE_CAP = 30

_M64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    """One step of the splitmix64 stream; the documented PRNG for `gen`."""
    x = (x + 0x9E3779B97F4A7C15) & _M64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def gen(n: int, seed: int) -> Multigraph:
    """Deterministic multigraph on n vertices.

    For each vertex pair (i, j), i < j in lexicographic order, the edge
    multiplicity is drawn uniformly from {0, 1, 2, 3} as the low two bits of
    splitmix64(key) with key = splitmix64(n * GOLDEN ^ seed) ^ (i << 32 | j).
    Isolated vertices are retained.
    """
    if n < 2:
        raise InputError(f"gen needs n >= 2, got {n}")
    base = _splitmix64((n * 0x9E3779B97F4A7C15) & _M64 ^ (seed & _M64))
    pairs: list[tuple[int, int]] = []
    for i in range(n):
        for j in range(i + 1, n):
            word = _splitmix64(base ^ ((i << 32) | j))
            for _ in range(word & 3):
                pairs.append((i, j))
    return Multigraph.from_edge_list(n, pairs)


def _feasible(graph: Multigraph, k: int) -> Optional[list[int]]:
    """Backtracking search for a proper k-edge-coloring; returns one or None.

    Dynamic most-constrained-edge ordering with a symmetry cap: a new color
    may be opened only if it is the smallest unused one.
    """
    m = graph.edge_count
    if m == 0:
        return []
    full = (1 << k) - 1
    present = [0] * graph.vertex_count
    colors = [0] * m
    uncolored = set(range(m))
    degsum = [graph.degree(u) + graph.degree(v) for u, v in graph.edges]

    def avail(eid: int) -> int:
        u, v = graph.ends(eid)
        return full & ~(present[u] | present[v])

    def solve(max_used: int) -> bool:
        if not uncolored:
            return True
        cap = min(k, max_used + 1)
        best, best_n = -1, k + 2
        for eid in sorted(uncolored):
            n_opts = bin(avail(eid) & ((1 << cap) - 1)).count("1")
            if n_opts == 0:
                return False  # unused colors always fall inside the cap, so this edge is dead
            if n_opts < best_n or (
                n_opts == best_n and (-degsum[eid], eid) < (-degsum[best], best)
            ):
                best, best_n = eid, n_opts
        eid = best
        u, v = graph.ends(eid)
        mask = avail(eid) & ((1 << cap) - 1)
        uncolored.discard(eid)
        while mask:
            c = low_color(mask)
            mask &= mask - 1
            bit = 1 << (c - 1)
            colors[eid] = c
            present[u] |= bit
            present[v] |= bit
            if solve(max(max_used, c)):
                return True
            present[u] &= ~bit
            present[v] &= ~bit
            colors[eid] = 0
        uncolored.add(eid)
        return False

    return list(colors) if solve(0) else None


def chromatic_index_exact(graph: Multigraph, cap: int = CHI_EDGE_CAP) -> int:
    """Exact chromatic index by branch and bound from the density lower bound."""
    if graph.edge_count > cap:
        raise CapacityError(f"chromatic index search capped at {cap} edges")
    if graph.edge_count == 0:
        return 0
    gamma, _ = gamma_witness(graph)
    k = max(graph.max_degree, gamma)
    while _feasible(graph, k) is None:
        k += 1
    return k


@dataclass(frozen=True)
class SearchResult:
    """Outcome of a bounded breadth-first walk of a Kempe equivalence class."""

    found: Optional[tuple[int, ...]]  # matching coloring signature, or None
    moves: tuple[tuple[int, int, int], ...]  # (anchor_edge, alpha, beta) per exchange
    states_seen: int
    complete: bool  # True when the class was fully explored within budget


def _components_of_pair(phi: PartialColoring, alpha: int, beta: int) -> list[int]:
    """One anchor edge id per (alpha,beta)-component with at least one edge."""
    anchors: list[int] = []
    seen: set[int] = set()
    for eid, c in enumerate(phi.colors):
        if c not in (alpha, beta) or eid in seen:
            continue
        comp = component_of_edge(phi, eid, alpha, beta)
        seen.update(comp.edges)
        anchors.append(min(comp.edges))
    return anchors


def kempe_reach_search(
    graph: Multigraph,
    phi0: PartialColoring,
    predicate: Callable[[PartialColoring], bool],
    budget: int = 100_000,
) -> SearchResult:
    """Breadth-first search over Kempe exchanges for a coloring satisfying
    `predicate`.  States are deduplicated by exact signature; `complete` means
    the reachable class was exhausted, so a miss is a proof of unreachability.
    """
    start = phi0.signature()
    if predicate(phi0):
        return SearchResult(start, (), 1, True)
    parent: dict[tuple[int, ...], tuple[tuple[int, ...], tuple[int, int, int]]] = {}
    seen = {start}
    queue = [start]
    head = 0
    while head < len(queue):
        if len(seen) > budget:
            return SearchResult(None, (), len(seen), False)
        sig = queue[head]
        head += 1
        phi = PartialColoring(graph, phi0.k)
        for eid, c in enumerate(sig):
            if c != UNCOLORED:
                phi.assign(eid, c)
        for alpha, beta in combinations(range(1, phi0.k + 1), 2):
            for anchor in _components_of_pair(phi, alpha, beta):
                comp = component_of_edge(phi, anchor, alpha, beta)
                swap_component(phi, comp)
                nxt = phi.signature()
                if nxt not in seen:
                    seen.add(nxt)
                    parent[nxt] = (sig, (anchor, alpha, beta))
                    if predicate(phi):
                        moves: list[tuple[int, int, int]] = []
                        cur = nxt
                        while cur != start:
                            prev, mv = parent[cur]
                            moves.append(mv)
                            cur = prev
                        moves.reverse()
                        return SearchResult(nxt, tuple(moves), len(seen), False)
                    queue.append(nxt)
                swap_component(phi, component_of_edge(phi, anchor, alpha, beta))
    return SearchResult(None, (), len(seen), True)


def apply_moves(phi: PartialColoring, moves: tuple[tuple[int, int, int], ...]) -> None:
    """Replay a move list from `kempe_reach_search` onto a live coloring."""
    for anchor, alpha, beta in moves:
        swap_component(phi, component_of_edge(phi, anchor, alpha, beta))


@dataclass(frozen=True)
class OracleReport:
    """Ground-truth bundle for one instance."""

    chromatic_index: int
    gamma: int
    delta: int
    bound: int
    gamma_attained_by: tuple[int, ...]

    @staticmethod
    def for_graph(graph: Multigraph) -> "OracleReport":
        gamma, wset = gamma_witness(graph)
        chi = chromatic_index_exact(graph)
        delta = graph.max_degree
        report = OracleReport(
            chromatic_index=chi,
            gamma=gamma,
            delta=delta,
            bound=max(delta + 1, gamma),
            gamma_attained_by=tuple(sorted(wset)) if wset else (),
        )
        if not (delta <= chi <= report.bound):
            raise InputError(f"oracle sanity violated: delta={delta} chi={chi} bound={report.bound}")
        return report
