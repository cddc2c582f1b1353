"""Partial edge colorings, missing-color bookkeeping, and Kempe exchanges.

Colors are 1-based integers from a palette [1..k]; 0 marks an uncolored edge
(the same sentinel is used in serialized colorings).  Missing sets are kept as
bitmasks (bit c-1 set means color c is present) and maintained incrementally;
`audit` recomputes them from scratch for cross-checking.

Every mutation can be recorded into an exchange log.  Replaying a log from the
empty coloring reproduces the final coloring bit-exactly, which is how
Kempe-equivalence promises are made testable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import ConsistencyError, InputError
from .graph import Multigraph

UNCOLORED = 0

# Exchange log entries (tuples, JSON-friendly):
#   ("assign", edge_id, color)
#   ("flip", anchor_edge_id, alpha, beta)        -- swap the component containing the edge
#   ("flip_outside", alpha, beta, (v, ...))      -- swap all alpha/beta edges outside the set
LogEntry = tuple


def bits(mask: int):
    """Yield 1-based colors present in a bitmask, ascending."""
    c = 1
    while mask:
        if mask & 1:
            yield c
        mask >>= 1
        c += 1


def low_color(mask: int) -> int:
    """Smallest 1-based color in a nonzero bitmask."""
    return (mask & -mask).bit_length()


class PartialColoring:
    """Mutable proper partial edge coloring over palette [1..k]."""

    __slots__ = ("graph", "k", "colors", "present", "at", "log")

    def __init__(self, graph: Multigraph, k: int, log: Optional[list[LogEntry]] = None):
        if k < 1:
            raise InputError(f"palette size must be >= 1, got {k}")
        self.graph = graph
        self.k = k
        self.colors: list[int] = [UNCOLORED] * graph.edge_count
        self.present: list[int] = [0] * graph.vertex_count
        # at[v][c] = the edge at v colored c; dense lookups drive chain walks
        self.at: list[dict[int, int]] = [{} for _ in range(graph.vertex_count)]
        self.log = log

    # -- queries ---------------------------------------------------------

    @property
    def full_mask(self) -> int:
        return (1 << self.k) - 1

    def missing_mask(self, v: int) -> int:
        return self.full_mask & ~self.present[v]

    def missing(self, v: int) -> set[int]:
        return set(bits(self.missing_mask(v)))

    def missing_union(self, vertices: Iterable[int]) -> int:
        out = 0
        for v in vertices:
            out |= self.missing_mask(v)
        return out

    def colored_count(self) -> int:
        return sum(1 for c in self.colors if c != UNCOLORED)

    def uncolored_edges(self) -> list[int]:
        return [e for e, c in enumerate(self.colors) if c == UNCOLORED]

    def edge_at(self, v: int, c: int) -> Optional[int]:
        return self.at[v].get(c)

    def copy(self, log: Optional[list[LogEntry]] = None) -> "PartialColoring":
        out = PartialColoring(self.graph, self.k, log=log)
        out.colors = list(self.colors)
        out.present = list(self.present)
        out.at = [dict(d) for d in self.at]
        return out

    def signature(self) -> tuple[int, ...]:
        """Canonical value identity: the color of every edge in id order."""
        return tuple(self.colors)

    # -- mutation --------------------------------------------------------

    def assign(self, eid: int, color: int) -> None:
        if not (1 <= color <= self.k):
            raise InputError(f"color {color} outside palette [1..{self.k}]")
        if self.colors[eid] != UNCOLORED:
            raise ConsistencyError(f"edge {eid} already colored {self.colors[eid]}")
        u, v = self.graph.ends(eid)
        bit = 1 << (color - 1)
        if (self.present[u] | self.present[v]) & bit:
            raise ConsistencyError(f"color {color} already present at an end of edge {eid}")
        self.colors[eid] = color
        self.present[u] |= bit
        self.present[v] |= bit
        self.at[u][color] = eid
        self.at[v][color] = eid
        if self.log is not None:
            self.log.append(("assign", eid, color))

    def clear(self, eid: int) -> None:
        color = self.colors[eid]
        if color == UNCOLORED:
            return
        u, v = self.graph.ends(eid)
        bit = 1 << (color - 1)
        self.colors[eid] = UNCOLORED
        self.present[u] &= ~bit
        self.present[v] &= ~bit
        del self.at[u][color]
        del self.at[v][color]

    def _bulk_recolor(self, changes: list[tuple[int, int]]) -> None:
        """Recolor several edges atomically (clear all, then set all)."""
        for eid, _ in changes:
            self.clear(eid)
        for eid, color in changes:
            u, v = self.graph.ends(eid)
            bit = 1 << (color - 1)
            self.colors[eid] = color
            self.present[u] |= bit
            self.present[v] |= bit
            self.at[u][color] = eid
            self.at[v][color] = eid

    # -- audit -----------------------------------------------------------

    def audit(self) -> None:
        """Recompute all incremental state from the assignment; raise on drift."""
        present = [0] * self.graph.vertex_count
        at: list[dict[int, int]] = [{} for _ in range(self.graph.vertex_count)]
        for eid, c in enumerate(self.colors):
            if c == UNCOLORED:
                continue
            u, v = self.graph.ends(eid)
            bit = 1 << (c - 1)
            if present[u] & bit or present[v] & bit:
                raise ConsistencyError(f"improper: duplicate color {c} at an end of edge {eid}")
            present[u] |= bit
            present[v] |= bit
            at[u][c] = eid
            at[v][c] = eid
        if present != self.present or at != self.at:
            raise ConsistencyError("incremental missing-color state drifted from assignment")


@dataclass(frozen=True)
class KempeComponent:
    """A maximal path or cycle in the two-color subgraph; the unit of exchange."""

    alpha: int
    beta: int
    edges: tuple[int, ...]
    kind: str  # "path" | "cycle"
    ends: tuple[int, ...]  # the two end vertices for paths (equal for a bare vertex), () for cycles


def kempe_component(phi: PartialColoring, v: int, alpha: int, beta: int) -> KempeComponent:
    """The maximal (alpha,beta)-component containing v; a bare vertex if v has neither color."""
    if alpha == beta:
        raise InputError("kempe component needs two distinct colors")
    for c in (alpha, beta):
        if not (1 <= c <= phi.k):
            raise InputError(f"color {c} outside palette [1..{phi.k}]")

    def walk(start: int, first_color: int) -> tuple[list[int], int, bool]:
        """Follow the chain from `start` taking `first_color` first.

        Returns (edges, last_vertex, closed) where closed means we returned to
        `start` along the other color (the component is a cycle).
        """
        edges: list[int] = []
        here, want = start, first_color
        while True:
            eid = phi.edge_at(here, want)
            if eid is None:
                return edges, here, False
            edges.append(eid)
            here = phi.graph.other_end(eid, here)
            want = beta if want == alpha else alpha
            if here == start:
                return edges, here, True

    fwd, end_f, closed = walk(v, alpha)
    if closed:
        return KempeComponent(alpha, beta, tuple(fwd), "cycle", ())
    bwd, end_b, closed_b = walk(v, beta)
    if closed_b:  # only possible when fwd was empty and the cycle starts with beta
        return KempeComponent(alpha, beta, tuple(bwd), "cycle", ())
    edges = tuple(reversed(bwd)) + tuple(fwd)
    return KempeComponent(alpha, beta, edges, "path", (end_b, end_f))


def component_of_edge(phi: PartialColoring, eid: int, alpha: int, beta: int) -> KempeComponent:
    if phi.colors[eid] not in (alpha, beta):
        raise InputError(f"edge {eid} is not colored {alpha} or {beta}")
    return kempe_component(phi, phi.graph.ends(eid)[0], alpha, beta)


def check_component(phi: PartialColoring, comp: KempeComponent) -> None:
    """Re-validate alternation, maximality, and freshness of a component."""
    a, b = comp.alpha, comp.beta
    for eid in comp.edges:
        if phi.colors[eid] not in (a, b):
            raise ConsistencyError(f"stale component: edge {eid} now colored {phi.colors[eid]}")
    if not comp.edges:
        v = comp.ends[0]
        if phi.edge_at(v, a) is not None or phi.edge_at(v, b) is not None:
            raise ConsistencyError("bare-vertex component but vertex has chain edges")
        return
    # interior vertices carry both colors; path ends miss exactly one of the two
    seen: dict[int, list[int]] = {}
    for eid in comp.edges:
        for v in phi.graph.ends(eid):
            seen.setdefault(v, []).append(eid)
    for v, eids in seen.items():
        if len(eids) > 2:
            raise ConsistencyError(f"vertex {v} has {len(eids)} component edges")
        if len(eids) == 2:
            if {phi.colors[eids[0]], phi.colors[eids[1]]} != {a, b}:
                raise ConsistencyError(f"no alternation at vertex {v}")
    if comp.kind == "path":
        for v in comp.ends:
            if phi.missing_mask(v) & ((1 << (a - 1)) | (1 << (b - 1))) == 0:
                raise ConsistencyError(f"path end {v} misses neither color")
    else:
        if any(len(e) != 2 for e in seen.values()):
            raise ConsistencyError("cycle component with a degree-1 vertex")


def swap_component(phi: PartialColoring, comp: KempeComponent) -> None:
    """Kempe exchange: swap the two colors along the component, in place."""
    check_component(phi, comp)
    other = {comp.alpha: comp.beta, comp.beta: comp.alpha}
    phi._bulk_recolor([(eid, other[phi.colors[eid]]) for eid in comp.edges])
    if comp.edges and phi.log is not None:
        phi.log.append(("flip", comp.edges[0], comp.alpha, comp.beta))


def flip_at(phi: PartialColoring, v: int, alpha: int, beta: int) -> KempeComponent:
    comp = kempe_component(phi, v, alpha, beta)
    swap_component(phi, comp)
    return comp


def swap_outside(phi: PartialColoring, inside: Iterable[int], alpha: int, beta: int) -> None:
    """Exchange alpha/beta on every edge with both ends outside `inside`.

    Requires that neither color appears on the boundary of `inside`, so the
    operation is a disjoint union of full component swaps.
    """
    vset = frozenset(inside)
    pair = (alpha, beta)
    for eid in phi.graph.boundary(vset):
        if phi.colors[eid] in pair:
            raise InputError(
                f"swap_outside refused: boundary edge {eid} carries color {phi.colors[eid]}"
            )
    other = {alpha: beta, beta: alpha}
    changes = []
    for eid, c in enumerate(phi.colors):
        if c in pair:
            u, v = phi.graph.ends(eid)
            if u not in vset and v not in vset:
                changes.append((eid, other[c]))
    phi._bulk_recolor(changes)
    if phi.log is not None:
        phi.log.append(("flip_outside", alpha, beta, tuple(sorted(vset))))


def greedy_partial_color(graph: Multigraph, k: int, log: Optional[list[LogEntry]] = None) -> PartialColoring:
    """Scan edges in id order; color each with the smallest color missing at both ends."""
    phi = PartialColoring(graph, k, log=log)
    for eid in range(graph.edge_count):
        u, v = graph.ends(eid)
        shared = phi.missing_mask(u) & phi.missing_mask(v)
        if shared:
            phi.assign(eid, low_color(shared))
    return phi


@dataclass(frozen=True)
class Violation:
    message: str
    edges: tuple[int, ...]


def validate(phi: PartialColoring, graph: Multigraph) -> Optional[Violation]:
    """Check all coloring invariants; return the first violation or None."""
    if phi.graph is not graph and phi.graph != graph:
        return Violation("coloring belongs to a different graph", ())
    by_vertex_color: dict[tuple[int, int], int] = {}
    for eid, c in enumerate(phi.colors):
        if c == UNCOLORED:
            continue
        if not (1 <= c <= phi.k):
            return Violation(f"edge {eid} colored {c} outside palette", (eid,))
        for v in graph.ends(eid):
            prev = by_vertex_color.get((v, c))
            if prev is not None:
                return Violation(
                    f"color {c} repeated at vertex {v}", tuple(sorted((prev, eid)))
                )
            by_vertex_color[(v, c)] = eid
    try:
        phi.audit()
    except ConsistencyError as exc:
        return Violation(str(exc), ())
    if phi.k >= graph.max_degree + 1:
        for v in range(graph.vertex_count):
            if phi.missing_mask(v) == 0:
                return Violation(f"vertex {v} has empty missing set at k >= maxdeg+1", ())
    return None


def replay_log(graph: Multigraph, k: int, log: list[LogEntry]) -> PartialColoring:
    """Rebuild a coloring by replaying an exchange log from the empty coloring."""
    phi = PartialColoring(graph, k)
    for entry in log:
        kind = entry[0]
        if kind == "assign":
            phi.assign(entry[1], entry[2])
        elif kind == "flip":
            _, eid, alpha, beta = entry
            swap_component(phi, component_of_edge(phi, eid, alpha, beta))
        elif kind == "flip_outside":
            _, alpha, beta, inside = entry
            swap_outside(phi, inside, alpha, beta)
        else:
            raise InputError(f"unknown log entry {kind!r}")
    return phi


# Coloring serialization: one `c <edge_id> <color>` line per edge, 0 = uncolored.

def serialize_coloring(phi: PartialColoring) -> str:
    return "".join(f"c {eid} {c}\n" for eid, c in enumerate(phi.colors))


def parse_coloring(graph: Multigraph, k: int, text: str) -> PartialColoring:
    phi = PartialColoring(graph, k)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if fields[0] != "c" or len(fields) != 3:
            raise InputError(f"line {lineno}: bad coloring record {line!r}")
        eid, c = int(fields[1]), int(fields[2])
        if not (0 <= eid < graph.edge_count):
            raise InputError(f"line {lineno}: edge id {eid} out of range")
        if c != UNCOLORED:
            phi.assign(eid, c)
    return phi
