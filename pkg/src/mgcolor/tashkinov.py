"""Growth of alternating-path trees in stages, levels, and guarded phases.

A growth state wraps an ordered tree rooted at one uncolored edge together
with the structural markers accumulated while growing it:

* base: the closure of the uncolored edge;
* stages: extensions by nonexit paths of the anchor-color/connecting-color
  chains, followed by closure (one connecting color per stage boundary);
* levels: single extending edges of the last connecting color, followed by
  closure;
* phases: extensions seeded by reserved-pair colors, grown by a guarded
  closure and stopped by the reserved-boundary condition.

The lexicographic measure (stages, levels, phases, trunk, branch) orders
states; reductions elsewhere must strictly decrease it.  All predicates are
re-checkable from raw (graph, coloring, state) via `check_state`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .coloring import PartialColoring, UNCOLORED, bits, low_color
from .errors import InputError, LemmaStress
from .graph import DensityWitness, Multigraph, validate_witness
from .trees import (
    ExitReport,
    OrderedTree,
    closure,
    exit_partition,
    first_collision,
    is_closed,
    is_elementary,
    tree_missing_mask,
)


@dataclass
class TashkinovState:
    """Value-semantic snapshot of a grown tree plus its structural markers."""

    tree: OrderedTree
    seed_edge: int
    anchor_color: int
    connecting: list[int] = field(default_factory=list)  # one color per stage boundary
    base_len: int = 0
    stage_lens: list[int] = field(default_factory=list)
    stage_plus_lens: list[int] = field(default_factory=list)  # length after nonexit paths, before closure
    level_lens: list[int] = field(default_factory=list)
    phase_lens: list[int] = field(default_factory=list)
    level_links: list[int] = field(default_factory=list)  # extending edges, one per level
    phase_links: list[int] = field(default_factory=list)  # seed edges, one per phase
    reserved_history: list[dict[int, tuple[int, int]]] = field(default_factory=list)

    def copy(self) -> "TashkinovState":
        return TashkinovState(
            tree=self.tree.copy(),
            seed_edge=self.seed_edge,
            anchor_color=self.anchor_color,
            connecting=list(self.connecting),
            base_len=self.base_len,
            stage_lens=list(self.stage_lens),
            stage_plus_lens=list(self.stage_plus_lens),
            level_lens=list(self.level_lens),
            phase_lens=list(self.phase_lens),
            level_links=list(self.level_links),
            phase_links=list(self.phase_links),
            reserved_history=[dict(m) for m in self.reserved_history],
        )

    # -- marker access ----------------------------------------------------

    @property
    def graph(self) -> Multigraph:
        return self.tree.graph

    def base_tree(self) -> OrderedTree:
        return self.tree.prefix(self.base_len)

    def stage_tree(self, i: int) -> OrderedTree:
        """Stage i tree; stage 0 is the base."""
        if i == 0:
            return self.base_tree()
        return self.tree.prefix(self.stage_lens[i - 1])

    def last_stage_tree(self) -> OrderedTree:
        return self.stage_tree(len(self.stage_lens))

    def level_tree(self, i: int) -> OrderedTree:
        """Level i tree; level 0 is the last stage."""
        if i == 0:
            return self.last_stage_tree()
        return self.tree.prefix(self.level_lens[i - 1])

    def phase_tree(self, i: int) -> OrderedTree:
        """Phase i tree; phase 0 is the last level."""
        if i == 0:
            return self.level_tree(len(self.level_lens))
        return self.tree.prefix(self.phase_lens[i - 1])

    def last_marker_len(self) -> int:
        if self.phase_lens:
            return self.phase_lens[-1]
        if self.level_lens:
            return self.level_lens[-1]
        if self.stage_lens:
            return self.stage_lens[-1]
        return self.base_len

    def marker_tree(self) -> OrderedTree:
        """The last completed structure (final phase in the measure's sense)."""
        return self.tree.prefix(self.last_marker_len())

    def reserved(self) -> dict[int, tuple[int, int]]:
        """Current reservation map (two guarded colors per absent connecting color)."""
        return self.reserved_history[-1] if self.reserved_history else {}

    def link_color(self) -> int:
        """The connecting color of the last stage, used for level growth."""
        return self.connecting[-1]

    def _partial_kind(self, edge_count: int) -> str | None:
        """What kind of structure a cut at `edge_count` leaves unfinished."""
        keep_stages = [n for n in self.stage_lens if n <= edge_count]
        full_stages = len(keep_stages) == len(self.stage_lens)
        keep_levels = [n for n in self.level_lens if n <= edge_count] if full_stages else []
        full_levels = full_stages and len(keep_levels) == len(self.level_lens)
        keep_phases = [n for n in self.phase_lens if n <= edge_count] if full_levels else []
        last = (
            keep_phases[-1]
            if keep_phases
            else (keep_levels[-1] if keep_levels else (keep_stages[-1] if keep_stages else self.base_len))
        )
        if edge_count <= last:
            return None
        if full_levels and any(n > edge_count for n in self.phase_lens):
            return "phase"
        if full_stages and any(n > edge_count for n in self.level_lens):
            return "level"
        if any(n > edge_count for n in self.stage_lens):
            return "stage"
        return "tail"

    def prefix_state(self, edge_count: int) -> "TashkinovState":
        """Trim the state to a prefix of its tree, keeping markers that fit."""
        if edge_count < self.base_len:
            raise InputError("prefix would cut into the base")
        keep_stages = [n for n in self.stage_lens if n <= edge_count]
        full_stages = len(keep_stages) == len(self.stage_lens)
        keep_levels = [n for n in self.level_lens if n <= edge_count] if full_stages else []
        full_levels = full_stages and len(keep_levels) == len(self.level_lens)
        keep_phases = [n for n in self.phase_lens if n <= edge_count] if full_levels else []
        kind = self._partial_kind(edge_count)
        beyond_stages = bool(keep_levels or keep_phases) or kind in ("level", "phase") or (
            kind == "tail" and len(self.connecting) > len(self.stage_lens)
        )
        n_conn = min(len(self.connecting), len(keep_stages) + (1 if beyond_stages else 0))
        n_levels = len(keep_levels) + (1 if kind == "level" else 0)
        n_phases = len(keep_phases) + (1 if kind == "phase" else 0)
        return TashkinovState(
            tree=self.tree.prefix(edge_count),
            seed_edge=self.seed_edge,
            anchor_color=self.anchor_color,
            connecting=list(self.connecting[:n_conn]),
            base_len=self.base_len,
            stage_lens=keep_stages,
            stage_plus_lens=list(self.stage_plus_lens[: len(keep_stages)]),
            level_lens=keep_levels,
            phase_lens=keep_phases,
            level_links=list(self.level_links[: min(n_levels, len(self.level_links))]),
            phase_links=list(self.phase_links[: min(n_phases, len(self.phase_links))]),
            reserved_history=[dict(m) for m in self.reserved_history[: (1 + n_phases) if self.reserved_history else 0]],
        )

    def measure(self) -> tuple[int, int, int, int, int]:
        """Lexicographic size (stages, levels, phases, trunk, branch).

        Trees that extend beyond their last completed marker into a phase (or
        past all markers) count the unfinished structure as one more phase and
        order the excess by trunk/branch lengths.  Exact marker trees and
        mid-stage/mid-level cuts take (.., 0, 0); reductions that land on such
        shapes are compared conservatively by their completed markers alone.
        """
        s = len(self.stage_lens)
        l = len(self.level_lens)
        p = len(self.phase_lens)
        if len(self.tree) == self.last_marker_len():
            return (s, l, p, 0, 0)
        kind = self._partial_kind(len(self.tree))
        if kind in ("phase", "tail"):
            t, b = trunk_branch(self)[2:]
            return (s, l, p + 1, t, b)
        return (s, l, p, 0, 0)


def start_state(phi: PartialColoring, seed_edge: int, anchor_color: int | None = None) -> TashkinovState:
    """Closure of the uncolored seed edge: the base everything grows from."""
    if phi.colors[seed_edge] != UNCOLORED:
        raise InputError(f"seed edge {seed_edge} is already colored")
    u, v = phi.graph.ends(seed_edge)
    anchor = anchor_color
    if anchor is None:
        both = phi.missing_mask(u) | phi.missing_mask(v)
        if not both:
            raise InputError("seed edge has no missing color at either end")
        anchor = low_color(both)
    tree = closure(phi, OrderedTree.from_edge(phi.graph, seed_edge))
    return TashkinovState(tree=tree, seed_edge=seed_edge, anchor_color=anchor, base_len=len(tree))


def find_connecting_color(phi: PartialColoring, state: TashkinovState) -> int | DensityWitness:
    """Smallest color appearing on >= 2 boundary edges, or a density witness.

    When the tree is elementary and closed and no boundary color repeats,
    every color class inside the induced subgraph is a near-perfect matching,
    so the induced edge count exceeds k*(|V|-1)/2 and the vertex set itself
    certifies that k colors cannot suffice.
    """
    counts: dict[int, int] = {}
    for eid in state.tree.boundary():
        c = phi.colors[eid]
        if c != UNCOLORED:
            counts[c] = counts.get(c, 0) + 1
    repeated = sorted(c for c, n in counts.items() if n >= 2)
    if repeated:
        return repeated[0]
    vset = frozenset(state.tree.vset)
    witness = DensityWitness(vset, phi.graph.induced_edge_count(vset), phi.k)
    try:
        validate_witness(phi.graph, witness)
    except InputError as exc:
        raise LemmaStress(
            "closed elementary tree with no repeated boundary color yields no valid witness",
            {"vertices": sorted(vset), "error": str(exc)},
        )
    return witness


def nonexit_extension(
    phi: PartialColoring, tree: OrderedTree, anchor: int, delta: int
) -> tuple[OrderedTree, ExitReport]:
    """Append one nonexit path per tree path of the (anchor, delta) chains.

    Tree paths are attached in order of their attachment vertex's discovery
    index (ties by first edge id); each contributes its edges consecutively
    from the tree outward, dropping the far end vertex.
    """
    report = exit_partition(phi, tree, anchor, delta)
    graph = phi.graph

    def oriented(path: tuple[int, ...]) -> tuple[int, ...]:
        # start each path at the attachment discovered earlier
        u, v = graph.ends(path[0])
        a_first = u if u in tree.vset else v
        u, v = graph.ends(path[-1])
        a_last = u if u in tree.vset else v
        if tree.intro[a_last] < tree.intro[a_first]:
            return tuple(reversed(path))
        return path

    paths = [oriented(p) for p in report.tree_paths]

    def sort_key(path: tuple[int, ...]):
        u, v = graph.ends(path[0])
        attach = u if u in tree.vset else v
        return (tree.intro[attach], path[0])

    out = tree.copy()
    for path in sorted(paths, key=sort_key):
        for eid in path[:-1]:  # last edge would re-enter the tree at the far end
            out.append(eid)
    return out, report


def grow_stage(
    phi: PartialColoring, state: TashkinovState, delta: int
) -> TashkinovState:
    """One stage: nonexit paths for (anchor, delta), then closure.

    Pre: the current tree is elementary and closed and delta repeats on its
    boundary.  The caller is responsible for exit-path uniqueness handling.
    """
    extended, report = nonexit_extension(phi, state.tree, state.anchor_color, delta)
    if len(extended) == len(state.tree):
        raise LemmaStress(
            "stage growth found no tree path for the connecting color",
            {"delta": delta, "exit_paths": len(report.exit_paths)},
        )
    new_tree = closure(phi, extended)
    out = state.copy()
    out.tree = new_tree
    out.connecting = state.connecting + [delta]
    out.stage_lens = state.stage_lens + [len(new_tree)]
    out.stage_plus_lens = state.stage_plus_lens + [len(extended)]
    return out


def find_level_link(phi: PartialColoring, state: TashkinovState) -> int | None:
    """The next extending edge: a boundary edge of the current tree, colored in
    the last connecting color, lying on an (anchor, link)-path of the last
    stage whose traversed prefix sits inside the current tree."""
    anchor, link = state.anchor_color, state.link_color()
    stage = state.last_stage_tree()
    report = exit_partition(phi, stage, anchor, link)
    graph = phi.graph
    cur = state.tree
    candidates: list[int] = []
    for path in report.tree_paths:
        for edge_seq in (path, tuple(reversed(path))):
            inside = True
            for eid in edge_seq:
                u, v = graph.ends(eid)
                if u in cur.vset and v in cur.vset:
                    continue
                # first edge leaving the current tree along this traversal
                if inside and (u in cur.vset) != (v in cur.vset) and phi.colors[eid] == link:
                    candidates.append(eid)
                break
    if not candidates:
        return None
    return min(candidates)


def grow_level(phi: PartialColoring, state: TashkinovState) -> TashkinovState | None:
    """One level: add the next extending edge, then closure. None when exhausted."""
    link_edge = find_level_link(phi, state)
    if link_edge is None:
        return None
    tree = state.tree.copy()
    tree.append(link_edge)
    new_tree = closure(phi, tree)
    out = state.copy()
    out.tree = new_tree
    out.level_lens = state.level_lens + [len(new_tree)]
    out.level_links = state.level_links + [link_edge]
    return out


def reserve_pairs(phi: PartialColoring, state: TashkinovState) -> TashkinovState:
    """Assign the initial reservation: two pool colors per absent connecting color.

    Pool = colors missing in the tree but not at the seed edge's ends; pairs
    are drawn lexicographically and pairwise disjoint.
    """
    if state.reserved_history:
        raise InputError("reservation already initialized")
    tree_missing = tree_missing_mask(phi, state.tree)
    su, sv = phi.graph.ends(state.seed_edge)
    seed_missing = phi.missing_mask(su) | phi.missing_mask(sv)
    pool = sorted(bits(tree_missing & ~seed_missing))
    absent = sorted(set(state.connecting) - set(bits(tree_missing)))
    reserved: dict[int, tuple[int, int]] = {}
    for delta in absent:
        if len(pool) < 2:
            raise LemmaStress(
                "reservation pool too small",
                {"pool": pool, "absent": absent},
            )
        reserved[delta] = (pool[0], pool[1])
        pool = pool[2:]
    out = state.copy()
    out.reserved_history = [reserved]
    return out


def find_phase_seed(phi: PartialColoring, state: TashkinovState) -> tuple[int, int] | None:
    """Next phase seed: smallest boundary edge whose color is reserved for a
    connecting color still absent from the tree. Returns (edge, delta)."""
    tree_missing = tree_missing_mask(phi, state.tree)
    reserved = state.reserved()
    lookup: dict[int, int] = {}
    for delta, pair in reserved.items():
        if tree_missing & (1 << (delta - 1)):
            continue  # no longer absent
        for c in pair:
            lookup[c] = delta
    best: tuple[int, int] | None = None
    for eid in sorted(state.tree.boundary()):
        c = phi.colors[eid]
        if c in lookup:
            best = (eid, lookup[c])
            break
    return best


def _phase_closure(
    phi: PartialColoring,
    tree: OrderedTree,
    reserved: dict[int, 'tuple[int, int]'],
    phase_start_missing: int,
    connecting: list[int],
) -> OrderedTree:
    """Guarded closure: admit edges per the reservation guard, stop when the
    boundary is clean of unreserved tree-missing colors."""
    guard: dict[int, int] = {}
    for delta, pair in reserved.items():
        if phase_start_missing & (1 << (delta - 1)):
            continue
        for c in pair:
            guard[c] = delta

    def admit(cur: OrderedTree, eid: int) -> bool:
        c = phi.colors[eid]
        delta = guard.get(c)
        if delta is None:
            return True
        return bool(tree_missing_mask(phi, cur) & (1 << (delta - 1)))

    def stop(cur: OrderedTree) -> bool:
        missing = tree_missing_mask(phi, cur)
        allowed = 0
        for delta, pair in reserved.items():
            if missing & (1 << (delta - 1)):
                continue
            for c in pair:
                allowed |= 1 << (c - 1)
        blocked = missing & ~allowed
        for eid in cur.boundary():
            c = phi.colors[eid]
            if c != UNCOLORED and blocked & (1 << (c - 1)):
                return False
        return True

    return closure(phi, tree, admit=admit, stop=stop)


def grow_phase(
    phi: PartialColoring, state: TashkinovState, seed: tuple[int, int] | None = None
) -> TashkinovState | None:
    """One phase: adjoin the seed edge, rotate its reservation pair, grow the
    guarded closure until the boundary condition holds. None when no seed."""
    if not state.reserved_history:
        raise InputError("phases need an initialized reservation")
    first_phase = not state.phase_lens
    if first_phase:
        seed_edge = state.phase_links[0] if state.phase_links else None
        if seed_edge is None:
            raise InputError("first phase needs the recorded extending edge as seed")
        reserved = dict(state.reserved())
        delta_used = None
    else:
        found = seed if seed is not None else find_phase_seed(phi, state)
        if found is None:
            return None
        seed_edge, delta_used = found
        prev_phase_start = state.phase_tree(len(state.phase_lens) - 1)
        fresh_vertices = [v for v in state.tree.order if v not in prev_phase_start.vset]
        rotate_pool = phi.missing_union(fresh_vertices) & ~(1 << (state.link_color() - 1))
        if not rotate_pool:
            raise LemmaStress("no fresh rotation color for the reservation", {"delta": delta_used})
        gamma = low_color(rotate_pool)
        reserved = dict(state.reserved())
        old_pair = reserved[delta_used]
        dropped = phi.colors[seed_edge]
        kept = tuple(c for c in old_pair if c != dropped)
        reserved[delta_used] = tuple(sorted(kept + (gamma,)))  # type: ignore[assignment]
        if len(reserved[delta_used]) != 2:
            raise LemmaStress("reservation rotation lost a color", {"pair": old_pair, "seed": seed_edge})
    phase_start_missing = tree_missing_mask(phi, state.tree)
    tree = state.tree.copy()
    tree.append(seed_edge)
    new_tree = _phase_closure(phi, tree, reserved, phase_start_missing, state.connecting)
    # the boundary condition must hold at the end of the phase
    out = state.copy()
    out.tree = new_tree
    out.phase_lens = state.phase_lens + [len(new_tree)]
    if first_phase:
        out.reserved_history = state.reserved_history + [dict(reserved)]
    else:
        out.phase_links = state.phase_links + [seed_edge]
        out.reserved_history = state.reserved_history + [dict(reserved)]
    return out


def trunk_branch(state: TashkinovState) -> tuple[OrderedTree, list[int], int, int]:
    """Split a tree extending beyond its last marker into trunk and branch.

    The branch is the maximal path-shaped suffix of the edge order lying
    outside the marker; the trunk keeps everything else plus the branch's
    attachment vertex.  Returns (trunk, branch_edges, trunk_len, branch_len).
    """
    tree = state.tree
    marker_len = state.last_marker_len()
    if len(tree) <= marker_len:
        raise InputError("tree does not extend beyond its last completed structure")
    graph = state.graph

    def suffix_is_path(start: int) -> bool:
        deg: dict[int, int] = {}
        for eid in tree.edges[start:]:
            for v in graph.ends(eid):
                deg[v] = deg.get(v, 0) + 1
        ends = sum(1 for d in deg.values() if d == 1)
        if any(d > 2 for d in deg.values()):
            return False
        return ends == 2 and len(deg) == len(tree.edges[start:]) + 1

    j = None
    for start in range(marker_len, len(tree)):
        if suffix_is_path(start):
            j = start
            break
    if j is None:
        j = len(tree) - 1  # single last edge is always a path
    branch = tree.edges[j:]
    trunk = tree.prefix(j) if j > 0 else tree.prefix(1)
    return trunk, branch, j, len(tree) - j


def branch_vertices(state: TashkinovState) -> list[int]:
    """Vertices of the branch ordered from the attachment to the tree's last vertex."""
    _, branch, _, _ = trunk_branch(state)
    graph = state.graph
    tree = state.tree
    seq: list[int] = []
    first_u, first_v = graph.ends(branch[0])
    attach = first_u if tree.intro[first_u] < tree.intro[first_v] else first_v
    seq.append(attach)
    here = attach
    for eid in branch:
        here = graph.other_end(eid, here)
        seq.append(here)
    return seq


def b_palette(phi: PartialColoring, state: TashkinovState) -> set[int]:
    """Colors usable for structure-preserving exchanges near the trunk's tip.

    Missing colors of the trunk-minus-tip, excluding the seed edge's missing
    colors, colors used beyond the last stage, reservations of absent
    connecting colors, and connecting colors absent from the final phase.
    """
    trunk, _, _, _ = trunk_branch(state)
    tip = trunk.last_vertex()
    tip_prefix = state.tree.prefix(state.tree.prefix_containing(tip))
    before = tip_prefix.minus_last()
    missing_before = phi.missing_union(before.vset)
    su, sv = phi.graph.ends(state.seed_edge)
    seed_missing = phi.missing_mask(su) | phi.missing_mask(sv)
    used_beyond = 0
    stage_edge_set = set(state.last_stage_tree().edges)
    for eid in tip_prefix.edges:
        if eid not in stage_edge_set:
            c = phi.colors[eid]
            if c != UNCOLORED:
                used_beyond |= 1 << (c - 1)
    reserved_absent = 0
    for delta, pair in state.reserved().items():
        if not missing_before & (1 << (delta - 1)):
            for c in pair:
                reserved_absent |= 1 << (c - 1)
    marker_missing = tree_missing_mask(phi, state.marker_tree())
    connecting_absent = 0
    for delta in state.connecting:
        if not marker_missing & (1 << (delta - 1)):
            connecting_absent |= 1 << (delta - 1)
    mask = missing_before & ~seed_missing & ~used_beyond & ~reserved_absent & ~connecting_absent
    return set(bits(mask))


# -- structural checker ---------------------------------------------------


def check_state(phi: PartialColoring, state: TashkinovState) -> list[str]:
    """Re-verify every structural predicate from raw data; returns violations."""
    problems: list[str] = []
    graph = state.graph
    tree = state.tree

    if tree.edges[0] != state.seed_edge:
        problems.append("tree does not start at the seed edge")
    if phi.colors[state.seed_edge] != UNCOLORED:
        problems.append("seed edge is colored")
    su, sv = graph.ends(state.seed_edge)
    if not (phi.missing_mask(su) | phi.missing_mask(sv)) & (1 << (state.anchor_color - 1)):
        problems.append("anchor color is not missing at the seed edge")

    # base: closure property and closedness
    base = state.base_tree()
    for pos, eid in enumerate(base.edges[1:], start=1):
        c = phi.colors[eid]
        prefix_missing = phi.missing_union(base.order[: pos + 1])
        if c == UNCOLORED or not prefix_missing & (1 << (c - 1)):
            problems.append(f"base edge {eid} violates the closure property")
    if not is_closed(phi, base):
        problems.append("base is not closed")

    # stages
    for i, end in enumerate(state.stage_lens):
        prev = state.stage_tree(i)
        delta = state.connecting[i]
        boundary_hits = sum(1 for e in prev.boundary() if phi.colors[e] == delta)
        if boundary_hits < 2:
            problems.append(f"stage {i + 1}: connecting color {delta} repeats {boundary_hits} times")
        if not is_elementary(phi, prev.vset):
            problems.append(f"stage {i + 1}: previous tree not elementary")
        if not is_closed(phi, prev):
            problems.append(f"stage {i + 1}: previous tree not closed")
        report = exit_partition(phi, prev, state.anchor_color, delta)
        allowed_nonexit = {e for path in report.tree_paths for e in path}
        stage_tree = state.tree.prefix(end)
        segment = stage_tree.edges[len(prev.edges):]
        for pos, eid in enumerate(segment):
            c = phi.colors[eid]
            upto = len(prev.edges) + pos
            prefix_missing = phi.missing_union(stage_tree.order[: upto + 1])
            ok_closure = c != UNCOLORED and bool(prefix_missing & (1 << (c - 1)))
            if not ok_closure and eid not in allowed_nonexit:
                problems.append(f"stage {i + 1}: edge {eid} neither closure nor nonexit-path edge")
        if not is_closed(phi, stage_tree):
            problems.append(f"stage {i + 1}: result not closed")

    # levels
    for i, end in enumerate(state.level_lens):
        prev = state.level_tree(i)
        link_edge = state.level_links[i]
        if phi.colors[link_edge] != state.link_color():
            problems.append(f"level {i + 1}: extending edge not colored with the connecting color")
        u, v = graph.ends(link_edge)
        if (u in prev.vset) == (v in prev.vset):
            problems.append(f"level {i + 1}: extending edge not on the boundary")
        stage = state.last_stage_tree()
        report = exit_partition(phi, stage, state.anchor_color, state.link_color())
        on_path = any(link_edge in path for path in report.tree_paths)
        if not on_path:
            problems.append(f"level {i + 1}: extending edge not on a stage tree path")
        level_tree = state.tree.prefix(end)
        segment = level_tree.edges[len(prev.edges):]
        for pos, eid in enumerate(segment):
            if eid == link_edge:
                continue
            upto = len(prev.edges) + pos
            c = phi.colors[eid]
            prefix_missing = phi.missing_union(level_tree.order[: upto + 1])
            if c == UNCOLORED or not prefix_missing & (1 << (c - 1)):
                problems.append(f"level {i + 1}: edge {eid} violates the closure property")

    # reservation + phases
    if state.reserved_history:
        level0 = state.phase_tree(0)
        pool_missing = tree_missing_mask(phi, level0)
        seed_missing = phi.missing_mask(su) | phi.missing_mask(sv)
        initial = state.reserved_history[0]
        seen: set[int] = set()
        for delta, pair in initial.items():
            if len(set(pair)) != 2:
                problems.append(f"reservation for {delta} is not a pair")
            if set(pair) & seen:
                problems.append("reservation pairs overlap")
            seen |= set(pair)
            for c in pair:
                if not pool_missing & (1 << (c - 1)):
                    problems.append(f"reserved color {c} not missing in the tree")
                if seed_missing & (1 << (c - 1)):
                    problems.append(f"reserved color {c} missing at the seed edge")
        for i, end in enumerate(state.phase_lens):
            prev = state.phase_tree(i)
            reserved = state.reserved_history[min(i + 1, len(state.reserved_history) - 1)]
            phase_tree = state.tree.prefix(end)
            start_missing = tree_missing_mask(phi, prev)
            seed_eid = state.phase_links[i] if i < len(state.phase_links) else None
            segment = phase_tree.edges[len(prev.edges):]
            for pos, eid in enumerate(segment):
                if eid == seed_eid:
                    continue
                upto = len(prev.edges) + pos
                c = phi.colors[eid]
                prefix_missing = phi.missing_union(phase_tree.order[: upto + 1])
                if c == UNCOLORED or not prefix_missing & (1 << (c - 1)):
                    problems.append(f"phase {i + 1}: edge {eid} violates the closure property")
                    continue
                for delta, pair in reserved.items():
                    if c in pair and not start_missing & (1 << (delta - 1)):
                        if not prefix_missing & (1 << (delta - 1)):
                            problems.append(
                                f"phase {i + 1}: reserved color {c} admitted before {delta} went missing"
                            )
            # boundary condition at the end of the phase
            end_missing = tree_missing_mask(phi, phase_tree)
            allowed = 0
            for delta, pair in reserved.items():
                if end_missing & (1 << (delta - 1)):
                    continue
                for c in pair:
                    allowed |= 1 << (c - 1)
            blocked = end_missing & ~allowed
            for eid in phase_tree.boundary():
                c = phi.colors[eid]
                if c != UNCOLORED and blocked & (1 << (c - 1)):
                    problems.append(f"phase {i + 1}: boundary edge {eid} carries unguarded missing color {c}")
                    break
    return problems
