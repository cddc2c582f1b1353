"""Structure-preserving exchange procedures.

Each procedure either certifies a preservation/uniqueness property or hands
back a strictly smaller non-elementary tree together with a Kempe-equivalent
coloring.  The preservation side is always established by direct recomputation
(never trusted from control flow); the reduction side follows the constructive
shrinking arguments, validating its own postconditions and raising LemmaStress
on any configuration the case analysis rules out.

Procedures mutate the coloring they are handed (all mutations are logged Kempe
exchanges), so the caller must treat the coloring as updated after every call.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

from .coloring import (
    KempeComponent,
    PartialColoring,
    UNCOLORED,
    component_of_edge,
    kempe_component,
    low_color,
    swap_component,
    swap_outside,
)
from .errors import InputError, LemmaStress
from .graph import Multigraph
from .tashkinov import TashkinovState, nonexit_extension
from .trees import (
    OrderedTree,
    closure,
    exit_partition,
    is_closed,
    is_elementary,
    tree_missing_mask,
)


@dataclass
class LemmaOutcome:
    kind: str  # "preserved" | "reduced"
    state: Optional[TashkinovState] = None  # reduced payload
    details: dict = field(default_factory=dict)

    @property
    def reduced(self) -> bool:
        return self.kind == "reduced"


def _preserved(**details) -> LemmaOutcome:
    return LemmaOutcome("preserved", details=details)


def _reduced(phi: PartialColoring, state: TashkinovState, **details) -> LemmaOutcome:
    if is_elementary(phi, state.tree.vset):
        raise LemmaStress(
            "reduction produced an elementary tree",
            {"tree_edges": list(state.tree.edges), **details},
        )
    return LemmaOutcome("reduced", state=state, details=details)


def nonexit_set(phi: PartialColoring, tree: OrderedTree, alpha: int, delta: int) -> frozenset[int]:
    return frozenset(exit_partition(phi, tree, alpha, delta).nonexit_edges)


def chain_ends(phi: PartialColoring, v: int, a: int, b: int) -> tuple[int, ...]:
    comp = kempe_component(phi, v, a, b)
    return comp.ends


def _mask(color: int) -> int:
    return 1 << (color - 1)


def _stage_layer(state: TashkinovState, v: int) -> int:
    """Smallest stage index whose tree contains v (0 = base)."""
    for j in range(len(state.stage_lens) + 1):
        if v in state.stage_tree(j).vset:
            return j
    raise InputError(f"vertex {v} not in the tree")


def _stage_state(template: TashkinovState, tree: OrderedTree, stages: int, plus_len: int) -> TashkinovState:
    """Package a closure-extended tree as a stage-marked state with `stages` stages."""
    out = template.copy()
    out.tree = tree
    if stages == 0:
        out.base_len = len(tree)
        out.stage_lens = []
        out.stage_plus_lens = []
        out.connecting = []
    else:
        out.stage_lens = template.stage_lens[: stages - 1] + [len(tree)]
        out.stage_plus_lens = template.stage_plus_lens[: stages - 1] + [plus_len]
        out.connecting = template.connecting[:stages]
    out.level_lens = []
    out.level_links = []
    out.phase_lens = []
    out.phase_links = []
    out.reserved_history = []
    return out


def stage_exit_uniqueness(
    phi: PartialColoring, state: TashkinovState, alpha: int, delta: int, budget: Optional[int] = None
) -> LemmaOutcome:
    """At most one exit path leaves a stage tree in the colors (alpha, delta),
    or an iterative shrink yields a smaller-stage non-elementary tree.

    Pre: alpha is missing in the tree.  The state's markers must describe a
    pure stage tree (no levels or phases).
    """
    if not tree_missing_mask(phi, state.tree) & _mask(alpha):
        raise InputError("exit uniqueness needs the first color missing in the tree")
    budget = budget or state.graph.vertex_count + 2
    cur = state
    a, d = alpha, delta
    for _ in range(budget):
        tree = cur.tree
        if not is_elementary(phi, tree.vset):
            return _reduced(phi, cur, reason="input tree already non-elementary")
        report = exit_partition(phi, tree, a, d)
        if len(report.exit_paths) <= 1:
            return _preserved(exit_paths=report.exit_paths, alpha=a, delta=d)
        # two exit paths: order so the second attaches no later than the first
        paths = sorted(report.exit_paths, key=lambda p: tree.intro[p[0]], reverse=True)
        px, py = paths[0], paths[1]
        x, y = px[0], py[0]
        j = _stage_layer(cur, x)
        beta = low_color(phi.missing_mask(x))
        swap_outside(phi, tree.vset, a, beta)
        # the first exit path is now a full (beta, d)-chain; flip it
        exit_edge = phi.edge_at(x, d)
        if exit_edge is None:
            raise LemmaStress("exit edge vanished after outside swap", {"x": x})
        comp = component_of_edge(phi, exit_edge, beta, d)
        if x not in {*comp.ends}:
            raise LemmaStress("exit chain does not end at its attachment", {"x": x})
        swap_component(phi, comp)
        # rebuild the enclosing stage tree around x
        tx_len = tree.prefix_containing(x)
        if j == 0:
            star_len = tx_len
        else:
            star_len = max(tx_len, cur.stage_plus_lens[j - 1])
        star = tree.prefix(star_len)
        grown = closure(phi, star)
        cur = _stage_state(cur, grown, j, star_len)
        if not is_elementary(phi, grown.vset):
            return _reduced(phi, cur, reason="shrunk stage tree became non-elementary")
        x_star, y_star = px[-1], py[-1]
        if x_star in grown.vset or y_star in grown.vset:
            # the far ends landed inside: the case analysis forces a collision
            raise LemmaStress(
                "exit path end absorbed into an elementary tree",
                {"x_star": x_star, "y_star": y_star},
            )
        a, d = d, beta
    raise LemmaStress("exit uniqueness loop exceeded its budget", {})


def nonexit_preservation(
    phi: PartialColoring,
    state: TashkinovState,
    chain: KempeComponent,
    alpha1: int,
    alpha2: int,
    inside: frozenset[int],
) -> LemmaOutcome:
    """Swapping a chain that barely touches an enclosing elementary tree keeps
    the stage tree's nonexit edges unchanged, or a smaller-stage reduction exists.

    `inside` is the vertex set of the enclosing tree (the stage tree or any
    elementary supertree satisfying the hypothesis list).
    """
    graph = state.graph
    tree = state.last_stage_tree()
    anchor, link = state.anchor_color, state.link_color()
    su, sv = graph.ends(state.seed_edge)
    seed_missing = phi.missing_mask(su) | phi.missing_mask(sv)
    boundary_colors = {phi.colors[e] for e in graph.boundary(inside)} - {UNCOLORED}
    # hypothesis checks, each named
    if not tree.vset <= inside:
        raise InputError("enclosing set must contain the stage tree")
    if not is_elementary(phi, inside):
        raise InputError("enclosing tree must be elementary")
    if any(c in boundary_colors for c in (anchor,)) or (seed_missing and any(
        (seed_missing & _mask(c)) and c in boundary_colors for c in range(1, phi.k + 1)
    )):
        raise InputError("seed-missing colors may not cross the enclosing boundary")
    if not phi.missing_union(inside) & _mask(alpha1) or alpha1 == anchor or alpha1 in boundary_colors:
        raise InputError("first chain color must be missing inside, not the anchor, not on the boundary")
    if phi.missing_union(inside) & _mask(alpha2) and alpha2 in boundary_colors:
        raise InputError("second chain color crosses the boundary while missing inside")
    touched = sum(1 for v in _component_vertices(graph, chain) if v in inside)
    if touched > 1:
        raise InputError("chain touches the enclosing tree in more than one vertex")
    if chain.kind == "path" and any(e in tree.vset for e in chain.ends):
        raise InputError("chain ends must avoid the stage tree")

    def preserved_now() -> bool:
        before = nonexit_set(phi, tree, anchor, link)
        swap_component(phi, chain)
        after = nonexit_set(phi, tree, anchor, link)
        swap_component(phi, _refresh(phi, chain))
        return before == after

    if preserved_now():
        return _preserved(checked="direct nonexit comparison")
    # normalization: rename the first chain color into the seed-missing palette
    a1 = alpha1
    if a1 == link:
        raise LemmaStress("nonexit preservation failed although the chain color is the link color", {})
    if not seed_missing & _mask(a1):
        fresh = seed_missing & ~_mask(anchor)
        if not fresh:
            raise LemmaStress("no seed-missing color available for renaming", {})
        a = low_color(fresh)
        swap_outside(phi, inside, a1, a)
        a1 = a
        if preserved_now():
            return _preserved(checked="after renaming", alpha1=a1)
    if alpha2 not in (anchor, link):
        raise LemmaStress(
            "nonexit preservation failed although the second color is neutral",
            {"alpha2": alpha2},
        )
    return _shrink_via_tree_walk(phi, state, _refresh(phi, chain), a1, alpha2)


def _component_vertices(graph: Multigraph, comp: KempeComponent) -> set[int]:
    out: set[int] = set()
    for eid in comp.edges:
        out.update(graph.ends(eid))
    if not comp.edges:
        out.update(comp.ends)
    return out


def _refresh(phi: PartialColoring, comp: KempeComponent) -> KempeComponent:
    """Re-extract a component from any of its current edges (colors may have swapped)."""
    if not comp.edges:
        return comp
    return component_of_edge(phi, comp.edges[0], comp.alpha, comp.beta)


def _shrink_via_tree_walk(
    phi: PartialColoring,
    state: TashkinovState,
    chain: KempeComponent,
    alpha1: int,
    alpha2: int,
) -> LemmaOutcome:
    """The iterative stage-rebuilding walk used when a chain swap moves the
    unique exit path: grows successive stage trees around the old and new exit
    attachments until a collision appears."""
    graph = state.graph
    anchor, link = state.anchor_color, state.link_color()
    tree = state.last_stage_tree()
    stage_state = state.prefix_state(len(tree))

    out = stage_exit_uniqueness(phi, stage_state, anchor, link)
    if out.reduced:
        return out
    exits_before = out.details["exit_paths"]
    swap_component(phi, chain)
    out_after = stage_exit_uniqueness(phi, stage_state, anchor, link)
    if out_after.reduced:
        return out_after
    exits_after = out_after.details["exit_paths"]
    if not exits_before or not exits_after:
        raise LemmaStress("nonexit sets differ but an exit path is absent", {})
    px, pw = exits_before[0], exits_after[0]
    x, w = px[0], pw[0]
    if x == w:
        raise LemmaStress("nonexit sets differ but the exit attachment is unchanged", {})
    if tree.intro[w] > tree.intro[x]:
        # symmetric setup: continue under the swapped coloring with roles exchanged
        x, w = w, x
        px, pw = pw, px
    else:
        swap_component(phi, _refresh(phi, chain))  # work under the original coloring

    j_layer = _stage_layer(state, x)  # x in stage j_layer (0 = base)
    # iterative construction: walk stage trees around x until a collision shows
    t_i = state.stage_tree(min(j_layer, len(state.stage_lens)))
    cur_state = state.prefix_state(len(t_i))
    beta_prev = link
    gamma_prev = anchor
    p_cur = px
    x_cur = x
    budget = graph.vertex_count + 2
    for _ in range(budget):
        if not is_elementary(phi, cur_state.tree.vset):
            return _reduced(phi, cur_state, reason="tree walk reached a collision")
        beta = low_color(phi.missing_mask(x_cur))
        pool = tree_missing_mask(phi, cur_state.tree.prefix(cur_state.tree.prefix_containing(x_cur)))
        pool &= ~(_mask(gamma_prev) | _mask(alpha1) | _mask(alpha2) | _mask(beta))
        if not pool:
            raise LemmaStress("no spare color for the tree walk", {})
        gamma = low_color(pool)
        swap_outside(phi, cur_state.tree.vset, beta, gamma_prev)
        exit_edge = phi.edge_at(x_cur, beta_prev)
        if exit_edge is None:
            raise LemmaStress("walk lost its exit edge", {"x": x_cur})
        comp = component_of_edge(phi, exit_edge, beta, beta_prev)
        swap_component(phi, comp)
        ends = [v for v in comp.ends if v != x_cur]
        far = ends[0] if ends else x_cur
        grown = closure(phi, cur_state.tree)
        cur_state = _stage_state(cur_state, grown, len(cur_state.stage_lens), len(cur_state.tree))
        if not is_elementary(phi, grown.vset):
            return _reduced(phi, cur_state, reason="tree walk collision")
        if far in grown.vset:
            raise LemmaStress("walk end absorbed without collision", {"far": far})
        beta_prev, gamma_prev = beta, gamma
        x_cur = x_cur  # attachment unchanged until the next exit recomputation
        report = exit_partition(phi, grown, anchor, link)
        if len(report.exit_paths) > 1:
            inner = stage_exit_uniqueness(phi, cur_state, anchor, link)
            if inner.reduced:
                return inner
        if not report.exit_paths:
            raise LemmaStress("walk ran out of exit paths without a collision", {})
        p_cur = report.exit_paths[0]
        x_cur = p_cur[0]
    raise LemmaStress("tree walk exceeded its budget", {})


def nmq_exit_uniqueness(
    phi: PartialColoring, state: TashkinovState, alpha: int, delta: int, budget: Optional[int] = None
) -> LemmaOutcome:
    """Exit-path uniqueness for trees with levels and phases.

    Pre: alpha is missing in the tree, differs from the anchor color, and does
    not appear on the tree boundary.
    """
    tree = state.tree
    graph = state.graph
    if alpha == state.anchor_color:
        raise InputError("alpha must differ from the anchor color")
    if not tree_missing_mask(phi, tree) & _mask(alpha):
        raise InputError("alpha must be missing in the tree")
    if any(phi.colors[e] == alpha for e in tree.boundary()):
        raise InputError("alpha appears on the tree boundary")
    if not is_elementary(phi, tree.vset):
        return _reduced(phi, state, reason="input tree already non-elementary")
    if not state.level_lens and not state.phase_lens:
        return stage_exit_uniqueness(phi, state, alpha, delta, budget=budget)

    su, sv = graph.ends(state.seed_edge)
    seed_missing = phi.missing_mask(su) | phi.missing_mask(sv)
    a = alpha
    if not seed_missing & _mask(a) or a == state.anchor_color:
        fresh = seed_missing & ~_mask(state.anchor_color)
        if not fresh:
            raise LemmaStress("no seed-missing replacement color", {})
        a_star = low_color(fresh)
        if a_star != a:
            swap_outside(phi, tree.vset, a, a_star)
            a = a_star

    budget = budget or graph.vertex_count + 2
    cur = state
    d = delta
    for _ in range(budget):
        if not is_elementary(phi, cur.tree.vset):
            return _reduced(phi, cur, reason="tree became non-elementary during shrink")
        report = exit_partition(phi, cur.tree, a, d)
        if len(report.exit_paths) <= 1:
            return _preserved(exit_paths=report.exit_paths, alpha=a, delta=d)
        paths = sorted(report.exit_paths, key=lambda p: cur.tree.intro[p[0]], reverse=True)
        px, py = paths[0], paths[1]
        x = px[0]
        stage = cur.last_stage_tree()
        if x in stage.vset:
            return stage_exit_uniqueness(phi, cur.prefix_state(len(stage)), a, d)
        marker_len = _largest_marker_without(cur, x)
        beta = low_color(phi.missing_mask(x))
        swap_outside(phi, cur.tree.vset, a, beta)
        exit_edge = phi.edge_at(x, d)
        if exit_edge is None:
            raise LemmaStress("exit edge vanished after outside swap", {"x": x})
        swap_component(phi, component_of_edge(phi, exit_edge, beta, d))
        tx_len = cur.tree.prefix_containing(x)
        base_marker = cur.prefix_state(marker_len)
        grown = _strict_guarded_extension(phi, cur, cur.tree.prefix(tx_len), base_marker)
        nxt = _phaseless_extension_state(cur, grown, marker_len)
        cur = nxt
        if not is_elementary(phi, grown.vset):
            return _reduced(phi, cur, reason="guarded extension reached a collision")
        x_star, y_star = px[-1], py[-1]
        if x_star in grown.vset or y_star in grown.vset:
            raise LemmaStress("exit path end absorbed into an elementary tree", {})
        a, d = d, beta
    raise LemmaStress("exit uniqueness loop exceeded its budget", {})


def _largest_marker_without(state: TashkinovState, v: int) -> int:
    """Length of the largest structural marker tree not containing v."""
    lens = [state.base_len, *state.stage_lens, *state.level_lens, *state.phase_lens]
    best = state.base_len
    tree = state.tree
    for n in lens:
        if v not in tree.prefix(n).vset:
            best = max(best, n)
    return best


def _strict_guarded_extension(
    phi: PartialColoring,
    state: TashkinovState,
    start: OrderedTree,
    marker_state: TashkinovState,
) -> OrderedTree:
    """Extension with the reservation guard whose stop condition also forbids
    reserved colors on the boundary."""
    reserved = marker_state.reserved()
    marker_missing = tree_missing_mask(phi, marker_state.tree)
    guard: dict[int, int] = {}
    reserved_mask = 0
    for dcol, pair in reserved.items():
        if marker_missing & _mask(dcol):
            continue
        for c in pair:
            guard[c] = dcol
            reserved_mask |= _mask(c)

    def admit(cur: OrderedTree, eid: int) -> bool:
        c = phi.colors[eid]
        dcol = guard.get(c)
        if dcol is None:
            return True
        return bool(tree_missing_mask(phi, cur) & _mask(dcol))

    def stop(cur: OrderedTree) -> bool:
        missing = tree_missing_mask(phi, cur)
        blocked = missing | reserved_mask
        for eid in cur.boundary():
            c = phi.colors[eid]
            if c != UNCOLORED and blocked & _mask(c):
                return False
        return True

    return closure(phi, start, admit=admit, stop=stop)


def _phaseless_extension_state(
    template: TashkinovState, tree: OrderedTree, marker_len: int
) -> TashkinovState:
    """Package a guarded extension as a one-more-phase state over its marker."""
    out = template.prefix_state(marker_len)
    out.tree = tree
    if out.reserved_history:
        out.phase_lens = out.phase_lens + [len(tree)]
    return out


def structure_preserving_swap(
    phi: PartialColoring,
    state: TashkinovState,
    eps1: int,
    eps2: int,
    v: int,
    w: int,
    anchor_chain: Optional[KempeComponent] = None,
) -> LemmaOutcome:
    """Certify that every (eps1, eps2)-chain avoiding v swaps without touching
    the tree structure, or produce a smaller non-elementary pair.

    When `anchor_chain` is given only that chain is certified (the callers in
    the reduction cascade each care about one specific chain).
    """
    graph = state.graph
    tree = state.tree
    anchor, link = state.anchor_color, state.link_color()
    marker = state.marker_tree()
    marker_missing = tree_missing_mask(phi, marker)
    sn = set(state.connecting)

    # named precondition checks
    if v not in tree.vset or w not in tree.vset:
        raise InputError("swap endpoints must lie in the tree")
    if v not in tree.prefix(tree.prefix_containing(w)).vset:
        raise InputError("first endpoint must lie in the prefix of the second")
    if not phi.missing_mask(v) & _mask(eps1) or eps1 == anchor:
        raise InputError("first color must be missing at v and differ from the anchor")
    tw = tree.prefix(tree.prefix_containing(w))
    marker_edges = set(marker.edges)
    used_beyond = {phi.colors[e] for e in tw.edges if e not in marker_edges and phi.colors[e] != UNCOLORED}
    if eps1 in used_beyond:
        raise InputError("first color is used beyond the final phase inside the prefix")
    if not phi.missing_mask(w) & _mask(eps2):
        raise InputError("second color must be missing at w")
    inter = {c for c in (eps1, eps2) if marker_missing & _mask(c)}
    cond_a = bool(inter - {anchor})
    cond_b = not inter and not ({eps1, eps2} & sn)
    if not (cond_a or cond_b):
        raise InputError("color-membership side condition violated")

    if not is_elementary(phi, tree.minus_last().vset):
        return _reduced(phi, state.prefix_state(len(tree) - 1), reason="tree-minus-last non-elementary")

    if anchor_chain is not None:
        chains = [anchor_chain]
    else:
        chains = _chains_avoiding(phi, eps1, eps2, v)

    stage = state.last_stage_tree()
    certificates = []
    for chain in chains:
        cert = {"chain": chain.edges}
        # (i4) the two endpoints are linked by one chain
        comp_v = kempe_component(phi, v, eps1, eps2)
        linked = comp_v.kind == "path" and w in comp_v.ends and v in comp_v.ends
        if not linked:
            comp_w = kempe_component(phi, w, eps1, eps2)
            if v in _component_vertices(graph, comp_w):
                raise LemmaStress("endpoint chain passes through v without ending there", {})
            swap_component(phi, comp_w)
            tw_state = state.prefix_state(len(tw))
            if is_elementary(phi, tw_state.tree.vset):
                raise LemmaStress("endpoint swap failed to produce a collision", {})
            return _reduced(phi, tw_state, reason="endpoints not chain-linked")
        cert["linked"] = True
        # (i1) nonexit preservation for the stage tree, by direct comparison
        before = nonexit_set(phi, stage, anchor, link)
        swap_component(phi, chain)
        after = nonexit_set(phi, stage, anchor, link)
        ok_i1 = before == after
        # (i2) final phase survives
        marker_state = state.prefix_state(state.last_marker_len())
        ok_i2 = not _structure_broken(phi, marker_state)
        # (i3) the prefix at w survives when w is beyond the final phase
        ok_i3 = True
        if w not in marker.vset:
            ok_i3 = not _structure_broken(phi, state.prefix_state(len(tw)))
        # (i5) the whole tree survives under the listed side conditions
        ok_i5 = True
        reserved_all = {c for pair in state.reserved().values() for c in pair}
        if w not in marker.vset and w not in _component_vertices(graph, chain):
            tail_colors = {
                phi.colors[e] for e in tree.edges if e not in set(tw.edges) and phi.colors[e] != UNCOLORED
            }
            applies = (
                eps1 not in reserved_all
                or (eps1 in reserved_all and not ({eps1, eps2} & tail_colors))
                or any(
                    eps1 in pair and tree_missing_mask(phi, tw) & _mask(dc)
                    for dc, pair in state.reserved().items()
                )
            )
            if applies:
                ok_i5 = not _structure_broken(phi, state)
        swap_component(phi, _refresh(phi, chain))
        cert.update(i1=ok_i1, i2=ok_i2, i3=ok_i3, i5=ok_i5)
        if not (ok_i1 and ok_i2 and ok_i3 and ok_i5):
            return _diagnose_swap_failure(phi, state, chain, eps1, eps2, v, w, cert)
        certificates.append(cert)
    return _preserved(certificates=certificates)


def _chains_avoiding(phi: PartialColoring, a: int, b: int, avoid: int) -> list[KempeComponent]:
    graph = phi.graph
    seen: set[int] = set()
    out = []
    for eid, c in enumerate(phi.colors):
        if c not in (a, b) or eid in seen:
            continue
        comp = component_of_edge(phi, eid, a, b)
        seen.update(comp.edges)
        if avoid not in _component_vertices(graph, comp):
            out.append(comp)
    return out


def _structure_broken(phi: PartialColoring, state: TashkinovState) -> bool:
    from .tashkinov import check_state

    return bool(check_state(phi, state))


def _diagnose_swap_failure(
    phi: PartialColoring,
    state: TashkinovState,
    chain: KempeComponent,
    eps1: int,
    eps2: int,
    v: int,
    w: int,
    cert: dict,
) -> LemmaOutcome:
    """A sub-certificate failed: extract the reduction the case analysis promises."""
    graph = state.graph
    # the standard exits: the swapped tree at w carries the collision
    swap_component(phi, chain)
    tw_state = state.prefix_state(state.tree.prefix_containing(w))
    if not is_elementary(phi, tw_state.tree.vset):
        return _reduced(phi, tw_state, reason="collision at the swapped prefix", certificate=cert)
    if not is_elementary(phi, state.tree.vset):
        return _reduced(phi, state, reason="collision in the full tree", certificate=cert)
    # try exit-path uniqueness machinery on the final phase
    marker_state = state.prefix_state(state.last_marker_len())
    for a, b in ((eps1, eps2), (eps2, eps1)):
        if (
            tree_missing_mask(phi, marker_state.tree) & _mask(a)
            and a != state.anchor_color
            and all(phi.colors[e] != a for e in marker_state.tree.boundary())
        ):
            out = nmq_exit_uniqueness(phi, marker_state, a, b)
            if out.reduced:
                return out
            break
    swap_component(phi, _refresh(phi, chain))
    raise LemmaStress("structure broken by a chain swap but no reduction found", cert)
