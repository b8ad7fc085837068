"""Both directions of the bubble<->edge correspondence between quartic
Feynman graphs and ciliated stranded maps.

Forward: each bubble becomes one multicoloured edge (its canonical colour
set), each colour-0 cycle becomes a vertex (sigma-cycle ordered along the
propagator direction, hollow to solid), each open colour-0 path between a
covariant and a dual leg becomes a ciliated vertex whose cilium takes the
dual leg's label. Bubble i becomes edge i (bubbles ordered by smallest
vertex id); the end holding the bubble's lowest hollow node becomes dart 2i.

Backward: edge e expands to the 4-node bubble on ids 4e..4e+3, corners become
colour-0 edges following sigma, cilia split into leg pairs on ids 4E, 4E+1, ...
"""

from __future__ import annotations

from .errors import MalformedGraph, UnsupportedBubble
from ._util import cycles_to_perm
from .colours import ColourSet
from .graphs import COVARIANT, DUAL, EXT, ColouredGraph, GraphBuilder
from .maps import StrandedMap


def graph_to_map(g: ColouredGraph) -> StrandedMap:
    """Contract bubbles to edges and colour-0 cycles to vertices."""
    try:
        bubbles = g.bubbles()
    except MalformedGraph as exc:
        raise UnsupportedBubble(str(exc)) from exc
    # stop lookup: solid node -> (dart, exit hollow node)
    stop_at = {}
    for i, b in enumerate(bubbles):
        stop_at[b.s1] = (2 * i, b.h1)
        stop_at[b.s2] = (2 * i + 1, b.h2)
    zero_adj = {}
    for c, h, s in g.edges:
        if c == 0:
            if h in zero_adj:
                raise MalformedGraph(f"vertex {h} has two colour-0 edges")
            zero_adj[h] = s
    dual_label = {at: label for label, pol, at in g.legs if pol == DUAL}
    k = len(dual_label)
    if sorted(dual_label.values()) != list(range(1, k + 1)):
        raise MalformedGraph("dual legs must be labelled 1..k")
    E = len(bubbles)
    cycles = []
    visited = set()
    # open paths: one per covariant leg
    for label, pol, at in sorted(g.legs):
        if pol != COVARIANT:
            continue
        stops = []
        v = zero_adj.get(at)
        if v is None:
            raise MalformedGraph("dangling colour-0 slot at a leg")
        while g.kinds[v] != EXT:
            dart, exit_h = stop_at[v]
            stops.append(dart)
            visited.add(v)
            v = zero_adj.get(exit_h)
            if v is None:
                raise MalformedGraph("dangling colour-0 slot inside a path")
        j = dual_label[v]
        cycles.append(tuple(stops) + (2 * E + j - 1,))
    # closed cycles on the remaining stops
    for s0 in sorted(stop_at):
        if s0 in visited:
            continue
        stops = []
        v = s0
        while v not in visited:
            dart, exit_h = stop_at[v]
            stops.append(dart)
            visited.add(v)
            v = zero_adj.get(exit_h)
            if v is None:
                raise MalformedGraph("dangling colour-0 slot inside a cycle")
        if v != s0:
            raise MalformedGraph("colour-0 structure is not a disjoint union of cycles and leg paths")
        cycles.append(tuple(stops))
    n = 2 * E + k
    m = StrandedMap(g.D, tuple(b.colour_set for b in bubbles), k, cycles_to_perm(n, cycles))
    m.validate()
    return m


def map_to_graph(m: StrandedMap) -> ColouredGraph:
    """Expand edges to bubbles and vertices to colour-0 wiring."""
    if m.bare_vertices:
        raise MalformedGraph("bare vertices have no graph image")
    gb = GraphBuilder(m.D)
    for e, C in enumerate(m.edge_colours):
        b = gb.add_bubble(C)
        assert b.h1 == 4 * e
    twoE = 2 * m.n_edges
    ext_t = {}
    ext_tb = {}
    for j in range(1, m.k + 1):
        vtb = gb.add_leg(j, DUAL)
        vt = gb.add_leg(j, COVARIANT)
        ext_tb[j], ext_t[j] = vtb, vt

    def hollow_of(d: int) -> int:
        e, side = divmod(d, 2)
        return 4 * e + 2 * side

    def solid_of(d: int) -> int:
        e, side = divmod(d, 2)
        return 4 * e + 2 * side + 1

    for cyc in m.vertices():
        cil = [i for i, d in enumerate(cyc) if d >= twoE]
        if len(cil) > 1:
            raise MalformedGraph("a vertex may carry at most one cilium")
        if cil:
            i0 = cil[0]
            j = cyc[i0] - twoE + 1
            stops = [cyc[(i0 + 1 + t) % len(cyc)] for t in range(len(cyc) - 1)]
            if not stops:
                gb.wire(ext_t[j], ext_tb[j])
                continue
            gb.wire(ext_t[j], solid_of(stops[0]))
            for a, b in zip(stops, stops[1:]):
                gb.wire(hollow_of(a), solid_of(b))
            gb.wire(hollow_of(stops[-1]), ext_tb[j])
        else:
            for i, d in enumerate(cyc):
                gb.wire(hollow_of(d), solid_of(cyc[(i + 1) % len(cyc)]))
    g = gb.build(validate=True)
    return g
