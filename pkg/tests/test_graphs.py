"""Coloured graphs: construction, bubbles, faces, boundaries, amplitudes."""

from __future__ import annotations

from fractions import Fraction

import pytest

from quartn.colours import BoundaryGraph, ColourSet, melonic_model
from quartn.errors import MalformedGraph
from quartn.graphs import (
    COVARIANT,
    DUAL,
    ColouredGraph,
    GraphBuilder,
    boundary_graph,
    build_bubble,
    invariant_amplitude,
)

C1 = ColourSet(bits=1, rank=3)


def corner_closure():
    """Vacuum graph: one mono-coloured bubble, both corners closed in parallel."""
    b = GraphBuilder(3)
    bub = b.add_bubble(C1)
    b.wire(bub.h1, bub.s1)
    b.wire(bub.h2, bub.s2)
    return b.build()


def cross_closure():
    b = GraphBuilder(3)
    bub = b.add_bubble(C1)
    b.wire(bub.h1, bub.s2)
    b.wire(bub.h2, bub.s1)
    return b.build()


def pair_self_loop(cross: bool = False):
    """2-point graph: one bubble, one corner closed, the other open to legs."""
    b = GraphBuilder(3)
    bub = b.add_bubble(C1)
    vin = b.add_leg(1, COVARIANT)
    vout = b.add_leg(1, DUAL)
    if cross:
        b.wire(bub.h1, bub.s2)
        b.wire(vin, bub.s1)
    else:
        b.wire(bub.h1, bub.s1)
        b.wire(vin, bub.s2)
    b.wire(bub.h2, vout)
    return b.build()


def internal_faces(g: ColouredGraph) -> int:
    return sum(1 for f in g.faces() if f.internal and f.colour != 0)


def test_corner_closure_counts():
    g = corner_closure()
    assert g.internal_colour0_count() == 2
    assert internal_faces(g) == 5


def test_cross_closure_counts():
    g = cross_closure()
    assert g.internal_colour0_count() == 2
    assert internal_faces(g) == 4


def test_pair_self_loop_counts_and_boundary():
    g = pair_self_loop()
    assert g.internal_colour0_count() == 1
    assert internal_faces(g) == 2
    assert boundary_graph(g) == BoundaryGraph.identity(3, 1)
    g2 = pair_self_loop(cross=True)
    assert internal_faces(g2) == 1
    assert boundary_graph(g2) == BoundaryGraph.identity(3, 1)


def test_bubble_recovery():
    g = corner_closure()
    bubbles = g.bubbles()
    assert len(bubbles) == 1
    assert bubbles[0].colour_set == C1


def test_validation_rejects_double_zero_edge():
    b = GraphBuilder(3)
    bub = b.add_bubble(C1)
    b.wire(bub.h1, bub.s1)
    b.wire(bub.h1, bub.s2)  # h1 already used
    with pytest.raises(MalformedGraph):
        b.build()


def test_validation_rejects_dangling_slot():
    b = GraphBuilder(3)
    bub = b.add_bubble(C1)
    b.wire(bub.h1, bub.s1)
    with pytest.raises(MalformedGraph):
        b.build()  # h2, s2 dangle


def test_build_bubble_shape():
    g = build_bubble(C1, 3, 0)
    # four strand nodes, two per polarity, slots 0..3
    assert sorted(g.kinds) == [0, 1, 2, 3]
    # canonical colour 1 crosses the corners, complement colours 2,3 join them
    crossing = {(h, s) for c, h, s in g.edges if c == 1}
    joining = {(h, s) for c, h, s in g.edges if c in (2, 3)}
    assert crossing.isdisjoint(joining)


def test_invariant_amplitude_corner_closure():
    spec = melonic_model(3)
    amp = invariant_amplitude(corner_closure(), spec)
    # one quartic vertex, five faces, alpha = 1 - D = -2: exponent 5 - 2 = 3
    assert amp.coupling_degrees == (("lambda", 1),)
    assert amp.n_exponent == Fraction(3)


def test_amplitude_cross_vs_corner_exponent_gap():
    spec = melonic_model(3)
    a1 = invariant_amplitude(corner_closure(), spec)
    a2 = invariant_amplitude(cross_closure(), spec)
    assert a1.n_exponent - a2.n_exponent == 1


def test_graph_json_round_trip():
    g = pair_self_loop()
    g2 = ColouredGraph.from_json(g.to_json())
    assert g2.to_json() == g.to_json()
