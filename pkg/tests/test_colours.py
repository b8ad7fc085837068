"""Colour sets, model specs, and boundary-graph structure."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from quartn.colours import (
    ENHANCED,
    INVARIANT,
    BoundaryGraph,
    ColourSet,
    IdentityCovariance,
    ModelSpec,
    PowerLaplacian,
    all_canonical,
    canonicalise,
    full_quartic_model,
    melonic_model,
    singletons,
)
from quartn.errors import InvalidColourSet, MalformedGraph


def test_canonicalise_quotients_complements():
    # a set and its complement name the same interaction
    for cols, D in (((1,), 3), ((2, 3), 3), ((1, 2), 4), ((3, 4), 4)):
        cs = canonicalise(cols, D)
        comp = tuple(c for c in range(1, D + 1) if c not in cols)
        assert canonicalise(comp, D) == cs
    assert canonicalise((2, 3), 3) == canonicalise((1,), 3)


def test_all_canonical_counts():
    assert len(all_canonical(3)) == 3
    assert len(all_canonical(4)) == 7
    assert len(singletons(3)) == 3
    assert len(singletons(4)) == 4
    # at rank 2 the two mono-coloured sets name the same interaction
    assert len(singletons(2)) == 1


def test_colourset_validation():
    with pytest.raises(InvalidColourSet):
        canonicalise((), 3)
    with pytest.raises(InvalidColourSet):
        canonicalise((1, 2, 3), 3)
    with pytest.raises(InvalidColourSet):
        canonicalise((5,), 3)


@given(st.integers(3, 6), st.data())
def test_canonicalise_idempotent(D, data):
    size = data.draw(st.integers(1, D - 1))
    cols = data.draw(st.lists(st.integers(1, D), min_size=size, max_size=size,
                              unique=True))
    cs = canonicalise(cols, D)
    assert canonicalise(cs.colours, D) == cs
    assert len(cs.colours) <= D - len(cs.colours) + 1  # never the strictly larger side


def test_model_alpha_by_scaling():
    inv = full_quartic_model(4, INVARIANT)
    enh = full_quartic_model(4, ENHANCED)
    single = canonicalise((1,), 4)
    pair = canonicalise((1, 2), 4)
    assert inv.alpha(single) == 1 - 4
    assert inv.alpha(pair) == 1 - 4
    assert enh.alpha(single) == 1 - 4
    assert enh.alpha(pair) == 2 - 4


def test_model_requires_canonical_interactions():
    with pytest.raises(InvalidColourSet):
        ModelSpec(3, (ColourSet(bits=0b110, rank=3),))  # {2,3} is the complement of {1}


def test_melonic_and_full_families():
    assert melonic_model(3).interactions == singletons(3)
    assert full_quartic_model(4).interactions == all_canonical(4)
    assert melonic_model(3).propagator == IdentityCovariance()
    spec = melonic_model(3, propagator=PowerLaplacian(Fraction(3, 4)))
    assert spec.propagator.eta == Fraction(3, 4)


def test_boundary_graph_identity_and_validation():
    b = BoundaryGraph.identity(3, 2)
    assert b.is_identity and b.D == 3 and b.k == 2
    with pytest.raises(MalformedGraph):
        BoundaryGraph(2, ((0, 0), (0, 1)))


def test_boundary_graph_json_round_trip():
    b = BoundaryGraph(2, ((1, 0), (0, 1), (1, 0)))
    assert BoundaryGraph.from_json(b.to_json()) == b


def test_model_json_round_trip():
    spec = full_quartic_model(4, ENHANCED, PowerLaplacian(Fraction(3, 4)))
    j = spec.to_json()
    assert j["D"] == 4 and j["scaling"] == ENHANCED
