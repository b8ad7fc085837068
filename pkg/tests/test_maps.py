"""Stranded maps: face tracing, exponents, boundaries, deletions, genus."""

from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from quartn._util import perm_inverse
from quartn.colours import (
    ENHANCED,
    BoundaryGraph,
    ColourSet,
    full_quartic_model,
    melonic_model,
)
from quartn.enumeration import EnumSpec, enumerate_maps
from quartn.errors import MalformedGraph, NoBoundary
from quartn.maps import (
    StrandedMap,
    is_plane_tree,
    map_amplitude,
    map_boundary,
    omega,
    omega_enhanced,
    omega_min,
    omega_standard,
    structural_predicates,
    trace_faces,
)
from quartn.sweeps import iter_skeletons

C1_3 = ColourSet(bits=1, rank=3)
C12_4 = ColourSet(bits=3, rank=4)


def test_single_edge_plane_tree_faces():
    # one {1}-edge between two bare vertices: D=3, darts 0,1, two vertices
    m = StrandedMap(3, (C1_3,), 0, (0, 1))
    # colour 1 crosses: one face; colours 2,3 stay: two faces each
    assert m.internal_face_count() == 5
    assert is_plane_tree(m)
    assert m.corner_count() == 2
    assert omega_standard(m) == (3 - 1) * 1 - 5  # (D-1)E - F_int


def test_self_loop_faces():
    m = StrandedMap(3, (C1_3,), 0, (1, 0))  # both darts on one vertex
    assert m.internal_face_count() == 4
    assert not is_plane_tree(m)


def test_boundary_tau_single_colour_edge():
    # two ciliated vertices joined by a {1}-edge, D=3: edge darts 0,1; cilia 2,3
    m = StrandedMap(3, (C1_3,), 2, (2, 3, 0, 1))
    b = map_boundary(m)
    assert b.tau[0] == (1, 0)
    assert b.tau[1] == (0, 1)
    assert b.tau[2] == (0, 1)


def test_boundary_tau_two_colour_edge():
    # same shape with a {1,2}-edge at D=4: both its colours swap
    m = StrandedMap(4, (C12_4,), 2, (2, 3, 0, 1))
    b = map_boundary(m)
    assert b.tau[0] == (1, 0)
    assert b.tau[1] == (1, 0)
    assert b.tau[2] == (0, 1)
    assert b.tau[3] == (0, 1)


def test_boundary_of_vacuum_raises():
    m = StrandedMap(3, (C1_3,), 0, (0, 1))
    with pytest.raises(NoBoundary):
        map_boundary(m)


def test_bare_ciliated_vertex_boundary_is_identity():
    m = StrandedMap(3, (C1_3,), 1, (1, 2, 0))  # cilium on the self-loop vertex
    assert map_boundary(m).D == 3


def test_omega_min_values():
    spec3 = melonic_model(3)
    assert omega_min(None, spec3) == -3
    assert omega_min(BoundaryGraph.identity(3, 1), spec3) == -3 + 2 * 1 + 1
    spec4e = full_quartic_model(4, ENHANCED)
    assert omega_min(None, spec4e) == -4
    # identity boundary on two cilia has two boundary components
    assert omega_min(BoundaryGraph.identity(4, 2), spec4e) == -4 + 2 * 2 + 2


def test_amplitude_exponent_equals_minus_omega():
    spec = melonic_model(3)
    for E, k in ((1, 0), (2, 0), (1, 1)):
        es = EnumSpec(spec, E, k, vacuum=(k == 0))
        for m, _w in enumerate_maps(es):
            amp = map_amplitude(m, spec)
            assert amp.n_exponent == -omega(m, spec)
            assert amp.n_exponent <= -omega_min(
                map_boundary(m) if k else None, spec)


def test_mirror_reflection_preserves_amplitude():
    spec = melonic_model(3)
    for E, k in ((1, 0), (2, 0), (2, 1)):
        es = EnumSpec(spec, E, k, vacuum=(k == 0))
        for m, _w in enumerate_maps(es):
            mirror = StrandedMap(m.D, m.edge_colours, m.k,
                                 tuple(perm_inverse(list(m.sigma))))
            assert map_amplitude(mirror, spec) == map_amplitude(m, spec)


def _all_small_maps(E_max=2, k_max=1, D=4):
    spec = full_quartic_model(D)
    out = []
    for E in range(1, E_max + 1):
        for k in range(k_max + 1):
            for skel in iter_skeletons(E, k):
                for cols in _colour_tuples(spec.interactions, E):
                    out.append(StrandedMap(D, cols, k, skel.sigma))
    return out


def _colour_tuples(interactions, E):
    return list(itertools.product(interactions, repeat=E))


def test_loop_edge_deletion_face_change_bounded():
    # the sharp statement holds for loop edges (deletion keeps the map connected)
    checked = 0
    for m in _all_small_maps(E_max=3, k_max=1, D=3):
        for e in range(m.n_edges):
            dropped = m.delete_edges({e})
            if not dropped.is_connected():
                continue
            change = dropped.internal_face_count() - m.internal_face_count()
            assert abs(change) <= len(m.edge_colours[e].colours)
            checked += 1
    assert checked > 100


def test_ordinary_genus_matrix_maps():
    # planar self-loop at D=2
    D2 = ColourSet(bits=1, rank=2)
    planar = StrandedMap(2, (D2,), 0, (1, 0))
    assert planar.ordinary_genus() == 0
    # interleaved two-loop bouquet: genus 1
    torus = StrandedMap(2, (D2, D2), 0, (2, 3, 1, 0))
    assert torus.ordinary_genus() == 1


def test_structural_predicates_fields():
    spec = full_quartic_model(4, ENHANCED)
    m = StrandedMap(4, (C12_4,), 0, (0, 1))
    preds = structural_predicates(m, spec)
    assert set(preds) >= {"is_plane_tree", "all_edges_monocoloured",
                          "nonmax_edges_all_bridges", "sector_planarity",
                          "t_map_is_tree", "whole_map_planar"}
    assert preds["is_plane_tree"] and preds["t_map_is_tree"]
    assert not preds["all_edges_monocoloured"]


def test_canonical_key_separates_distinct_maps():
    tree = StrandedMap(3, (C1_3,), 0, (0, 1))
    loop = StrandedMap(3, (C1_3,), 0, (1, 0))
    assert tree.canonical_key() != loop.canonical_key()
    # identical construction gives an identical key
    assert tree.canonical_key() == StrandedMap(3, (C1_3,), 0, (0, 1)).canonical_key()


def test_map_json_round_trip():
    m = StrandedMap(4, (C12_4,), 2, (2, 3, 0, 1))
    m2 = StrandedMap.from_json(m.to_json())
    assert m2.canonical_key() == m.canonical_key()


def test_validation_rejects_bad_sigma():
    with pytest.raises(MalformedGraph):
        StrandedMap(3, (C1_3,), 0, (0, 0))


def test_enhanced_vs_standard_omega_on_necklace():
    from quartn.colours import INVARIANT

    spec_e = full_quartic_model(4, ENHANCED)
    spec_i = full_quartic_model(4, INVARIANT)
    m = StrandedMap(4, (C12_4,), 0, (0, 1))
    # enhanced scaling rewards the two-colour edge with its size-2 alpha, so
    # the degrees differ by exactly one per edge
    assert omega_enhanced(m) == omega(m, spec_e)
    assert omega(m, spec_e) == omega(m, spec_i) - 1
    assert omega(m, spec_e) == -4
