"""Stranded combinatorial maps: darts, face tracing, degrees, structural tests.

A map has E coloured edges and k cilia. Darts are integers:
  edge i owns darts 2i and 2i+1 (its two ends), epsilon swaps them;
  cilium j (1-based) is dart 2E + j - 1, fixed by epsilon.
sigma is a permutation of all 2E + k darts; each sigma-cycle is a vertex.
Each edge carries a canonical colour set; colour 0 (the quartic pairing
structure at each vertex) is implicit in the cyclic order.

Faces of colour c: restrict sigma to the darts visible at colour c (cilia, and
both darts of every edge whose colour set contains c), then follow
  psi(d) = sigma_c(epsilon(d))   for edge darts,
  psi(d) = sigma_c(d)            for cilia.
A psi-orbit with no cilium is one internal face; an orbit with j cilia splits
into j external faces, each running from one cilium to the next. A vertex with
no visible dart at colour c and no cilium contributes one free internal face.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import MalformedGraph, NoBoundary, RequiresConnected, UnsupportedModel
from ._util import UnionFind, perm_cycles, cycles_to_perm
from .colours import BoundaryGraph, ColourSet, ModelSpec, canonicalise


@dataclass(frozen=True)
class SeriesTerm:
    """One exact monomial: coefficient * (product of couplings^degree) * N^n_exponent."""

    coupling_degrees: tuple[tuple[str, int], ...]
    n_exponent: Fraction
    coefficient: Fraction

    @staticmethod
    def make(degrees: dict, n_exponent, coefficient) -> "SeriesTerm":
        degs = tuple(sorted((k, v) for k, v in degrees.items() if v))
        return SeriesTerm(degs, Fraction(n_exponent), Fraction(coefficient))

    def total_degree(self) -> int:
        return sum(v for _, v in self.coupling_degrees)


@dataclass(frozen=True)
class Face:
    """One colour-c face: the darts crossed, in psi order.

    internal: closed strand. External faces start just after one cilium and
    end at another (possibly the same); `start_cilium`/`end_cilium` are then
    1-based cilium labels. Free faces (no darts) sit at an isolated vertex.
    """

    colour: int
    darts: tuple[int, ...]
    internal: bool
    start_cilium: int = 0
    end_cilium: int = 0


class StrandedMap:
    """Immutable stranded map with memoised faces.

    bare_vertices counts extra vertices carrying no dart at all; each one adds
    a free internal face per colour.
    """

    __slots__ = ("D", "edge_colours", "k", "sigma", "bare_vertices", "_faces", "_hash")

    def __init__(
        self,
        D: int,
        edge_colours: tuple[ColourSet, ...],
        k: int,
        sigma: tuple[int, ...],
        bare_vertices: int = 0,
    ):
        n = 2 * len(edge_colours) + k
        if len(sigma) != n or sorted(sigma) != list(range(n)):
            raise MalformedGraph("sigma must permute the darts 0..2E+k-1")
        for C in edge_colours:
            if C.rank != D:
                raise MalformedGraph("edge colour rank mismatch")
        if bare_vertices < 0:
            raise MalformedGraph("bare_vertices must be nonnegative")
        self.D = D
        self.edge_colours = tuple(edge_colours)
        self.k = k
        self.sigma = tuple(sigma)
        self.bare_vertices = bare_vertices
        self._faces = None
        self._hash = None

    # -- basic counts -------------------------------------------------------

    @property
    def n_edges(self) -> int:
        return len(self.edge_colours)

    @property
    def n_darts(self) -> int:
        return 2 * self.n_edges + self.k

    def epsilon(self, d: int) -> int:
        if d < 2 * self.n_edges:
            return d ^ 1
        return d

    def is_cilium(self, d: int) -> bool:
        return d >= 2 * self.n_edges

    def cilium_label(self, d: int) -> int:
        """1-based label of a cilium dart."""
        return d - 2 * self.n_edges + 1

    def vertices(self) -> list[tuple[int, ...]]:
        """sigma-cycles; every cycle is one darted map vertex."""
        return perm_cycles(self.sigma)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices()) + self.bare_vertices

    def vertex_of(self) -> dict[int, int]:
        out = {}
        for i, cyc in enumerate(self.vertices()):
            for d in cyc:
                out[d] = i
        return out

    def is_connected(self) -> bool:
        V = self.vertices()
        if self.bare_vertices and (V or self.bare_vertices > 1):
            return False
        if len(V) <= 1:
            return True
        uf = UnionFind(len(V))
        vof = self.vertex_of()
        for e in range(self.n_edges):
            uf.union(vof[2 * e], vof[2 * e + 1])
        return uf.count == 1

    def validate(self) -> None:
        """Raise MalformedGraph unless every sigma-cycle holds at most one cilium."""
        for cyc in self.vertices():
            if sum(1 for d in cyc if self.is_cilium(d)) > 1:
                raise MalformedGraph("a vertex may carry at most one cilium")

    # -- face tracing -------------------------------------------------------

    def trace_faces(self) -> tuple[Face, ...]:
        """All faces of every colour 1..D, internal and external."""
        if self._faces is not None:
            return self._faces
        out = []
        vertices = self.vertices()
        for c in range(1, self.D + 1):
            out.extend(self._trace_colour(c, vertices))
        self._faces = tuple(out)
        return self._faces

    def _trace_colour(self, c: int, vertices) -> list[Face]:
        twoE = 2 * self.n_edges
        visible = [False] * self.n_darts
        for e, C in enumerate(self.edge_colours):
            if c in C:
                visible[2 * e] = visible[2 * e + 1] = True
        for d in range(twoE, self.n_darts):
            visible[d] = True

        # sigma restricted to visible darts: skip the invisible ones in cycle order
        sigma_c = {}
        for cyc in vertices:
            vis = [d for d in cyc if visible[d]]
            for i, d in enumerate(vis):
                sigma_c[d] = vis[(i + 1) % len(vis)]

        def psi(d: int) -> int:
            return sigma_c[self.epsilon(d)] if d < twoE else sigma_c[d]

        faces = []
        seen = set()
        for start in sorted(sigma_c):
            if start in seen:
                continue
            orbit = []
            d = start
            while d not in seen:
                seen.add(d)
                orbit.append(d)
                d = psi(d)
            cilia_pos = [i for i, d in enumerate(orbit) if d >= twoE]
            if not cilia_pos:
                faces.append(Face(c, tuple(orbit), True))
                continue
            # split at cilia: the face after cilium z runs to the next cilium
            m = len(cilia_pos)
            for idx in range(m):
                i0 = cilia_pos[idx]
                i1 = cilia_pos[(idx + 1) % m]
                seg = []
                j = (i0 + 1) % len(orbit)
                while j != i1:
                    seg.append(orbit[j])
                    j = (j + 1) % len(orbit)
                faces.append(
                    Face(
                        c,
                        tuple(seg),
                        False,
                        start_cilium=orbit[i0] - twoE + 1,
                        end_cilium=orbit[i1] - twoE + 1,
                    )
                )
        # free faces at vertices with nothing visible
        for cyc in vertices:
            if not any(visible[d] for d in cyc):
                faces.append(Face(c, (), True))
        for _ in range(self.bare_vertices):
            faces.append(Face(c, (), True))
        return faces

    def internal_face_count(self) -> int:
        return sum(1 for f in self.trace_faces() if f.internal)

    def internal_faces_by_colour(self) -> dict[int, int]:
        out = {c: 0 for c in range(1, self.D + 1)}
        for f in self.trace_faces():
            if f.internal:
                out[f.colour] += 1
        return out

    # -- boundary -----------------------------------------------------------

    def boundary(self) -> BoundaryGraph:
        """Boundary graph read off the external faces: at colour c the external
        face starting at cilium z ends at cilium tau_c(z)."""
        if self.k == 0:
            raise NoBoundary("vacuum map has no boundary graph")
        tau = []
        for c in range(1, self.D + 1):
            t = [0] * self.k
            for f in self.trace_faces():
                if f.colour == c and not f.internal:
                    t[f.start_cilium - 1] = f.end_cilium - 1
            tau.append(tuple(t))
        return BoundaryGraph(self.k, tuple(tau))

    # -- corners and colour-0 bookkeeping ------------------------------------

    def corner_count(self) -> int:
        """Internal colour-0 strand segments around the vertices.

        A vertex of degree d carries d corners; a cilium occupies one cyclic
        slot and replaces exactly one corner by the external-leg pair, leaving
        d - z propagator corners (z = cilia at the vertex). On a connected map
        with at least one edge this totals 2E - k.
        """
        total = 0
        for cyc in self.vertices():
            deg = sum(1 for d in cyc if not self.is_cilium(d))
            z = len(cyc) - deg
            total += max(deg - z, 0)
        return total

    # -- genus per colour sector ---------------------------------------------

    def sector_counts(self, C: ColourSet) -> tuple[int, int, int, int]:
        """(edges, vertices, faces, components) of the colour-set-C sector:
        the sub-map on edges carrying exactly the colour set C, keeping the
        vertices that meet at least one such edge, traced as an ordinary map
        (one strand per edge side, cilia absent)."""
        keep = [e for e, Ce in enumerate(self.edge_colours) if Ce == C]
        if not keep:
            return (0, 0, 0, 0)
        visible = set()
        for e in keep:
            visible.add(2 * e)
            visible.add(2 * e + 1)
        vertices = [cyc for cyc in self.vertices() if any(d in visible for d in cyc)]
        sigma_c = {}
        for cyc in vertices:
            vis = [d for d in cyc if d in visible]
            for i, d in enumerate(vis):
                sigma_c[d] = vis[(i + 1) % len(vis)]
        seen = set()
        n_faces = 0
        for start in sorted(sigma_c):
            if start in seen:
                continue
            d = start
            while d not in seen:
                seen.add(d)
                d = sigma_c[d ^ 1]
            n_faces += 1
        uf = UnionFind(len(vertices))
        vof = {}
        for i, cyc in enumerate(vertices):
            for d in cyc:
                vof[d] = i
        for e in keep:
            uf.union(vof[2 * e], vof[2 * e + 1])
        return (len(keep), len(vertices), n_faces, uf.count)

    def sector_is_planar(self, C: ColourSet) -> bool:
        """Euler test per component: faces - edges + vertices == 2 * components."""
        E, V, F, comps = self.sector_counts(C)
        if E == 0:
            return True
        return F - E + V == 2 * comps

    def ordinary_genus(self) -> Fraction:
        """Genus of the whole map forgetting strands and cilia (edge sides glued
        by epsilon). Only meaningful for connected maps."""
        if not self.is_connected():
            raise RequiresConnected("genus needs a connected map")
        twoE = 2 * self.n_edges
        if twoE == 0:
            return Fraction(0)
        sigma_c = {}
        for cyc in self.vertices():
            vis = [d for d in cyc if d < twoE]
            for i, d in enumerate(vis):
                sigma_c[d] = vis[(i + 1) % len(vis)]
        seen = set()
        F = 0
        for start in range(twoE):
            if start in seen:
                continue
            d = start
            while d not in seen:
                seen.add(d)
                d = sigma_c[d ^ 1]
            F += 1
        V = len(self.vertices())
        return Fraction(2 - (F - self.n_edges + V), 2)

    # -- canonical form, hashing, JSON ----------------------------------------

    def canonical_key(self):
        return (self.D, self.edge_colours, self.k, self.sigma, self.bare_vertices)

    def __eq__(self, other):
        return isinstance(other, StrandedMap) and self.canonical_key() == other.canonical_key()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.canonical_key())
        return self._hash

    def to_json(self) -> dict:
        twoE = 2 * self.n_edges
        half_edges = [{"id": d, "colours": list(self.edge_colours[d // 2].colours)} for d in range(twoE)]
        out = {
            "D": self.D,
            "half_edges": half_edges,
            "cilia": list(range(twoE, twoE + self.k)),
            "sigma": [list(cyc) for cyc in perm_cycles(self.sigma)],
            "epsilon": [[2 * e, 2 * e + 1] for e in range(self.n_edges)],
        }
        if self.bare_vertices:
            out["bare_vertices"] = self.bare_vertices
        return out

    @staticmethod
    def from_json(obj: dict) -> "StrandedMap":
        D = obj["D"]
        half = obj["half_edges"]
        eps_pairs = [tuple(p) for p in obj["epsilon"]]
        cilia = list(obj["cilia"])
        n = len(half) + len(cilia)
        # renumber: edges by epsilon pair order, cilia after
        colours_by_id = {h["id"]: tuple(h["colours"]) for h in half}
        rename = {}
        edge_colours = []
        for i, (a, b) in enumerate(eps_pairs):
            ca, cb = colours_by_id.get(a), colours_by_id.get(b)
            if ca is None or cb is None or ca != cb:
                raise MalformedGraph("epsilon must pair two half-edges of equal colours")
            rename[a] = 2 * i
            rename[b] = 2 * i + 1
            edge_colours.append(canonicalise(ca, D))
        for j, z in enumerate(cilia):
            if z in rename:
                raise MalformedGraph("cilium id collides with half-edge")
            rename[z] = 2 * len(eps_pairs) + j
        if len(rename) != n:
            raise MalformedGraph("duplicate dart ids")
        cycles = []
        for cyc in obj["sigma"]:
            cycles.append(tuple(rename[d] for d in cyc))
        covered = {d for cyc in cycles for d in cyc}
        if covered != set(range(n)):
            raise MalformedGraph("sigma cycles must cover every dart exactly once")
        m = StrandedMap(
            D, tuple(edge_colours), len(cilia), cycles_to_perm(n, cycles),
            bare_vertices=obj.get("bare_vertices", 0),
        )
        m.validate()
        return m

    # -- edge deletion (for scale analysis) -----------------------------------

    def delete_edges(self, drop, keep_bare: bool = True) -> "StrandedMap":
        """Map with the given edge indices removed (sigma spliced around the
        deleted darts). Vertices left with no dart either remain as
        bare_vertices (keep_bare, the default: they still carry D free faces)
        or are dropped (keep_bare=False: the amputated-subgraph convention)."""
        drop = set(drop)
        keep = [e for e in range(self.n_edges) if e not in drop]
        rename = {}
        for i, e in enumerate(keep):
            rename[2 * e] = 2 * i
            rename[2 * e + 1] = 2 * i + 1
        twoE = 2 * self.n_edges
        for j in range(self.k):
            rename[twoE + j] = 2 * len(keep) + j
        cycles = []
        bare = self.bare_vertices
        for cyc in self.vertices():
            vis = [rename[d] for d in cyc if d in rename]
            if vis:
                cycles.append(tuple(vis))
            else:
                bare += 1
        n = 2 * len(keep) + self.k
        return StrandedMap(
            self.D,
            tuple(self.edge_colours[e] for e in keep),
            self.k,
            cycles_to_perm(n, cycles),
            bare_vertices=bare if keep_bare else 0,
        )


def trace_faces(m: StrandedMap) -> tuple[Face, ...]:
    """All faces of the map, every colour, internal and external."""
    return m.trace_faces()


def map_boundary(m: StrandedMap) -> BoundaryGraph:
    """Boundary graph of a ciliated map (raises NoBoundary on vacuum maps)."""
    return m.boundary()


# -- degrees ------------------------------------------------------------------


def omega(m: StrandedMap, model: ModelSpec) -> int:
    """N-degree of the amplitude: amplitude = (-coupling)^E * N^(-omega), i.e.
    omega = sum_e (-alpha(C_e)) - F_int. Standard scaling gives (D-1)E - F_int,
    enhanced gives sum_e (D - |C_e|) - F_int."""
    if model.is_field_theory:
        raise UnsupportedModel("omega is the exact-amplitude degree; field-theory models are power-counted elsewhere")
    F_int = m.internal_face_count()
    return sum(-model.alpha(C) for C in m.edge_colours) - F_int


def map_amplitude(m: StrandedMap, model: ModelSpec) -> SeriesTerm:
    """Exact amplitude of one labelled map: (-1)^E * prod couplings * N^(F_int + sum alpha)."""
    if model.is_field_theory:
        raise UnsupportedModel("exact amplitudes need the identity covariance")
    degrees = {}
    expo = m.internal_face_count()
    for C in m.edge_colours:
        name = model.coupling_name(C)
        degrees[name] = degrees.get(name, 0) + 1
        expo += model.alpha(C)
    return SeriesTerm.make(degrees, expo, (-1) ** m.n_edges)


def omega_standard(m: StrandedMap) -> int:
    """(D-1) E - F_int : degree of the uniformly scaled model."""
    return (m.D - 1) * m.n_edges - m.internal_face_count()


def omega_enhanced(m: StrandedMap) -> int:
    """sum_e (D - |C_e|) - F_int : degree with size-dependent enhancement."""
    return sum(m.D - len(C) for C in m.edge_colours) - m.internal_face_count()


def omega_min(boundary: BoundaryGraph | None, model: ModelSpec) -> int:
    """Sharp lower bound of the degree over connected maps with the given
    boundary: -D + (D-1)k + C(boundary) under standard scaling, with (D-1)
    replaced by ceil(D/2) under enhancement. Vacuum boundary (None or k=0)
    contributes k = 0 components."""
    from .colours import boundary_components, INVARIANT

    D = model.D
    if boundary is None or boundary.k == 0:
        k, cb = 0, 0
    else:
        k, cb = boundary.k, boundary_components(boundary)
    if model.scaling == INVARIANT:
        return -D + (D - 1) * k + cb
    return -D + (-(-D // 2)) * k + cb


# -- structural predicates ------------------------------------------------------


def _edge_endpoints(m: StrandedMap) -> list[tuple[int, int]]:
    vof = m.vertex_of()
    return [(vof[2 * e], vof[2 * e + 1]) for e in range(m.n_edges)]


def is_plane_tree(m: StrandedMap) -> bool:
    """Connected, no cycles (tree), and genus zero checked per colour sector.
    A tree of any ciliation is automatically planar; the tree test suffices."""
    if not m.is_connected():
        return False
    return m.n_edges == m.n_vertices - 1 and not has_self_loop(m)


def has_self_loop(m: StrandedMap) -> bool:
    return any(a == b for a, b in _edge_endpoints(m))


def all_edges_mono(m: StrandedMap) -> bool:
    return all(len(C) == 1 for C in m.edge_colours)


def edges_mono_or_external(m: StrandedMap) -> bool:
    """Every edge is mono-coloured, or every strand through it lies on an
    external face."""
    int_darts = set()
    for f in m.trace_faces():
        if f.internal:
            int_darts.update(f.darts)
    for e, C in enumerate(m.edge_colours):
        if len(C) == 1:
            continue
        if 2 * e in int_darts or 2 * e + 1 in int_darts:
            return False
    return True


def bridges(m: StrandedMap) -> set[int]:
    """Edge indices whose deletion disconnects their component. Doubled edges
    and self-loops are never bridges."""
    ends = _edge_endpoints(m)
    nV = len(m.vertices())
    out = set()
    for e, (a, b) in enumerate(ends):
        if a == b:
            continue
        uf = UnionFind(nV)
        for e2, (x, y) in enumerate(ends):
            if e2 != e:
                uf.union(x, y)
        if uf.find(a) != uf.find(b):
            out.add(e)
    return out


def nonmax_edges_all_bridges(m: StrandedMap, model: ModelSpec) -> bool:
    smax = model.max_interaction_size()
    br = bridges(m)
    return all(len(C) == smax or e in br for e, C in enumerate(m.edge_colours))


def t_map_is_tree(m: StrandedMap, model: ModelSpec) -> bool:
    """Contracted structure test for enhanced-model leading order: keep one
    spanning tree of every connected component of each exact-maximal-colour-set
    sub-map, plus every non-maximal edge. On a connected map the result always
    spans all vertices and stays connected, so it is a tree exactly when its
    edge count is n_vertices - 1; that count does not depend on which spanning
    trees were picked."""
    if not m.is_connected():
        raise RequiresConnected("t_map test needs a connected map")
    smax = model.max_interaction_size()
    ends = _edge_endpoints(m)
    kept = 0
    for C in sorted({Ce for Ce in m.edge_colours if len(Ce) == smax}):
        verts = sorted({v for e, Ce in enumerate(m.edge_colours) if Ce == C for v in ends[e]})
        idx = {v: i for i, v in enumerate(verts)}
        uf = UnionFind(len(verts))
        for e, Ce in enumerate(m.edge_colours):
            if Ce == C:
                uf.union(idx[ends[e][0]], idx[ends[e][1]])
        kept += len(verts) - uf.count
    kept += sum(1 for Ce in m.edge_colours if len(Ce) != smax)
    return kept == m.n_vertices - 1


def whole_map_planar(m: StrandedMap) -> bool:
    """Genus zero of the connected map with strands and cilia forgotten."""
    if m.n_edges == 0:
        return True
    return m.ordinary_genus() == 0


def structural_predicates(m: StrandedMap, model: ModelSpec) -> dict:
    """Named structure tests used by the leading-order characterisations."""
    if not m.is_connected():
        raise RequiresConnected("structural predicates need a connected map")
    return {
        "is_plane_tree": is_plane_tree(m),
        "all_edges_monocoloured": all_edges_mono(m),
        "nonmax_edges_all_bridges": nonmax_edges_all_bridges(m, model),
        "sector_planarity": {C: m.sector_is_planar(C) for C in sorted(set(m.edge_colours))},
        "t_map_is_tree": t_map_is_tree(m, model),
        "whole_map_planar": whole_map_planar(m),
    }
