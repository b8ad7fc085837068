"""Quartic (D+1)-coloured Feynman graphs: bubbles, propagators, faces, boundary.

Vertices are integer-id tensor nodes: "hollow" carries a covariant tensor,
"solid" a dual tensor, "ext" a source leg. Every edge is a triple
(colour, hollow-side id, solid-side id): colours 1..D are index contractions
inside interaction bubbles (hollow endpoint to solid endpoint), colour 0 is a
propagator (a covariant node or "T" leg on its hollow side, a dual node or
"Tbar" leg on its solid side).

A bubble is a connected component of the coloured (non-0) edges; for quartic
models it has two hollow and two solid nodes, with colours split into the
canonical set (crossing between the two corner pairs) and its complement
(joining each corner pair).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidColourSet, MalformedGraph, UnsupportedModel
from ._util import UnionFind
from .colours import BoundaryGraph, ColourSet, ModelSpec, canonicalise
from .maps import SeriesTerm

HOLLOW = "hollow"
SOLID = "solid"
EXT = "ext"
COVARIANT = "T"
DUAL = "Tbar"


@dataclass(frozen=True)
class GraphFace:
    """One colour-c face: the alternating (colour-0 / colour-c) walk.

    Internal faces are closed cycles; external faces are open paths whose ends
    are a covariant and a dual leg (labels recorded)."""

    colour: int
    walk: tuple[int, ...]
    internal: bool
    covariant_leg: int = 0
    dual_leg: int = 0


@dataclass(frozen=True)
class Bubble:
    """One quartic interaction: corner pairs (h1, s1) and (h2, s2) joined by
    the complement colours; the canonical colours cross between the pairs."""

    index: int
    colour_set: ColourSet
    h1: int
    s1: int
    h2: int
    s2: int

    @property
    def nodes(self) -> tuple[int, int, int, int]:
        return (self.h1, self.s1, self.h2, self.s2)


class ColouredGraph:
    """Immutable quartic Feynman graph."""

    __slots__ = ("D", "kinds", "edges", "legs", "_bubbles", "_faces")

    def __init__(self, D: int, kinds: dict, edges, legs=()):
        self.D = D
        self.kinds = dict(kinds)
        self.edges = tuple(tuple(e) for e in edges)
        self.legs = tuple(tuple(l) for l in legs)
        self._bubbles = None
        self._faces = None
        self._check_shape()

    # -- structural validation ------------------------------------------------

    def _check_shape(self) -> None:
        for v, kind in self.kinds.items():
            if kind not in (HOLLOW, SOLID, EXT):
                raise MalformedGraph(f"unknown vertex kind {kind!r}")
        for c, h, s in self.edges:
            if not (0 <= c <= self.D):
                raise MalformedGraph(f"edge colour {c} outside 0..{self.D}")
            if h not in self.kinds or s not in self.kinds:
                raise MalformedGraph("edge endpoint is not a vertex")
            if c >= 1:
                if self.kinds[h] != HOLLOW or self.kinds[s] != SOLID:
                    raise MalformedGraph("coloured edges join a hollow node to a solid node")
            else:
                if self.kinds[h] == SOLID or self.kinds[s] == HOLLOW:
                    raise MalformedGraph("colour-0 hollow side must be covariant, solid side dual")
        seen_at = set()
        for label, pol, at in self.legs:
            if pol not in (COVARIANT, DUAL):
                raise MalformedGraph(f"unknown polarity {pol!r}")
            if self.kinds.get(at) != EXT:
                raise MalformedGraph("leg must sit at an ext vertex")
            if at in seen_at:
                raise MalformedGraph("two legs at one ext vertex")
            seen_at.add(at)
        ext_ids = {v for v, k in self.kinds.items() if k == EXT}
        if seen_at != ext_ids:
            raise MalformedGraph("every ext vertex needs exactly one leg")

    def validate(self) -> None:
        """Full closure check: every internal node has one edge of each colour
        1..D and exactly one colour-0 edge; ext vertices have exactly one
        colour-0 edge; hollow and solid node counts match."""
        degree = {v: {} for v in self.kinds}
        for c, h, s in self.edges:
            degree[h][c] = degree[h].get(c, 0) + 1
            degree[s][c] = degree[s].get(c, 0) + 1
        n_hollow = n_solid = 0
        for v, kind in self.kinds.items():
            d = degree[v]
            if kind == EXT:
                if d != {0: 1}:
                    raise MalformedGraph(f"ext vertex {v} needs exactly one colour-0 edge")
                continue
            n_hollow += kind == HOLLOW
            n_solid += kind == SOLID
            for c in range(1, self.D + 1):
                if d.get(c, 0) != 1:
                    raise MalformedGraph(f"vertex {v} needs exactly one colour-{c} edge")
            if d.get(0, 0) != 1:
                raise MalformedGraph(f"vertex {v} needs exactly one colour-0 edge")
        if n_hollow != n_solid:
            raise MalformedGraph("hollow/solid counts differ")
        self.bubbles()

    # -- derived structure ------------------------------------------------------

    def internal_ids(self) -> list[int]:
        return sorted(v for v, k in self.kinds.items() if k != EXT)

    def leg_by_label(self) -> dict[tuple[str, int], int]:
        return {(pol, label): at for label, pol, at in self.legs}

    @property
    def n_leg_pairs(self) -> int:
        return len(self.legs) // 2

    def bubbles(self) -> list[Bubble]:
        """Connected components of the coloured edges, one per interaction,
        sorted by smallest vertex id; corner pairing derived from the colour
        split at the smallest hollow node."""
        if self._bubbles is not None:
            return self._bubbles
        internal = self.internal_ids()
        idx = {v: i for i, v in enumerate(internal)}
        uf = UnionFind(len(internal))
        for c, h, s in self.edges:
            if c >= 1:
                uf.union(idx[h], idx[s])
        comps = {}
        for v in internal:
            comps.setdefault(uf.find(idx[v]), []).append(v)
        out = []
        for members in sorted(comps.values(), key=min):
            hollows = sorted(v for v in members if self.kinds[v] == HOLLOW)
            solids = sorted(v for v in members if self.kinds[v] == SOLID)
            if len(hollows) != 2 or len(solids) != 2:
                raise MalformedGraph("a quartic bubble needs two hollow and two solid nodes")
            h1 = hollows[0]
            groups = {}
            for c, h, s in self.edges:
                if c >= 1 and h == h1:
                    groups.setdefault(s, set()).add(c)
            if len(groups) != 2:
                raise MalformedGraph("bubble colours must split between the two solid nodes")
            (sa, A), (sb, B) = sorted(groups.items())
            if A | B != set(range(1, self.D + 1)) or A & B:
                raise MalformedGraph("bubble colour split must partition 1..D")
            C = canonicalise(A, self.D)
            s1 = sb if set(C.colours) == A else sa  # corner partner via complement colours
            s2 = sa if s1 == sb else sb
            h2 = hollows[1]
            g2 = {}
            for c, h, s in self.edges:
                if c >= 1 and h == h2:
                    g2.setdefault(s, set()).add(c)
            comp = set(range(1, self.D + 1)) - set(C.colours)
            if g2.get(s2) != comp or g2.get(s1) != set(C.colours):
                raise MalformedGraph("bubble wiring is not a quartic invariant")
            out.append(Bubble(len(out), C, h1, s1, h2, s2))
        self._bubbles = out
        return out

    def corner_partner(self) -> dict[int, int]:
        """hollow node -> the solid node sharing its corner pair (both ways)."""
        out = {}
        for b in self.bubbles():
            out[b.h1] = b.s1
            out[b.s1] = b.h1
            out[b.h2] = b.s2
            out[b.s2] = b.h2
        return out

    def internal_colour0_count(self) -> int:
        return sum(1 for c, h, s in self.edges if c == 0 and self.kinds[h] != EXT and self.kinds[s] != EXT)

    def is_connected(self) -> bool:
        ids = sorted(self.kinds)
        if not ids:
            return True
        idx = {v: i for i, v in enumerate(ids)}
        uf = UnionFind(len(ids))
        for c, h, s in self.edges:
            uf.union(idx[h], idx[s])
        return uf.count == 1

    # -- faces --------------------------------------------------------------------

    def faces(self) -> list[GraphFace]:
        if self._faces is not None:
            return self._faces
        # adjacency for colour 0 (undirected, at most one per vertex)
        zero_adj = {}
        for c, h, s in self.edges:
            if c == 0:
                for a, b in ((h, s), (s, h)):
                    if a in zero_adj:
                        raise MalformedGraph(f"vertex {a} has two colour-0 edges")
                    zero_adj[a] = b
        for v, kind in self.kinds.items():
            if v not in zero_adj:
                raise MalformedGraph(f"dangling colour-0 slot at vertex {v}")
        label_at = {at: (label, pol) for label, pol, at in self.legs}
        out = []
        for c in range(1, self.D + 1):
            c_adj = {}
            for cc, h, s in self.edges:
                if cc == c:
                    c_adj[h] = s
                    c_adj[s] = h
            seen = set()
            # external faces: start from each covariant leg
            for label, pol, at in sorted(self.legs):
                if pol != COVARIANT:
                    continue
                walk = [at]
                seen.add(at)
                v = zero_adj[at]
                while True:
                    walk.append(v)
                    seen.add(v)
                    if self.kinds[v] == EXT:
                        break
                    v = c_adj[v]
                    walk.append(v)
                    seen.add(v)
                    v = zero_adj[v]
                end_label, end_pol = label_at[walk[-1]]
                if end_pol != DUAL:
                    raise MalformedGraph("colour face must end on an opposite-polarity leg")
                out.append(GraphFace(c, tuple(walk), False, covariant_leg=label, dual_leg=end_label))
            # internal faces: closed (0,c) cycles on the rest
            for root in self.internal_ids():
                if root in seen:
                    continue
                walk = [root]
                seen.add(root)
                # leave root along colour 0 if hollow, else along colour c
                use_zero = self.kinds[root] == HOLLOW
                v = zero_adj[root] if use_zero else c_adj[root]
                while v != root:
                    walk.append(v)
                    seen.add(v)
                    use_zero = not use_zero
                    v = zero_adj[v] if use_zero else c_adj[v]
                out.append(GraphFace(c, tuple(walk), True))
        self._faces = out
        return out

    def internal_face_count(self) -> int:
        return sum(1 for f in self.faces() if f.internal)

    def face_counts_by_colour(self) -> dict[int, tuple[int, int]]:
        """colour -> (internal, external) face counts."""
        out = {c: [0, 0] for c in range(1, self.D + 1)}
        for f in self.faces():
            out[f.colour][0 if f.internal else 1] += 1
        return {c: tuple(v) for c, v in out.items()}

    # -- serialisation ---------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "D": self.D,
            "vertices": [{"id": v, "kind": self.kinds[v]} for v in sorted(self.kinds)],
            "edges": [{"c": c, "h": h, "s": s} for c, h, s in self.edges],
            "legs": [{"label": label, "pol": pol, "at": at} for label, pol, at in self.legs],
        }

    @staticmethod
    def from_json(obj: dict) -> "ColouredGraph":
        kinds = {v["id"]: v["kind"] for v in obj["vertices"]}
        edges = [(e["c"], e["h"], e["s"]) for e in obj["edges"]]
        legs = [(l["label"], l["pol"], l["at"]) for l in obj.get("legs", [])]
        return ColouredGraph(obj["D"], kinds, edges, legs)


def build_bubble(C: ColourSet, D: int, base_id: int = 0) -> ColouredGraph:
    """The 4-node graph of one quartic invariant, colour-0 slots left open.

    Nodes base_id..base_id+3 are h1, s1, h2, s2; complement colours join the
    corner pairs (h1,s1) and (h2,s2); the canonical colours cross."""
    if C.rank != D:
        raise InvalidColourSet("colour set rank differs from D")
    if not C.is_canonical:
        raise InvalidColourSet(f"interaction colour set must be canonical, got {C}")
    h1, s1, h2, s2 = base_id, base_id + 1, base_id + 2, base_id + 3
    kinds = {h1: HOLLOW, s1: SOLID, h2: HOLLOW, s2: SOLID}
    edges = []
    for c in range(1, D + 1):
        if c in C:
            edges.append((c, h1, s2))
            edges.append((c, h2, s1))
        else:
            edges.append((c, h1, s1))
            edges.append((c, h2, s2))
    return ColouredGraph(D, kinds, edges)


class GraphBuilder:
    """Incremental assembly: add bubbles and legs, wire colour-0 edges, build."""

    def __init__(self, D: int):
        self.D = D
        self.kinds = {}
        self.edges = []
        self.legs = []
        self._next = 0

    def add_bubble(self, C: ColourSet) -> Bubble:
        g = build_bubble(C, self.D, base_id=self._next)
        self.kinds.update(g.kinds)
        self.edges.extend(g.edges)
        b = Bubble(-1, C, self._next, self._next + 1, self._next + 2, self._next + 3)
        self._next += 4
        return b

    def add_leg(self, label: int, pol: str) -> int:
        v = self._next
        self._next += 1
        self.kinds[v] = EXT
        self.legs.append((label, pol, v))
        return v

    def wire(self, hollow_side: int, solid_side: int) -> None:
        """Add a propagator: hollow_side is a hollow node or covariant leg,
        solid_side a solid node or dual leg."""
        self.edges.append((0, hollow_side, solid_side))

    def build(self, validate: bool = True) -> ColouredGraph:
        g = ColouredGraph(self.D, self.kinds, self.edges, self.legs)
        if validate:
            g.validate()
        return g


def boundary_graph(g: ColouredGraph) -> BoundaryGraph:
    """Boundary data of a 2k-leg graph: tau[c](d) is the cilium label (dual
    label of the shared colour-0 path) of the covariant leg reached from dual
    leg d along the colour-c external face."""
    k2 = len(g.legs)
    if k2 == 0 or k2 % 2:
        raise MalformedGraph("boundary needs 2k legs")
    k = k2 // 2
    cov = sorted(label for label, pol, _ in g.legs if pol == COVARIANT)
    dual = sorted(label for label, pol, _ in g.legs if pol == DUAL)
    if cov != list(range(1, k + 1)) or dual != list(range(1, k + 1)):
        raise MalformedGraph("legs must be labelled 1..k per polarity")
    cilium_of_cov = _cilium_pairing(g)
    tau = []
    by_colour = {}
    for f in g.faces():
        if not f.internal:
            by_colour.setdefault(f.colour, {})[f.dual_leg] = f.covariant_leg
    for c in range(1, g.D + 1):
        t = [0] * k
        for d in range(1, k + 1):
            t[d - 1] = cilium_of_cov[by_colour[c][d]] - 1
        tau.append(tuple(t))
    return BoundaryGraph(k, tuple(tau))


def _cilium_pairing(g: ColouredGraph) -> dict[int, int]:
    """covariant leg label -> dual leg label sharing its colour-0 path
    (propagators alternating with bubble corners)."""
    zero_adj = {}
    for c, h, s in g.edges:
        if c == 0:
            zero_adj[h] = s
    corner = g.corner_partner()
    leg_at = {at: (label, pol) for label, pol, at in g.legs}
    out = {}
    for label, pol, at in g.legs:
        if pol != COVARIANT:
            continue
        v = zero_adj[at]  # first stop's solid node, or directly a dual leg
        while g.kinds[v] != EXT:
            v = zero_adj[corner[v]]
        out[label] = leg_at[v][0]
    return out


def invariant_amplitude(g: ColouredGraph, model: ModelSpec) -> SeriesTerm:
    """Exact amplitude of a closed (or 2k-leg) graph under the identity
    covariance: (-1)^B * prod couplings * N^(F_int + sum alpha)."""
    if model.is_field_theory:
        raise UnsupportedModel("exact amplitudes need the identity covariance")
    if model.D != g.D:
        raise MalformedGraph("model rank differs from graph rank")
    degrees = {}
    expo = g.internal_face_count() if g.kinds else 0
    B = 0
    for b in g.bubbles():
        if b.colour_set not in model.interactions:
            raise UnsupportedModel(f"bubble {b.colour_set} not in the model")
        name = model.coupling_name(b.colour_set)
        degrees[name] = degrees.get(name, 0) + 1
        expo += model.alpha(b.colour_set)
        B += 1
    return SeriesTerm.make(degrees, expo, (-1) ** B)
