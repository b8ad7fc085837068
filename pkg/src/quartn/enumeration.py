"""Exhaustive map generation and plane-tree generators with count formulas.

Labelled-map streams: every map with labelled edges 1..E and labelled cilia
1..k appears exactly once, weight 1/E!.

Plane trees come in two streams:
  * rooted (k >= 1): canonically rooted at cilium 1, vertices unlabelled,
    remaining cilia labelled 2..k; mono-coloured counts are Catalan
    (q^n C_n at k = 1).
  * labelled: vertices labelled 1..v, cilia unlabelled corner marks on
    distinct vertices; counts match count_trees_closed_form.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .errors import BudgetExceeded, InvalidColourSet
from ._util import cycles_to_perm
from .colours import ModelSpec
from .maps import StrandedMap

DEFAULT_EDGE_GUARD = 7


@dataclass(frozen=True)
class EnumSpec:
    """What to enumerate: edge count, cilium count, interaction set."""

    model: ModelSpec
    edges: int
    cilia: int = 0
    connected_only: bool = True
    vacuum: bool = False
    edge_guard: int = DEFAULT_EDGE_GUARD
    accept_blowup: bool = False

    def __post_init__(self):
        if self.edges < 0 or self.cilia < 0:
            raise InvalidColourSet("edges and cilia must be nonnegative")
        if self.vacuum and self.cilia:
            raise InvalidColourSet("vacuum enumeration has no cilia")


def enumerate_maps(s: EnumSpec):
    """Stream (map, weight) over all labelled maps for the enum spec."""
    if s.edges > s.edge_guard and not s.accept_blowup:
        raise BudgetExceeded(
            f"edge count {s.edges} above guard {s.edge_guard}; "
            "set accept_blowup to proceed"
        )
    E, k = s.edges, s.cilia
    n = 2 * E + k
    weight = Fraction(1, factorial(E))
    twoE = 2 * E
    for colours in itertools.product(s.model.interactions, repeat=E):
        for sigma in itertools.permutations(range(n)):
            if not _valid_cilia(sigma, twoE):
                continue
            m = StrandedMap(s.model.D, colours, k, sigma)
            if s.connected_only and not m.is_connected():
                continue
            yield m, weight


def _valid_cilia(sigma, twoE: int) -> bool:
    """At most one cilium (dart >= twoE) per sigma-cycle."""
    n = len(sigma)
    if n - twoE <= 1:
        return True
    seen = [False] * n
    for start in range(twoE, n):
        if seen[start]:
            continue
        count = 0
        x = start
        while not seen[x]:
            seen[x] = True
            if x >= twoE:
                count += 1
            x = sigma[x]
        if count > 1:
            return False
    return True


def count_maps(s: EnumSpec) -> int:
    return sum(1 for _ in enumerate_maps(s))


# -- closed-form tree counts ---------------------------------------------------


def count_trees_closed_form(v: int, k: int, q: int) -> int:
    """Vertex-labelled plane trees with q edge colours and k unlabelled
    corner cilia on distinct vertices."""
    if v < 1 or k < 0 or k > v or q < 0:
        raise InvalidColourSet("need v >= 1, 0 <= k <= v, q >= 0")
    if v == 1:
        return 1  # bare or singly ciliated point, no edges to colour
    if k == 0:
        return q ** (v - 1) * factorial(2 * v - 3) // factorial(v - 1)
    num = factorial(v) * factorial(2 * v + k - 3)
    den = factorial(k) * factorial(v - k) * factorial(v + k - 1)
    return q ** (v - 1) * num // den


def count_trees_rooted(v: int, k: int, q: int) -> int:
    """Trees rooted at cilium 1 with cilia 2..k labelled: the vertex-labelled
    count divided by v!/k!."""
    if k < 1 or k > v:
        raise InvalidColourSet("rooted counting needs 1 <= k <= v")
    if v == 1:
        return 1
    num = factorial(2 * v + k - 3)
    den = factorial(v - k) * factorial(v + k - 1)
    return q ** (v - 1) * num // den


def catalan(n: int) -> int:
    return factorial(2 * n) // (factorial(n) * factorial(n + 1))


def rooted_tree_count_recursive(n: int, q: int) -> int:
    """q^n C_n by the root-split recurrence T(n) = q * sum T(i) T(n-1-i)."""
    T = [0] * (n + 1)
    T[0] = 1
    for m in range(1, n + 1):
        T[m] = q * sum(T[i] * T[m - 1 - i] for i in range(m))
    return T[n]


# -- plane-tree generation -----------------------------------------------------


@dataclass(frozen=True)
class PlaneTree:
    """One generated tree.  In labelled mode vertex_labels[d] is the label of
    the vertex owning dart d (the map itself does not carry vertex labels, so
    distinct labelled trees may share a map); rooted mode leaves it empty."""

    map: StrandedMap
    vertex_labels: tuple[int, ...] = ()


def enumerate_plane_trees(v: int, k: int, interactions, mode: str = "rooted"):
    """Stream PlaneTree records; see module docstring for the two modes.
    k = 0 always uses labelled mode."""
    interactions = tuple(interactions)
    if v < 1 or k < 0 or k > v:
        raise InvalidColourSet("need v >= 1 and 0 <= k <= v")
    if v > 1 and not interactions:
        raise InvalidColourSet("need at least one edge colour set")
    D = interactions[0].rank if interactions else 1
    if k == 0:
        mode = "labelled"
    if mode == "rooted":
        if k < 1:
            raise InvalidColourSet("rooted mode needs k >= 1")
        yield from _rooted_trees(v, k, D, interactions)
    elif mode == "labelled":
        yield from _labelled_trees(v, k, D, interactions)
    else:
        raise InvalidColourSet(f"unknown tree mode {mode!r}")


def count_plane_trees(v: int, k: int, interactions, mode: str = "rooted") -> int:
    return sum(1 for _ in enumerate_plane_trees(v, k, interactions, mode))


def _shapes(v: int):
    """Rooted plane tree shapes with v vertices: tuple of child shapes."""
    if v == 1:
        yield ()
        return
    yield from _forests(v - 1)


def _forests(v: int):
    """Ordered nonempty-or-empty forests of rooted shapes, v vertices total."""
    if v == 0:
        yield ()
        return
    for first in range(1, v + 1):
        for head in _shapes(first):
            for tail in _forests(v - first):
                yield (head,) + tail


def _shape_adjacency(shape):
    """Flatten a shape: adj[u] = list of (edge, child) in plane order, edges
    numbered in depth-first discovery order; vertex 0 is the root."""
    children = []

    def build(sh):
        me = len(children)
        children.append([])
        for ch in sh:
            children[me].append(build(ch))
        return me

    build(shape)
    out = [[] for _ in children]
    counter = [0]

    def number(u):
        for ch in children[u]:
            e = counter[0]
            counter[0] += 1
            out[u].append((e, ch))
            number(ch)

    number(0)
    return out


def _parents(adj):
    par = [(-1, -1)] * len(adj)  # vertex -> (edge, parent)
    for u, items in enumerate(adj):
        for e, ch in items:
            par[ch] = (e, u)
    return par


def _assemble_tree(D, adj, colours, k, cilium_at):
    """Build the map: edge e has darts 2e (parent side) and 2e+1 (child side);
    each vertex cycle lists its darts in plane order starting at the parent
    dart, with cilia spliced in at their corner index."""
    E = sum(len(a) for a in adj)
    par = _parents(adj)
    twoE = 2 * E
    cycles = []
    bare = 0
    for u in range(len(adj)):
        darts = []
        if par[u][1] >= 0:
            darts.append(2 * par[u][0] + 1)
        for e, _ in adj[u]:
            darts.append(2 * e)
        if u in cilium_at:
            z, corner = cilium_at[u]
            if not darts:
                cycles.append((twoE + z,))
                continue
            corner %= len(darts)
            darts = darts[corner:] + darts[:corner]
            cycles.append((twoE + z,) + tuple(darts))
        elif darts:
            cycles.append(tuple(darts))
        else:
            bare += 1
    sigma = cycles_to_perm(twoE + k, cycles)
    return StrandedMap(D, colours, k, sigma, bare_vertices=bare)


def _rooted_trees(v: int, k: int, D: int, interactions):
    E = v - 1
    for shape in _shapes(v):
        adj = _shape_adjacency(shape)
        deg = [len(adj[u]) + (0 if u == 0 else 1) for u in range(v)]
        for verts in itertools.permutations(range(1, v), k - 1):
            for corners in itertools.product(*[range(deg[u]) for u in verts]):
                cilium_at = {0: (0, 0)}
                for j, (u, c) in enumerate(zip(verts, corners)):
                    cilium_at[u] = (1 + j, c)
                for colours in itertools.product(interactions, repeat=E):
                    yield PlaneTree(_assemble_tree(D, adj, colours, k, cilium_at))


def _labelled_trees(v: int, k: int, D: int, interactions):
    E = v - 1
    for adj in _labelled_plane_adjacencies(v):
        deg = [len(adj[u]) + (0 if u == 0 else 1) for u in range(v)]
        owner = [0] * (2 * E + k)
        for u, items in enumerate(adj):
            for e, ch in items:
                owner[2 * e] = u + 1
                owner[2 * e + 1] = ch + 1
        for vert_set in itertools.combinations(range(v), k):
            # unlabelled cilia: canonical labels 1..k in vertex-label order
            for j, u in enumerate(vert_set):
                owner[2 * E + j] = u + 1
            for corners in itertools.product(*[range(max(deg[u], 1)) for u in vert_set]):
                cilium_at = {u: (j, c) for j, (u, c) in enumerate(zip(vert_set, corners))}
                for colours in itertools.product(interactions, repeat=E):
                    yield PlaneTree(
                        _assemble_tree(D, adj, colours, k, cilium_at),
                        vertex_labels=tuple(owner),
                    )


def _labelled_plane_adjacencies(v: int):
    """All vertex-labelled plane trees rooted at vertex 0: each labelled tree
    with every choice of cyclic dart order per vertex.  Non-root vertices keep
    the parent dart first, so their orders are the (deg-1)! child orderings;
    the root fixes its first child to break the cyclic symmetry."""
    if v == 1:
        yield [[]]
        return
    for tree_adj in _labelled_trees_raw(v):
        children = [[] for _ in range(v)]
        seen = [False] * v
        order = [0]
        seen[0] = True
        for u in order:
            for w in tree_adj[u]:
                if not seen[w]:
                    seen[w] = True
                    children[u].append(w)
                    order.append(w)
        per_vertex = []
        for u in range(v):
            ch = children[u]
            if u == 0 and ch:
                per_vertex.append([(ch[0],) + rest
                                   for rest in itertools.permutations(ch[1:])])
            else:
                per_vertex.append(list(itertools.permutations(ch)))
        for combo in itertools.product(*per_vertex):
            adj = [[] for _ in range(v)]
            counter = [0]

            def number(u):
                for w in combo[u]:
                    e = counter[0]
                    counter[0] += 1
                    adj[u].append((e, w))
                    number(w)

            number(0)
            yield adj


def _labelled_trees_raw(v: int):
    """Adjacency lists of all trees on v labelled vertices (Prufer decode)."""
    if v == 1:
        yield [[]]
        return
    if v == 2:
        yield [[1], [0]]
        return
    for seq in itertools.product(range(v), repeat=v - 2):
        deg = [1] * v
        for x in seq:
            deg[x] += 1
        adj = [[] for _ in range(v)]
        leaves = [u for u in range(v) if deg[u] == 1]
        heapq.heapify(leaves)
        for x in seq:
            leaf = heapq.heappop(leaves)
            adj[leaf].append(x)
            adj[x].append(leaf)
            deg[x] -= 1
            if deg[x] == 1:
                heapq.heappush(leaves, x)
        u = heapq.heappop(leaves)
        w = heapq.heappop(leaves)
        adj[u].append(w)
        adj[w].append(u)
        yield adj
