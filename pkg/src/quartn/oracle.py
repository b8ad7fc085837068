"""Brute-force Gaussian moments by explicit Wick pairing, plus an exact
finite verifier for the forest interpolation formula.

This module never builds maps or coloured graphs: a moment is evaluated by
enumerating slot pairings and tracing delta chains through index positions.
Closed chains contribute one factor N each; open chains end on external legs,
and the moment decomposes over the resulting external index patterns.  That
every realised pattern matches colours pairwise (i.e. is a boundary graph) is
an empirical outcome of the trace, not an assumption, which is what makes the
vanishing checks meaningful.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .errors import BudgetExceeded, TruncationMismatch
from ._util import UnionFind
from .colours import BoundaryGraph, ModelSpec
from .maps import SeriesTerm
from .series import FormalSeries, series_log

ORACLE_MAX_ORDER = 3
ORACLE_MAX_LEGS = 2
ORACLE_MAX_RANK = 4


@dataclass(frozen=True)
class PairingExpansion:
    """One Wick term: bubble types, the slot bijection, the closed-loop count,
    and the external chain pattern it induces."""

    order: int
    bubbles: tuple
    pairing: tuple
    loops: int
    pattern: frozenset


@dataclass(frozen=True)
class PinnedLegs:
    """An explicit external index structure: links pair T slots with T-bar
    slots, entries (((t_leg, colour), (tbar_leg, colour')), ...), legs and
    colours 1-based, covering every external slot exactly once."""

    k: int
    links: tuple

    def validate(self, D: int) -> None:
        t_seen = set()
        s_seen = set()
        for (j, c), (j2, c2) in self.links:
            if not (1 <= j <= self.k and 1 <= j2 <= self.k):
                raise TruncationMismatch("pinned leg out of range")
            if not (1 <= c <= D and 1 <= c2 <= D):
                raise TruncationMismatch("pinned colour out of range")
            t_seen.add((j, c))
            s_seen.add((j2, c2))
        if len(t_seen) != self.k * D or len(s_seen) != self.k * D:
            raise TruncationMismatch("pinned structure must cover all slots once")

    def pattern(self) -> frozenset:
        return frozenset(self.links)

    @staticmethod
    def from_boundary(b: BoundaryGraph) -> "PinnedLegs":
        links = []
        for c0, t in enumerate(b.tau):
            for j in range(b.k):
                links.append(((j + 1, c0 + 1), (t[j] + 1, c0 + 1)))
        return PinnedLegs(b.k, tuple(links))


@dataclass
class MomentDecomposition:
    """Symbolic moment: series per external chain pattern (frozenset of
    ((t_leg, colour), (tbar_leg, colour')) chain endpoints)."""

    order: int
    k: int
    D: int
    by_pattern: dict = field(default_factory=dict)

    def series_for(self, structure) -> FormalSeries:
        if isinstance(structure, BoundaryGraph):
            structure = PinnedLegs.from_boundary(structure)
        if isinstance(structure, PinnedLegs):
            structure = structure.pattern()
        return self.by_pattern.get(structure, FormalSeries())

    def boundaries(self) -> dict:
        """Patterns reinterpreted as boundary graphs; raises if any realised
        pattern mixes colours (none should)."""
        out = {}
        for pattern, s in self.by_pattern.items():
            cols = {}
            for (j, c), (j2, c2) in pattern:
                if c != c2:
                    raise AssertionError(f"colour-mixing pattern realised: {pattern}")
                cols[(c, j)] = j2
            tau = tuple(tuple(cols[(c, j)] - 1 for j in range(1, self.k + 1))
                        for c in range(1, self.D + 1))
            out[BoundaryGraph(self.k, tau)] = s
        return out


def _guard(spec: ModelSpec, b: int, k: int) -> None:
    if b > ORACLE_MAX_ORDER or k > ORACLE_MAX_LEGS or spec.D > ORACLE_MAX_RANK:
        raise BudgetExceeded(
            f"oracle guard: order <= {ORACLE_MAX_ORDER}, legs <= {ORACLE_MAX_LEGS}, "
            f"rank <= {ORACLE_MAX_RANK}")


def _trace(D: int, bubbles, pairing, k: int, pinned_links):
    """Trace all delta chains for one pairing.

    Factors: T side 0..2b-1 are bubble hollow corners (bubble i owns factors
    2i, 2i+1), then k external T legs; the T-bar side mirrors it.  Position
    ids: T (factor f, colour c) -> f*D + c-1, T-bar offset by (2b+k)*D.
    Returns (closed loop count, chains) where each chain is the list of
    external positions in one open component.
    """
    b = len(bubbles)
    nf = 2 * b + k
    off = nf * D
    uf = UnionFind(2 * nf * D)
    for i, C in enumerate(bubbles):
        ha, hb = 2 * i, 2 * i + 1
        for c in range(1, D + 1):
            if c in C:
                uf.union(ha * D + c - 1, off + hb * D + c - 1)
                uf.union(hb * D + c - 1, off + ha * D + c - 1)
            else:
                uf.union(ha * D + c - 1, off + ha * D + c - 1)
                uf.union(hb * D + c - 1, off + hb * D + c - 1)
    for f, g in enumerate(pairing):
        base_t = f * D
        base_s = off + g * D
        for c in range(D):
            uf.union(base_t + c, base_s + c)
    if pinned_links is not None:
        for (j, c), (j2, c2) in pinned_links:
            uf.union((2 * b + j - 1) * D + c - 1,
                     off + (2 * b + j2 - 1) * D + c2 - 1)
    comps = {}
    for pos in range(2 * nf * D):
        comps.setdefault(uf.find(pos), []).append(pos)
    loops = 0
    chains = []
    ext_lo = 2 * b * D
    for members in comps.values():
        ext = [p for p in members
               if (p < off and p >= ext_lo) or p >= off + ext_lo]
        if not ext:
            loops += 1
        else:
            chains.append(ext)
    return loops, chains


def _chain_pattern(chains, b: int, k: int, D: int) -> frozenset:
    """Symbolic mode: each open chain must join exactly one T slot to one
    T-bar slot; encode the set of endpoint pairs."""
    off = (2 * b + k) * D
    ext_lo = 2 * b * D
    links = []
    for ext in chains:
        if len(ext) != 2:
            raise AssertionError("open chain without exactly two endpoints")
        a, z = sorted(ext)
        if a >= off or z < off:
            raise AssertionError("open chain endpoints on one side")
        ja, ca = divmod(a - ext_lo, D)
        jz, cz = divmod(z - off - ext_lo, D)
        links.append(((ja + 1, ca + 1), (jz + 1, cz + 1)))
    return frozenset(links)


def _bubble_prefactor(spec: ModelSpec, bubbles) -> SeriesTerm:
    degrees = {}
    shift = Fraction(0)
    for C in bubbles:
        name = spec.coupling_name(C)
        degrees[name] = degrees.get(name, 0) + 1
        shift += spec.alpha(C)
    sign = (-1) ** len(bubbles)
    return SeriesTerm.make(degrees, shift, Fraction(sign, factorial(len(bubbles))))


def oracle_moment(spec: ModelSpec, b: int, legs):
    """Order-b Wick moment.

    legs: an int k gives the symbolic moment as a MomentDecomposition over
    external index patterns; a PinnedLegs fully traces the external indices
    (each pinned chain closes into a loop) and returns one FormalSeries.
    """
    pinned = isinstance(legs, PinnedLegs)
    k = legs.k if pinned else int(legs)
    _guard(spec, b, k)
    if pinned:
        legs.validate(spec.D)
        links = legs.links
        out = FormalSeries(observable=f"pinned moment k={k}")
    else:
        links = None
        out = MomentDecomposition(b, k, spec.D)
    nf = 2 * b + k
    D = spec.D
    for bubbles in itertools.product(spec.interactions, repeat=b):
        pre = _bubble_prefactor(spec, bubbles)
        for pairing in itertools.permutations(range(nf)):
            loops, chains = _trace(D, bubbles, pairing, k, links)
            if pinned:
                out.add_term(SeriesTerm(pre.coupling_degrees,
                                        pre.n_exponent + loops + len(chains),
                                        pre.coefficient))
            else:
                pattern = _chain_pattern(chains, b, k, D)
                s = out.by_pattern.get(pattern)
                if s is None:
                    s = out.by_pattern[pattern] = FormalSeries()
                s.add_term(SeriesTerm(pre.coupling_degrees,
                                      pre.n_exponent + loops,
                                      pre.coefficient))
    return out


def oracle_partition_function(spec: ModelSpec, order: int) -> FormalSeries:
    """Vacuum generating polynomial through coupling order."""
    _guard(spec, order, 0)
    out = FormalSeries.constant(1, observable="partition_function",
                                truncation=order)
    for b in range(1, order + 1):
        dec = oracle_moment(spec, b, 0)
        out = out + dec.series_for(frozenset())
    return out


def oracle_free_energy(spec: ModelSpec, order: int) -> FormalSeries:
    """Connected vacuum polynomial: formal log of the partition function."""
    z = oracle_partition_function(spec, order)
    f = series_log(z, order)
    f.observable = "free_energy"
    return f


def series_inverse(s: FormalSeries, order: int) -> FormalSeries:
    """1/s for a series with constant term 1, through total degree order."""
    if s.coefficient({}, 0) != 1:
        raise TruncationMismatch("inverse needs constant term exactly 1")
    neg = FormalSeries.constant(1) - s
    neg.truncation = order
    out = FormalSeries.constant(1, truncation=order)
    power = FormalSeries.constant(1, truncation=order)
    for _ in range(order):
        power = power * neg
        if not power.terms:
            break
        out = out + power
    return out


def oracle_cumulant(spec: ModelSpec, order: int, boundary: BoundaryGraph) -> FormalSeries:
    """Connected moment with the given boundary index structure: the
    pattern-graded unnormalised moment divided by the partition function."""
    _guard(spec, order, boundary.k)
    pattern = PinnedLegs.from_boundary(boundary).pattern()
    num = FormalSeries(truncation=order)
    for b in range(order + 1):
        dec = oracle_moment(spec, b, boundary.k)
        num = num + dec.series_for(pattern)
    out = num * series_inverse(oracle_partition_function(spec, order), order)
    out.truncation = order
    out.observable = f"cumulant(k={boundary.k})"
    return out


def oracle_vanishing_check(spec: ModelSpec, b: int, structure: PinnedLegs) -> bool:
    """True iff the coefficient of the given external index structure is
    exactly zero in every moment of order <= b."""
    structure.validate(spec.D)
    target = structure.pattern()
    for order in range(b + 1):
        dec = oracle_moment(spec, order, structure.k)
        s = dec.by_pattern.get(target)
        if s is not None and s.terms:
            return False
    return True


# -- forest interpolation formula ---------------------------------------------


def complete_graph_edges(n: int) -> tuple:
    return tuple((i, j) for i in range(n) for j in range(i + 1, n))


@dataclass
class EdgePolynomial:
    """Polynomial in the edge variables of K_n: terms maps exponent tuples
    (one slot per edge of K_n, edges in complete_graph_edges order) to exact
    coefficients."""

    n: int
    terms: dict

    def __post_init__(self):
        self.terms = {tuple(e): Fraction(c) for e, c in self.terms.items()
                      if Fraction(c)}

    @property
    def edges(self) -> tuple:
        return complete_graph_edges(self.n)

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def diff(self, var: int) -> "EdgePolynomial":
        out = {}
        for exps, c in self.terms.items():
            a = exps[var]
            if a:
                e2 = list(exps)
                e2[var] = a - 1
                key = tuple(e2)
                out[key] = out.get(key, Fraction(0)) + c * a
        return EdgePolynomial(self.n, out)

    def at_ones(self) -> Fraction:
        return sum(self.terms.values(), Fraction(0))


def _forests(n: int):
    """All acyclic edge subsets of K_n, the empty one included."""
    edges = complete_graph_edges(n)
    for mask in range(1 << len(edges)):
        uf = UnionFind(n)
        ok = True
        sub = []
        for pos, (i, j) in enumerate(edges):
            if mask >> pos & 1:
                if not uf.union(i, j):
                    ok = False
                    break
                sub.append(pos)
        if ok:
            yield tuple(sub)


def _path_assignment(n: int, forest, edges):
    """For each K_n edge var: the list of forest-edge slots on the forest path
    between its endpoints (empty list = same vertex impossible; None =
    disconnected, variable evaluates to 0)."""
    adj = {v: [] for v in range(n)}
    for slot, pos in enumerate(forest):
        i, j = edges[pos]
        adj[i].append((j, slot))
        adj[j].append((i, slot))

    def path(a, b):
        prev = {a: (None, None)}
        stack = [a]
        while stack:
            x = stack.pop()
            if x == b:
                break
            for y, slot in adj[x]:
                if y not in prev:
                    prev[y] = (x, slot)
                    stack.append(y)
        if b not in prev:
            return None
        out = []
        x = b
        while prev[x][0] is not None:
            out.append(prev[x][1])
            x = prev[x][0]
        return out

    return [path(i, j) for (i, j) in edges]


def _integrate_cell(monomials, order):
    """Exactly integrate a polynomial in u-slots over the simplex cell
    u_{order[0]} <= u_{order[1]} <= ... <= 1; monomials maps exponent tuples
    (len = number of slots) to coefficients."""
    current = dict(monomials)
    for idx, slot in enumerate(order):
        nxt = {}
        receiver = order[idx + 1] if idx + 1 < len(order) else None
        for exps, c in current.items():
            a = exps[slot]
            c2 = c / (a + 1)
            e2 = list(exps)
            e2[slot] = 0
            if receiver is not None:
                e2[receiver] += a + 1
            key = tuple(e2)
            nxt[key] = nxt.get(key, Fraction(0)) + c2
        current = nxt
    return sum(current.values(), Fraction(0))


def forest_formula_check(f: EdgePolynomial) -> Fraction:
    """Evaluate the forest interpolation sum exactly and return the absolute
    residual against f(1,...,1); must be 0.

    Sum over forests F of K_n of the iterated integral of (prod_{e in F}
    d/dx_e f) evaluated at the min-over-path interpolation point w^F(u);
    each cell of the u-ordering makes every substituted variable a single
    coordinate, so the integrand is a polynomial integrated in rationals.
    """
    n = f.n
    edges = f.edges
    if n > 4 or f.total_degree() > 4:
        raise BudgetExceeded("forest formula guard: n <= 4, degree <= 4")
    total = Fraction(0)
    for forest in _forests(n):
        g = f
        for pos in forest:
            g = g.diff(pos)
            if not g.terms:
                break
        if not g.terms:
            continue
        paths = _path_assignment(n, forest, edges)
        slots = len(forest)
        # substitute each variable by the min of its path coordinates; in a
        # fixed ordering cell the min is the path edge of lowest rank
        if slots == 0:
            for exps, c in g.terms.items():
                if all(a == 0 for a in exps):
                    total += c
            continue
        for perm in itertools.permutations(range(slots)):
            rank = [0] * slots
            for r, slot in enumerate(perm):
                rank[slot] = r
            cell = {}
            dead = False
            for exps, c in g.terms.items():
                uexp = [0] * slots
                ok = True
                for var, a in enumerate(exps):
                    if not a:
                        continue
                    p = paths[var]
                    if p is None or len(p) == 0:
                        ok = False  # disconnected endpoints: variable is 0
                        break
                    best = min(p, key=lambda s: rank[s])
                    uexp[best] += a
                if ok:
                    key = tuple(uexp)
                    cell[key] = cell.get(key, Fraction(0)) + c
            if cell:
                total += _integrate_cell(cell, perm)
    return abs(total - f.at_ones())


def forest_weight_matrix(n: int, forest, u_values):
    """The interpolation matrix w^F at parameters u: w_ij = min of u over the
    forest path i..j (0 if disconnected), w_ii = 1."""
    edges = complete_graph_edges(n)
    paths = _path_assignment(n, forest, edges)
    w = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        w[i][i] = Fraction(1)
    for var, (i, j) in enumerate(edges):
        p = paths[var]
        if p is None:
            val = Fraction(0)
        elif not p:
            val = Fraction(1)
        else:
            val = min(Fraction(u_values[s]) for s in p)
        w[i][j] = w[j][i] = val
    return w
