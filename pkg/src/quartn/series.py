"""Exact coupling/N bigraded series assembled from map enumeration, plus the
closed-form resummations they truncate (melonic two-point function, vacuum
self-consistency roots) and the exp/log connected-object relation."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .errors import TruncationMismatch
from ._util import perm_compose, perm_inverse, identity_perm
from .colours import BoundaryGraph, ModelSpec
from .enumeration import EnumSpec, catalan, enumerate_maps, enumerate_plane_trees
from .maps import SeriesTerm, StrandedMap, map_amplitude, map_boundary, omega_min

LABELLED = "labelled"      # weight 1/E!, matches the raw pairing expansion
UNLABELLED = "unlabelled"  # weight 1/(E! 2^E), matches unlabelled-map counting


@dataclass
class FormalSeries:
    """terms: (coupling multidegree, N-exponent) -> exact coefficient.
    Multidegree is a sorted tuple of (coupling name, power); zero coefficients
    are never stored."""

    terms: dict = field(default_factory=dict)
    observable: str = ""
    model_desc: str = ""
    truncation: int | None = None

    @staticmethod
    def constant(value, observable: str = "", truncation: int | None = None) -> "FormalSeries":
        s = FormalSeries(observable=observable, truncation=truncation)
        v = Fraction(value)
        if v:
            s.terms[((), Fraction(0))] = v
        return s

    def copy(self) -> "FormalSeries":
        return FormalSeries(dict(self.terms), self.observable, self.model_desc, self.truncation)

    def add_term(self, term: SeriesTerm, weight=1) -> None:
        key = (term.coupling_degrees, term.n_exponent)
        c = self.terms.get(key, Fraction(0)) + Fraction(weight) * term.coefficient
        if c:
            self.terms[key] = c
        else:
            self.terms.pop(key, None)

    def coefficient(self, degrees, n_exponent) -> Fraction:
        degs = tuple(sorted((k, v) for k, v in dict(degrees).items() if v))
        return self.terms.get((degs, Fraction(n_exponent)), Fraction(0))

    def coefficients_of_degree(self, total: int) -> dict:
        return {k: v for k, v in self.terms.items() if sum(d for _, d in k[0]) == total}

    def max_n_exponent(self):
        return max((k[1] for k in self.terms), default=None)

    def min_n_exponent(self):
        return min((k[1] for k in self.terms), default=None)

    def __add__(self, other: "FormalSeries") -> "FormalSeries":
        out = self.copy()
        out.truncation = _merge_trunc(self.truncation, other.truncation)
        for key, c in other.terms.items():
            s = out.terms.get(key, Fraction(0)) + c
            if s:
                out.terms[key] = s
            else:
                out.terms.pop(key, None)
        return out

    def __neg__(self) -> "FormalSeries":
        return FormalSeries({k: -v for k, v in self.terms.items()},
                            self.observable, self.model_desc, self.truncation)

    def __sub__(self, other: "FormalSeries") -> "FormalSeries":
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, FormalSeries):
            out = FormalSeries(observable=self.observable,
                               model_desc=self.model_desc, truncation=self.truncation)
            v = Fraction(other)
            if v:
                out.terms = {k: c * v for k, c in self.terms.items()}
            return out
        trunc = _merge_trunc(self.truncation, other.truncation)
        out = FormalSeries(observable=self.observable,
                           model_desc=self.model_desc, truncation=trunc)
        for (da, na), ca in self.terms.items():
            for (db, nb), cb in other.terms.items():
                degs = _merge_degrees(da, db)
                if trunc is not None and sum(v for _, v in degs) > trunc:
                    continue
                key = (degs, na + nb)
                s = out.terms.get(key, Fraction(0)) + ca * cb
                if s:
                    out.terms[key] = s
                else:
                    out.terms.pop(key, None)
        return out

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, FormalSeries) and self.terms == other.terms

    def evaluate(self, couplings: dict, N) -> complex:
        """Numeric substitution; couplings maps name -> value."""
        total = 0
        for (degs, ne), c in self.terms.items():
            v = complex(c)
            for name, p in degs:
                v *= couplings[name] ** p
            v *= complex(N) ** float(ne)
            total += v
        return total

    def rows(self):
        """Sorted report rows: (degrees string, N-exponent, numerator, denominator)."""
        def key(item):
            (degs, ne), _ = item
            return (sum(v for _, v in degs), degs, -ne)
        out = []
        for (degs, ne), c in sorted(self.terms.items(), key=key):
            dstr = " ".join(f"{n}^{p}" if p != 1 else n for n, p in degs) or "1"
            out.append((dstr, str(ne), c.numerator, c.denominator))
        return out


def _merge_trunc(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _merge_degrees(da, db):
    d = dict(da)
    for name, p in db:
        d[name] = d.get(name, 0) + p
    return tuple(sorted((k, v) for k, v in d.items() if v))


def series_exp(s: FormalSeries, order: int) -> FormalSeries:
    """exp of a series with no constant term, truncated at total degree order."""
    if s.coefficient({}, 0):
        raise TruncationMismatch("exp needs a vanishing constant term")
    out = FormalSeries.constant(1, truncation=order)
    power = FormalSeries.constant(1, truncation=order)
    base = s.copy()
    base.truncation = order
    for m in range(1, order + 1):
        power = power * base
        if not power.terms:
            break
        out = out + power * Fraction(1, factorial(m))
    out.truncation = order
    return out


def series_log(s: FormalSeries, order: int) -> FormalSeries:
    """log of a series with constant term 1, truncated at total degree order."""
    if s.coefficient({}, 0) != 1:
        raise TruncationMismatch("log needs constant term exactly 1")
    x = s - FormalSeries.constant(1)
    x.truncation = order
    out = FormalSeries(truncation=order)
    power = FormalSeries.constant(1, truncation=order)
    for m in range(1, order + 1):
        power = power * x
        if not power.terms:
            break
        out = out + power * Fraction((-1) ** (m + 1), m)
    out.truncation = order
    return out


# -- assembly from enumeration ---------------------------------------------------


FREE_ENERGY = "free_energy"


def assemble_series(observable, spec: ModelSpec, order: int,
                    normalisation: str | None = None,
                    connected_only: bool = True,
                    edge_guard: int | None = None,
                    accept_blowup: bool = False) -> FormalSeries:
    """Sum weighted amplitudes of enumerated maps through coupling order.

    observable: FREE_ENERGY for vacuum maps, or a BoundaryGraph for the
    cumulant kernel with that boundary (k from the boundary; only maps whose
    traced boundary matches contribute).  The free-energy series starts at
    order 1; a cumulant series includes the order-0 bare term when the
    boundary is reachable with no edges.

    normalisation: LABELLED weights each labelled map by 1/E! (the raw pairing
    expansion, what the brute-force oracle reproduces); UNLABELLED divides a
    further 2^E, which for ciliated maps equals counting unlabelled maps with
    weight 1 (a cilium forbids automorphisms).  Default: LABELLED for the free
    energy, UNLABELLED for cumulants, matching the usual statements of each.
    """
    if isinstance(observable, BoundaryGraph):
        k = observable.k
        desc = f"cumulant(k={k})"
        target = observable
        if normalisation is None:
            normalisation = UNLABELLED
    elif observable == FREE_ENERGY:
        k = 0
        desc = FREE_ENERGY
        target = None
        if normalisation is None:
            normalisation = LABELLED
    else:
        raise TruncationMismatch(f"unknown observable {observable!r}")
    out = FormalSeries(observable=desc, model_desc=f"D={spec.D},{spec.scaling}",
                       truncation=order)
    for E in range(0 if target is not None else 1, order + 1):
        kwargs = {}
        if edge_guard is not None:
            kwargs["edge_guard"] = edge_guard
        es = EnumSpec(spec, E, k, connected_only=connected_only,
                      vacuum=(target is None), accept_blowup=accept_blowup, **kwargs)
        for m, w in enumerate_maps(es):
            if target is not None and map_boundary(m) != target:
                continue
            if normalisation == UNLABELLED:
                w = w / 2 ** E
            out.add_term(map_amplitude(m, spec), w)
    return out


def assert_n_exponent_bound(series: FormalSeries, boundary: BoundaryGraph | None,
                            spec: ModelSpec) -> None:
    """Every stored N-exponent is at most -omega_min of the observable."""
    bound = -omega_min(boundary, spec)
    top = series.max_n_exponent()
    if top is not None and top > bound:
        raise AssertionError(f"N-exponent {top} above bound {bound}")


def leading_cumulant_coefficients(spec: ModelSpec, orders) -> dict:
    """Coefficient of the top N-power of the one-pair cumulant at each coupling
    order, computed from ciliated plane trees (the only maps attaining it):
    each tree contributes (-1)^edges at N^0."""
    out = {}
    for n in orders:
        total = Fraction(0)
        for t in enumerate_plane_trees(n + 1, 1, spec.interactions, mode="rooted"):
            amp = map_amplitude(t.map, spec)
            if amp.n_exponent != 0:
                raise AssertionError("ciliated tree off the leading N-power")
            total += amp.coefficient
        out[n] = total
    return out


# -- connected relation -----------------------------------------------------------


def connected_relation_check(full: FormalSeries, connected: FormalSeries,
                             order: int) -> bool:
    """exp(connected) == full as formal series through total degree order."""
    for s in (full, connected):
        if s.truncation is not None and s.truncation < order:
            raise TruncationMismatch(
                f"series truncated at {s.truncation}, need {order}")
    lhs = series_exp(connected, order)
    rhs = full.copy()
    rhs.truncation = order
    lhs_terms = {k: v for k, v in lhs.terms.items()
                 if sum(d for _, d in k[0]) <= order}
    rhs_terms = {k: v for k, v in rhs.terms.items()
                 if sum(d for _, d in k[0]) <= order}
    return lhs_terms == rhs_terms


# -- leg symmetrisation ------------------------------------------------------------


def boundary_relabel(b: BoundaryGraph, pi, pibar) -> BoundaryGraph:
    """Relabel covariant legs by pi and dual legs by pibar (0-based arrays):
    each colour permutation becomes pibar . tau . pi^{-1}."""
    inv = perm_inverse(list(pi))
    tau = tuple(tuple(pibar[t[inv[d]]] for d in range(b.k)) for t in b.tau)
    return BoundaryGraph(b.k, tau)


def symmetrise_legs(kernels: dict, k: int):
    """Final leg symmetrisation: average each boundary-graded kernel over the
    k!^2 relabelings of covariant and dual legs.

    kernels: BoundaryGraph -> FormalSeries.  Returns (symmetrised kernels,
    bookkeeping) where bookkeeping records the k!^2 factor and each orbit.
    """
    import itertools as _it

    perms = list(_it.permutations(range(k)))
    factor = factorial(k) ** 2
    orbits = {}
    sym = {}
    for b, s in kernels.items():
        orbit = set()
        for pi in perms:
            for pibar in perms:
                orbit.add(boundary_relabel(b, pi, pibar))
        orbit = frozenset(orbit)
        orbits[b] = orbit
        # the k!^2 relabelings hit each orbit element |stabiliser| times;
        # averaging spreads the kernel uniformly over its orbit
        share = s * Fraction(1, len(orbit))
        for b2 in orbit:
            sym[b2] = sym.get(b2, FormalSeries(truncation=s.truncation)) + share
    book = {"leg_relabelings": factor,
            "orbit_sizes": {b: len(o) for b, o in orbits.items()}}
    return sym, book


# -- closed forms ------------------------------------------------------------------


@dataclass(frozen=True)
class TwoPointComparison:
    closed_form: float
    partial_sums: tuple
    deviations: tuple

    @property
    def final_deviation(self) -> float:
        return self.deviations[-1] if self.deviations else 0.0


def melonic_two_point(lam, D: int, terms: int = 30) -> TwoPointComparison:
    """Closed-form resummed two-point normalisation against its partial sums.

    Value: (-1 + sqrt(1 + 4 D lam)) / (2 D lam), the sum of (-D lam)^n C_n;
    lam = 0 returns the constant term 1.
    """
    lam = float(lam)
    if lam == 0.0:
        return TwoPointComparison(1.0, (1.0,), (0.0,))
    if abs(4 * D * lam) >= 1:
        raise TruncationMismatch("series comparison needs |4 D lam| < 1")
    closed = (-1.0 + math.sqrt(1.0 + 4.0 * D * lam)) / (2.0 * D * lam)
    sums = []
    devs = []
    total = 0.0
    for n in range(terms + 1):
        total += (-D * lam) ** n * catalan(n)
        sums.append(total)
        devs.append(abs(total - closed))
    return TwoPointComparison(closed, tuple(sums), tuple(devs))


def melonic_two_point_coefficient(n: int, D: int) -> int:
    """Exact coefficient of lam^n in the resummed two-point normalisation."""
    return (-D) ** n * catalan(n)


def vacuum_solutions(lam, D: int, side: str = "above"):
    """Both roots of a = -i sqrt(lam) / (1 + i sqrt(lam) D a).

    Returns (a0, a_inst) with a0 the root that is perturbative at small lam;
    a0 * a_inst = 1/D.  For negative real lam the square-root branch is picked
    by side: "above" approaches the cut from Im > 0, "below" from Im < 0.
    """
    if lam == 0:
        raise ZeroDivisionError("vacuum roots need lam != 0")
    z = complex(lam)
    if z.imag == 0 and z.real < 0:
        r = math.sqrt(-z.real)
        sq = 1j * r if side == "above" else -1j * r
    else:
        sq = cmath.sqrt(z)
    s = cmath.sqrt(1 + 4 * D * z)
    a0 = 1j * (1 - s) / (2 * sq * D)
    a_inst = 1j * (1 + s) / (2 * sq * D)
    return a0, a_inst


def vacuum_residual(a, lam, D: int) -> float:
    """|a (1 + i sqrt(lam) D a) + i sqrt(lam)|, zero at a root."""
    sq = cmath.sqrt(complex(lam))
    return abs(a * (1 + 1j * sq * D * a) + 1j * sq)


def vacuum_series_coefficient(n: int, D: int) -> int:
    """a0 = -i sqrt(lam) * sum_n C_n (-D lam)^n: coefficient of the sum part."""
    return catalan(n) * (-D) ** n


def free_energy_large_n_value(lam, D: int, side: str = "above") -> complex:
    """Leading large-N free-energy density -(D/2) a0^2 - log(1 + i sqrt(lam) D a0)."""
    a0, _ = vacuum_solutions(lam, D, side)
    sq = cmath.sqrt(complex(lam))
    return -(D / 2.0) * a0 * a0 - cmath.log(1 + 1j * sq * D * a0)
