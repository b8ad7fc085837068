"""Built-in verification suite: thirteen end-to-end checks covering the
engine's headline identities, bounds, and numerics.

Each check returns a CheckResult with a single pass/fail line; run_checks
executes any selection in order.  Checks 1, 3, and 11 carry a wall-clock
budget that is part of the pass condition; the randomised check 12 takes an
explicit seed so reruns are reproducible.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from time import perf_counter

import numpy as np

from . import sweeps
from ._util import UnionFind
from .colours import (
    ENHANCED,
    INVARIANT,
    BoundaryGraph,
    ColourSet,
    PowerLaplacian,
    full_quartic_model,
    melonic_model,
)
from .enumeration import (
    catalan,
    count_plane_trees,
    count_trees_rooted,
    rooted_tree_count_recursive,
)
from .graphs import invariant_amplitude
from .maps import StrandedMap, map_amplitude
from .oracle import (
    EdgePolynomial,
    complete_graph_edges,
    forest_formula_check,
    forest_weight_matrix,
    oracle_cumulant,
    oracle_free_energy,
    oracle_partition_function,
)
from .renorm import classify_renormalisability, t43_counterterms, t43_delta_m, t43_a_renormalised
from .series import (
    FREE_ENERGY,
    LABELLED,
    assemble_series,
    connected_relation_check,
    melonic_two_point,
    vacuum_solutions,
)
from .transform import graph_to_map, map_to_graph

DEFAULT_SEED = 20260819


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    @property
    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{self.number:2d}] {status} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _mono_interactions(D: int) -> tuple[ColourSet, ...]:
    # one set per colour, no canonical quotient: D distinguishable decorations
    return tuple(ColourSet(bits=1 << (c - 1), rank=D) for c in range(1, D + 1))


def check_tree_counts() -> CheckResult:
    """Counts of singly-ciliated single-colour plane trees equal D^n * Catalan(n)
    for n <= 8 and D in 2..5, by closed form and by recurrence; explicit
    enumeration confirms the small cases.  Budget: 10 s."""
    t0 = perf_counter()
    bad = []
    for D in (2, 3, 4, 5):
        inter = _mono_interactions(D)
        for n in range(9):
            want = D**n * catalan(n)
            if count_trees_rooted(n + 1, 1, D) != want:
                bad.append(("closed-form", D, n))
            if rooted_tree_count_recursive(n, D) != want:
                bad.append(("recurrence", D, n))
            if n <= 4 and count_plane_trees(n + 1, 1, inter, mode="rooted") != want:
                bad.append(("enumeration", D, n))
    dt = perf_counter() - t0
    ok = not bad and dt < 10.0
    detail = ("D^n*Catalan(n) matches for D in 2..5, n <= 8 "
              "(closed form + recurrence; enumeration n <= 4)"
              if not bad else f"mismatches: {bad[:4]}")
    if dt >= 10.0:
        detail += "; over 10s budget"
    return CheckResult(1, "tree-counts", ok, detail, dt)


def check_melonic_resummation() -> CheckResult:
    """Partial sums of sum (-D*lam)^n Catalan(n) at n=30 against the closed
    form, and the product of the two vacuum roots against 1/D."""
    t0 = perf_counter()
    max_dev = 0.0
    max_prod = 0.0
    for D, lam in ((3, 0.01), (4, 0.005)):
        cmp_ = melonic_two_point(lam, D, terms=30)
        max_dev = max(max_dev, cmp_.final_deviation)
        a0, a_inst = vacuum_solutions(lam, D)
        max_prod = max(max_prod, abs(a0 * a_inst - 1.0 / D))
    ok = max_dev < 1e-10 and max_prod < 1e-12
    detail = (f"partial-sum deviation {max_dev:.1e} (tol 1e-10), "
              f"root-product error {max_prod:.1e} (tol 1e-12)")
    return CheckResult(2, "melonic-resummation", ok, detail, perf_counter() - t0)


def check_oracle_equivalence() -> CheckResult:
    """Brute-force pairing expansion against map enumeration, D=3 single-colour
    family: connected vacuum polynomial through coupling order 2 and the
    identity-boundary pair kernel at order 1, term by term.  Budget: 2 min."""
    t0 = perf_counter()
    spec = melonic_model(3)
    vac_ok = oracle_free_energy(spec, 2) == assemble_series(FREE_ENERGY, spec, 2)
    b = BoundaryGraph.identity(3, 1)
    pair_ok = oracle_cumulant(spec, 1, b) == assemble_series(
        b, spec, 1, normalisation=LABELLED)
    dt = perf_counter() - t0
    ok = vac_ok and pair_ok and dt < 120.0
    detail = (f"connected vacuum orders 1-2 {'agree' if vac_ok else 'DISAGREE'}; "
              f"pair kernel order 1 {'agrees' if pair_ok else 'DISAGREES'}")
    if dt >= 120.0:
        detail += "; over 2min budget"
    return CheckResult(3, "oracle-equivalence", ok, detail, dt)


def check_scaling_bounds() -> CheckResult:
    """N-exponent lower bound and its equality characterisation on every
    connected map with E <= 4, k <= 2, D in {3,4}, both scalings."""
    t0 = perf_counter()
    checked = 0
    violations = 0
    for D in (3, 4):
        for scaling in (INVARIANT, ENHANCED):
            rep = sweeps.check_exponent_bounds(D, scaling, E_max=4, k_max=2)
            checked += rep.checked
            violations += len(rep.violations)
    ok = violations == 0
    detail = (f"{checked} bound+equality checks over D in {{3,4}}, "
              f"both scalings, E <= 4, k <= 2; {violations} violations")
    return CheckResult(4, "scaling-exponent-bounds", ok, detail, perf_counter() - t0)


def check_internal_face_bound() -> CheckResult:
    """Internal-face upper bound on the same exhaustive family."""
    t0 = perf_counter()
    checked = 0
    violations = 0
    for D in (3, 4):
        rep = sweeps.check_face_lemma(D, E_max=4, k_max=2)
        checked += rep.checked
        violations += len(rep.violations)
    ok = violations == 0
    detail = (f"{checked} face-count bounds over D in {{3,4}}, E <= 4, k <= 2; "
              f"{violations} violations")
    return CheckResult(5, "internal-face-bound", ok, detail, perf_counter() - t0)


def check_transform_round_trip() -> CheckResult:
    """Graph <-> map round trip on one representative per relabelling orbit,
    every colour assignment, up to 3 bubbles, D in {3,4}, k <= 2: canonical
    form, per-colour internal face counts, and amplitudes all survive."""
    t0 = perf_counter()
    total = 0
    mismatches = 0
    for D in (3, 4):
        spec = full_quartic_model(D)
        for E in (1, 2, 3):
            for k in (0, 1, 2):
                for skel in sweeps.iter_skeletons(E, k):
                    for cols in itertools.product(spec.interactions, repeat=E):
                        total += 1
                        m = StrandedMap(D, tuple(cols), k, skel.sigma)
                        g = map_to_graph(m)
                        m2 = graph_to_map(g)
                        if m2.canonical_key() != m.canonical_key():
                            mismatches += 1
                            continue
                        map_faces: dict[int, int] = {}
                        for f in m.trace_faces():
                            if f.internal:
                                map_faces[f.colour] = map_faces.get(f.colour, 0) + 1
                        graph_faces: dict[int, int] = {}
                        for f in g.faces():
                            if f.internal and f.colour != 0:
                                graph_faces[f.colour] = graph_faces.get(f.colour, 0) + 1
                        if graph_faces != map_faces:
                            mismatches += 1
                            continue
                        if invariant_amplitude(g, spec) != map_amplitude(m, spec):
                            mismatches += 1
    ok = mismatches == 0
    detail = (f"{total} representative maps (D in {{3,4}}, bubbles <= 3, k <= 2) "
              f"round-trip with faces and amplitudes intact; {mismatches} mismatches")
    return CheckResult(6, "transform-round-trip", ok, detail, perf_counter() - t0)


def check_genus_exponent() -> CheckResult:
    """N-exponent equals 2 - 2*genus on connected vacuum rank-2 maps, E <= 4."""
    t0 = perf_counter()
    rep = sweeps.check_matrix_genus(E_max=4)
    ok = not rep.violations
    detail = (f"{rep.checked} rank-2 vacuum maps: exponent == 2-2*genus; "
              f"{len(rep.violations)} mismatches")
    return CheckResult(7, "genus-exponent", ok, detail, perf_counter() - t0)


def check_renormalisability_table() -> CheckResult:
    """Classifier verdicts: standard family super for D in {3,4}, just at D=5
    with top degrees (0:4, 2:2, 4:0), non for D=6; enhanced rank-4 family
    super/just/non for exponent below/at/above 3/4, the just line carrying
    top degrees (0:4, 2:3/2, 4:1, 6:1/2, 8:0)."""
    t0 = perf_counter()
    bad = []
    expect_standard = {3: "super", 4: "super", 5: "just", 6: "non"}
    for D, want in expect_standard.items():
        spec = melonic_model(D, INVARIANT, PowerLaplacian(Fraction(1)))
        verdict = classify_renormalisability(D, spec)
        if verdict.category != want:
            bad.append(f"standard D={D}: {verdict.category} != {want}")
        if D == 5:
            want_deg = ((0, Fraction(4)), (2, Fraction(2)), (4, Fraction(0)))
            if verdict.max_degrees != want_deg:
                bad.append(f"standard D=5 degrees {verdict.max_degrees}")
    expect_enhanced = {Fraction(1, 2): "super", Fraction(3, 4): "just",
                       Fraction(7, 8): "non"}
    for eta, want in expect_enhanced.items():
        spec = full_quartic_model(4, ENHANCED, PowerLaplacian(eta))
        verdict = classify_renormalisability(4, spec)
        if verdict.category != want:
            bad.append(f"enhanced eta={eta}: {verdict.category} != {want}")
        if eta == Fraction(3, 4):
            want_deg = ((0, Fraction(4)), (2, Fraction(3, 2)), (4, Fraction(1)),
                        (6, Fraction(1, 2)), (8, Fraction(0)))
            if verdict.max_degrees != want_deg:
                bad.append(f"enhanced just degrees {verdict.max_degrees}")
    ok = not bad
    detail = ("standard {3,4}=super, 5=just, 6=non; enhanced eta<3/4=super, "
              "=3/4=just, >3/4=non, with the expected top degrees"
              if ok else "; ".join(bad[:3]))
    return CheckResult(8, "renormalisability-table", ok, detail, perf_counter() - t0)


def check_enhanced_degrees() -> CheckResult:
    """Face-wise and bubble-wise divergence degrees agree on every enhanced
    map with E <= 5; tree-degree formulas exact up to 5 bubbles; 2P-point
    degree bounded by 2 - P/2 at exponent 3/4."""
    t0 = perf_counter()
    identity = sweeps.check_enhanced_degree_identity(E_max=5, k_max=2)
    trees = sweeps.check_tree_degrees(B_max=5)
    legs = sweeps.check_external_leg_bound(E_max=4, k_max=2)
    violations = (len(identity.violations) + len(trees.violations)
                  + len(legs.violations))
    checked = identity.checked + trees.checked + legs.checked
    ok = violations == 0
    detail = (f"{checked} degree evaluations (two-formula identity E <= 5, "
              f"tree degrees <= 5 bubbles, 2P-point bound); {violations} violations")
    return CheckResult(9, "enhanced-degrees", ok, detail, perf_counter() - t0)


def check_enhanced_leading_order() -> CheckResult:
    """Structural characterisation of the maps attaining the enhanced rank-4
    vacuum exponent bound, both directions, E <= 5."""
    t0 = perf_counter()
    rep = sweeps.check_enhanced_leading_order(E_max=5)
    ok = not rep.violations
    detail = (f"{rep.checked} vacuum maps: extremal exponent iff structural "
              f"predicates; {len(rep.violations)} counterexamples")
    return CheckResult(10, "enhanced-leading-order", ok, detail, perf_counter() - t0)


def check_torus_counterterms() -> CheckResult:
    """Cubic-torus counterterm numerics: the cutoff-1 mass shift equals 13/3
    exactly, the mass shift grows by 2*pi*ln2 per cutoff doubling (within 5%
    for cutoffs 2^8..2^10), and the renormalised pair amplitude grows at most
    logarithmically up to momentum 10^4.  Budget: 1 min."""
    t0 = perf_counter()
    problems = []
    ct = t43_counterterms(1)
    if ct.delta_m != Fraction(13, 3):
        problems.append(f"delta_m(1) = {ct.delta_m} != 13/3")
    target = 2.0 * math.pi * math.log(2.0)
    vals = {N: t43_delta_m(N) for N in (256, 512, 1024, 2048)}
    worst_rel = 0.0
    for N in (256, 512, 1024):
        rel = abs(vals[2 * N] - vals[N] - target) / target
        worst_rel = max(worst_rel, rel)
        if rel >= 0.05:
            problems.append(f"doubling step at {N}: off by {rel:.1%}")
    fit_points = (1, 2, 4, 8, 16, 32, 64, 128)
    c_fit = max(t43_a_renormalised(n) / math.log(1.0 + n) for n in fit_points)
    worst_ratio = 0.0
    for n in (256, 512, 1024, 2048, 4096, 8192, 10000):
        ratio = t43_a_renormalised(n) / math.log(1.0 + n)
        worst_ratio = max(worst_ratio, ratio)
        if ratio > 1.25 * c_fit:
            problems.append(f"amplitude/log ratio {ratio:.3f} at {n} exceeds fit")
    dt = perf_counter() - t0
    ok = not problems and dt < 60.0
    detail = (f"mass shift 13/3 at cutoff 1; doubling within {worst_rel:.2%} of "
              f"2*pi*ln2; amplitude/log ratio {worst_ratio:.2f} <= "
              f"{1.25 * c_fit:.2f} up to 10^4"
              if not problems else "; ".join(problems[:3]))
    if dt >= 60.0:
        detail += "; over 1min budget"
    return CheckResult(11, "torus-counterterms", ok, detail, dt)


def _acyclic_subsets(n: int):
    edges = complete_graph_edges(n)
    for mask in range(1 << len(edges)):
        uf = UnionFind(n)
        ok = True
        subset = []
        for pos, (a, b) in enumerate(edges):
            if mask >> pos & 1:
                if not uf.union(a, b):
                    ok = False
                    break
                subset.append(pos)
        if ok:
            yield tuple(subset)


def _random_edge_polynomial(rng: random.Random) -> EdgePolynomial:
    n = rng.choice([2, 3, 4])
    n_edges = len(complete_graph_edges(n))
    terms: dict[tuple, int] = {}
    for _ in range(rng.randint(1, 4)):
        exps = [0] * n_edges
        for _ in range(rng.randint(0, 4)):  # total degree <= 4 guard
            exps[rng.randrange(n_edges)] += 1
        coeff = rng.choice([-3, -2, -1, 1, 2, 3])
        key = tuple(exps)
        terms[key] = terms.get(key, 0) + coeff
    return EdgePolynomial(n, terms)


def check_forest_interpolation(seed: int = DEFAULT_SEED) -> CheckResult:
    """Forest interpolation sums exactly reproduce 20 random polynomials, and
    every interpolation matrix stays positive semidefinite over 100 random
    parameter draws per forest."""
    t0 = perf_counter()
    rng = random.Random(seed)
    nonzero = 0
    for _ in range(20):
        if forest_formula_check(_random_edge_polynomial(rng)) != 0:
            nonzero += 1
    min_eig = 0.0
    forests = 0
    for n in (2, 3, 4):
        for forest in _acyclic_subsets(n):
            forests += 1
            for _ in range(100):
                u = [Fraction(rng.randint(0, 1000), 1000) for _ in forest]
                w = forest_weight_matrix(n, forest, u)
                mat = np.array([[float(x) for x in row] for row in w])
                min_eig = min(min_eig, float(np.linalg.eigvalsh(mat).min()))
    ok = nonzero == 0 and min_eig > -1e-9
    detail = (f"20 random polynomials reproduced exactly ({nonzero} residuals); "
              f"min eigenvalue {min_eig:.1e} over {forests} forests x 100 draws")
    return CheckResult(12, "forest-interpolation", ok, detail, perf_counter() - t0)


def check_connected_relation() -> CheckResult:
    """exp of the enumerated connected vacuum series equals the brute-force
    full generating polynomial through coupling order 2, D=3."""
    t0 = perf_counter()
    spec = melonic_model(3)
    full = oracle_partition_function(spec, 2)
    connected = assemble_series(FREE_ENERGY, spec, 2)
    ok = connected_relation_check(full, connected, 2)
    detail = ("exp(connected) == full generating polynomial through order 2"
              if ok else "exp(connected) mismatch at order <= 2")
    return CheckResult(13, "connected-relation", ok, detail, perf_counter() - t0)


ALL_CHECKS = (
    (1, check_tree_counts),
    (2, check_melonic_resummation),
    (3, check_oracle_equivalence),
    (4, check_scaling_bounds),
    (5, check_internal_face_bound),
    (6, check_transform_round_trip),
    (7, check_genus_exponent),
    (8, check_renormalisability_table),
    (9, check_enhanced_degrees),
    (10, check_enhanced_leading_order),
    (11, check_torus_counterterms),
    (12, check_forest_interpolation),
    (13, check_connected_relation),
)


def run_checks(numbers=None, seed: int = DEFAULT_SEED) -> list[CheckResult]:
    """Run the selected checks (all by default) and return their results."""
    wanted = set(numbers) if numbers is not None else {n for n, _ in ALL_CHECKS}
    unknown = wanted - {n for n, _ in ALL_CHECKS}
    if unknown:
        raise ValueError(f"unknown check numbers: {sorted(unknown)}")
    results = []
    for number, fn in ALL_CHECKS:
        if number not in wanted:
            continue
        if fn is check_forest_interpolation:
            results.append(fn(seed=seed))
        else:
            results.append(fn())
    return results


__all__ = [
    "ALL_CHECKS",
    "CheckResult",
    "DEFAULT_SEED",
    "check_connected_relation",
    "check_enhanced_degrees",
    "check_enhanced_leading_order",
    "check_forest_interpolation",
    "check_genus_exponent",
    "check_internal_face_bound",
    "check_melonic_resummation",
    "check_oracle_equivalence",
    "check_renormalisability_table",
    "check_scaling_bounds",
    "check_torus_counterterms",
    "check_transform_round_trip",
    "check_tree_counts",
    "run_checks",
]
