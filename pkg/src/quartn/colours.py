"""Colour-set arithmetic, boundary-graph permutation algebra, model descriptions.

Colours are 1..D with D <= 16. A quartic interaction is labelled by a canonical
colour set: the representative of the pair {C, complement(C)} with |C| <= floor(D/2),
ties (D even, |C| = D/2) resolved to the side containing colour 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import InvalidColourSet, MalformedGraph
from ._util import UnionFind

MAX_RANK = 16


@dataclass(frozen=True, order=True)
class ColourSet:
    """Canonical subset of {1..D}, stored as a bitmask (bit c-1 = colour c)."""

    bits: int
    rank: int

    def __post_init__(self):
        if not (1 <= self.rank <= MAX_RANK):
            raise InvalidColourSet(f"rank {self.rank} outside 1..{MAX_RANK}")
        full = (1 << self.rank) - 1
        if self.bits == 0 or self.bits == full:
            raise InvalidColourSet("colour set must be a proper nonempty subset")
        if self.bits & ~full:
            raise InvalidColourSet("colour outside 1..D")

    @property
    def colours(self) -> tuple[int, ...]:
        return tuple(c for c in range(1, self.rank + 1) if self.bits >> (c - 1) & 1)

    def __len__(self) -> int:
        return bin(self.bits).count("1")

    def __contains__(self, c: int) -> bool:
        return 1 <= c <= self.rank and bool(self.bits >> (c - 1) & 1)

    def complement(self) -> "ColourSet":
        full = (1 << self.rank) - 1
        return ColourSet(full & ~self.bits, self.rank)

    @property
    def is_canonical(self) -> bool:
        half, rem = divmod(self.rank, 2)
        n = len(self)
        if n > half:
            return False
        if rem == 0 and n == half:
            return 1 in self
        return True

    def to_json(self) -> list[int]:
        return list(self.colours)

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.colours)) + "}"


def canonicalise(colours: Iterable[int], D: int) -> ColourSet:
    """Canonical representative of {colours, complement}: the smaller side,
    ties to the side containing colour 1. Idempotent."""
    bits = 0
    for c in colours:
        if not (1 <= c <= D):
            raise InvalidColourSet(f"colour {c} outside 1..{D}")
        bits |= 1 << (c - 1)
    cs = ColourSet(bits, D)
    if cs.is_canonical:
        return cs
    return cs.complement()


def all_canonical(D: int) -> tuple[ColourSet, ...]:
    """Every canonical colour set at rank D, sorted by (size, bits)."""
    full = (1 << D) - 1
    out = []
    for bits in range(1, full):
        cs = ColourSet(bits, D)
        if cs.is_canonical:
            out.append(cs)
    out.sort(key=lambda c: (len(c), c.bits))
    return tuple(out)


def singletons(D: int) -> tuple[ColourSet, ...]:
    """The mono-coloured interactions, in canonical form.  For D >= 3 that is
    all D of {1}..{D}; at D = 2 the set {2} is the complement of {1} and both
    name the same interaction, so only {1} survives."""
    out = []
    for c in range(1, D + 1):
        cs = canonicalise((c,), D)
        if cs not in out:
            out.append(cs)
    return tuple(out)


@dataclass(frozen=True)
class BoundaryGraph:
    """Index structure of a 2k-point function: D permutations over k leg pairs.

    tau[c-1][d-1] is the (0-based internally, 1-based in I/O) covariant leg
    reached from dual leg d along the colour-c external face.
    """

    k: int
    tau: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for t in self.tau:
            if sorted(t) != list(range(self.k)):
                raise MalformedGraph("tau components must be permutations of 0..k-1")

    @property
    def D(self) -> int:
        return len(self.tau)

    @staticmethod
    def identity(D: int, k: int) -> "BoundaryGraph":
        return BoundaryGraph(k, tuple(tuple(range(k)) for _ in range(D)))

    @property
    def is_identity(self) -> bool:
        return all(t == tuple(range(self.k)) for t in self.tau)

    def to_json(self) -> dict:
        return {"k": self.k, "tau": [[d + 1 for d in t] for t in self.tau]}

    @staticmethod
    def from_json(obj: dict) -> "BoundaryGraph":
        k = obj["k"]
        tau = tuple(tuple(d - 1 for d in t) for t in obj["tau"])
        return BoundaryGraph(k, tau)


def boundary_components(b: BoundaryGraph) -> int:
    """Connected components of the bipartite graph on 2k vertices whose
    colour-c edges join dual leg d to covariant leg tau[c](d)."""
    if b.k == 0:
        return 0
    uf = UnionFind(2 * b.k)
    for t in b.tau:
        for d in range(b.k):
            uf.union(d, b.k + t[d])
    return uf.count


@dataclass(frozen=True)
class IdentityCovariance:
    """Gaussian pairing delta_{n nbar}; amplitudes are exact N-monomials."""

    def __str__(self) -> str:
        return "identity"


@dataclass(frozen=True)
class PowerLaplacian:
    """Field-theory covariance delta / ((p.p)^eta + m^(2eta)); power counting only."""

    eta: Fraction = Fraction(1)

    def __str__(self) -> str:
        return f"laplacian^{self.eta}"


Propagator = IdentityCovariance | PowerLaplacian

INVARIANT = "invariant"
ENHANCED = "enhanced"


@dataclass(frozen=True)
class ModelSpec:
    """A quartic model: rank, canonical interaction set, interaction N-scalings,
    propagator, and one named coupling per interaction family."""

    D: int
    interactions: tuple[ColourSet, ...]
    scaling: str = INVARIANT
    propagator: Propagator = field(default_factory=IdentityCovariance)
    couplings: Mapping[ColourSet, str] | None = None

    def __post_init__(self):
        if self.scaling not in (INVARIANT, ENHANCED):
            raise InvalidColourSet(f"unknown scaling {self.scaling!r}")
        seen = set()
        for C in self.interactions:
            if C.rank != self.D:
                raise InvalidColourSet("interaction rank mismatch")
            if not C.is_canonical:
                raise InvalidColourSet(f"non-canonical interaction {C}")
            if C in seen:
                raise InvalidColourSet(f"duplicate interaction {C}")
            seen.add(C)

    def alpha(self, C: ColourSet) -> int:
        """N-exponent carried by one bubble of type C."""
        if self.scaling == INVARIANT:
            return 1 - self.D
        return len(C) - self.D

    def coupling_name(self, C: ColourSet) -> str:
        if self.couplings is not None and C in self.couplings:
            return self.couplings[C]
        return "lambda"

    @property
    def is_field_theory(self) -> bool:
        return isinstance(self.propagator, PowerLaplacian)

    def max_interaction_size(self) -> int:
        return max(len(C) for C in self.interactions)

    def to_json(self) -> dict:
        prop = (
            {"kind": "identity"}
            if isinstance(self.propagator, IdentityCovariance)
            else {"kind": "power_laplacian", "eta": [self.propagator.eta.numerator, self.propagator.eta.denominator]}
        )
        return {
            "D": self.D,
            "interactions": [C.to_json() for C in self.interactions],
            "scaling": self.scaling,
            "propagator": prop,
            "couplings": {str(C): self.coupling_name(C) for C in self.interactions},
        }


def melonic_model(D: int, scaling: str = INVARIANT, propagator: Propagator | None = None) -> ModelSpec:
    """Model with the D mono-coloured interactions only."""
    return ModelSpec(D, singletons(D), scaling, propagator or IdentityCovariance())


def full_quartic_model(D: int, scaling: str = INVARIANT, propagator: Propagator | None = None) -> ModelSpec:
    """Model with every canonical quartic interaction at rank D."""
    return ModelSpec(D, all_canonical(D), scaling, propagator or IdentityCovariance())
