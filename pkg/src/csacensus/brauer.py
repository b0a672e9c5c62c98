"""Central simple algebras over the base field as local-invariant profiles:
validity under the local-global constraints, index and skew-field tests,
discriminants in factored form, ramified-prime products, and the numeric
embedding criterion for the fixed inner algebra.

A profile of degree M assigns a residue mod M to finitely many places (absent
means zero).  Discriminants are kept factored; census boundary comparisons
evaluate the exact big integer, never floating logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from . import ntheory
from .errors import ValidationError
from .fieldsetup import FieldSetup, Place
from .residues import Residue


class FactoredRational:
    """A positive rational kept as a prime factorization {prime: exponent}.

    Bases passed in may be any integers >= 2 (e.g. prime-power norms); they
    are factored so that equality is canonical.  No zero exponents are stored.
    """

    __slots__ = ("factors",)

    def __init__(self, factors: Mapping[int, int] | None = None):
        canonical: dict[int, int] = {}
        for base, exp in (factors or {}).items():
            if exp == 0:
                continue
            if base < 2:
                raise ValidationError(f"factor base must be >= 2, got {base}")
            for p, k in ntheory.factorize(base).items():
                e = canonical.get(p, 0) + k * exp
                if e:
                    canonical[p] = e
                else:
                    canonical.pop(p, None)
        self.factors = canonical

    @classmethod
    def one(cls) -> "FactoredRational":
        return cls()

    @classmethod
    def from_integer(cls, n: int) -> "FactoredRational":
        if n < 1:
            raise ValidationError(f"expected a positive integer, got {n}")
        return cls({} if n == 1 else {n: 1})

    def __mul__(self, other: "FactoredRational") -> "FactoredRational":
        out = dict(self.factors)
        for p, e in other.factors.items():
            new = out.get(p, 0) + e
            if new:
                out[p] = new
            else:
                out.pop(p, None)
        result = FactoredRational.__new__(FactoredRational)
        result.factors = out
        return result

    def __truediv__(self, other: "FactoredRational") -> "FactoredRational":
        return self * other**-1

    def __pow__(self, k: int) -> "FactoredRational":
        result = FactoredRational.__new__(FactoredRational)
        result.factors = {p: e * k for p, e in self.factors.items() if e * k}
        return result

    def __eq__(self, other) -> bool:
        return isinstance(other, FactoredRational) and self.factors == other.factors

    def __hash__(self):
        return hash(frozenset(self.factors.items()))

    def is_integer(self) -> bool:
        return all(e > 0 for e in self.factors.values())

    def is_one(self) -> bool:
        return not self.factors

    def is_perfect_power(self, k: int) -> bool:
        return all(e % k == 0 for e in self.factors.values())

    def divides(self, other: "FactoredRational") -> bool:
        return all(e <= other.factors.get(p, 0) for p, e in self.factors.items())

    def numerator(self) -> int:
        n = 1
        for p, e in self.factors.items():
            if e > 0:
                n *= p**e
        return n

    def denominator(self) -> int:
        n = 1
        for p, e in self.factors.items():
            if e < 0:
                n *= p**-e
        return n

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator(), self.denominator())

    def as_int(self) -> int:
        if not self.is_integer():
            raise ValidationError(f"{self} is not an integer")
        return self.numerator()

    def __le__(self, bound: int) -> bool:
        """Exact comparison of an integer value against a big-integer bound."""
        return self.as_int() <= bound

    def __str__(self) -> str:
        num, den = self.numerator(), self.denominator()
        return str(num) if den == 1 else f"{num}/{den}"

    def __repr__(self) -> str:
        return f"FactoredRational({self})"


@dataclass
class InvariantProfile:
    """A finitely supported map place id -> Z/MZ, encoding a central simple
    algebra of degree M over the base field via its local invariants.

    Zero values are dropped on construction; the map is the support.
    """

    setup: FieldSetup
    assignments: dict[str, Residue] = field(default_factory=dict)

    def __post_init__(self):
        M = self.setup.M
        clean = {}
        for pid, r in self.assignments.items():
            if isinstance(r, int):
                r = Residue(M, r)
            if r.modulus != M:
                raise ValidationError(f"value at {pid} has modulus {r.modulus} != {M}")
            if not r.is_zero():
                clean[str(pid)] = r
        self.assignments = clean

    @property
    def degree(self) -> int:
        return self.setup.M

    def value(self, place_id: str) -> Residue:
        return self.assignments.get(place_id, Residue(self.setup.M, 0))

    def support(self) -> list[str]:
        return sorted(self.assignments, key=lambda pid: self.setup.place(pid).sort_key())

    def items(self) -> list[tuple[str, Residue]]:
        return [(pid, self.assignments[pid]) for pid in self.support()]

    def to_json_dict(self) -> dict:
        return {
            "M": self.degree,
            "assignments": [
                {"place": pid, "value": r.value} for pid, r in self.items()
            ],
        }

    @classmethod
    def from_json_dict(cls, setup: FieldSetup, data: dict) -> "InvariantProfile":
        if int(data.get("M", setup.M)) != setup.M:
            raise ValidationError("profile degree disagrees with setup")
        assignments = {
            str(a["place"]): Residue(setup.M, int(a["value"]))
            for a in data.get("assignments", [])
        }
        return cls(setup, assignments)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, InvariantProfile)
            and self.setup is other.setup
            and self.assignments == other.assignments
        )

    def __repr__(self) -> str:
        inner = ", ".join(f"{pid}:{r.value}" for pid, r in self.items())
        return f"InvariantProfile(M={self.degree}, {{{inner}}})"


def validate_profile(profile: InvariantProfile) -> tuple[bool, list[str]]:
    """Check the local-global constraints on the invariants themselves:
    complex places trivial, real places 2-torsion, global sum zero.

    Returns (ok, diagnostics); diagnostics name each violated constraint.
    """
    M = profile.degree
    problems = []
    total = Residue(M, 0)
    for pid, r in profile.items():
        place = profile.setup.place(pid)
        if place.kind == "complex":
            problems.append(f"{pid}: complex place carries nonzero invariant")
        if place.kind == "real" and 2 * r.value != M:
            problems.append(f"{pid}: real place invariant must be 0 or M/2")
        total = total + r
    if not total.is_zero():
        problems.append(f"invariant sum is {total.value} mod {M}, not 0")
    return (not problems, problems)


def index_and_skew(profile: InvariantProfile) -> tuple[int, bool]:
    """(index, is_skew) of the algebra: the index is the lcm of the orders of
    the local invariants; the algebra is a skew field iff the index is M,
    equivalently iff the values generate Z/MZ."""
    ok, problems = validate_profile(profile)
    if not ok:
        raise ValidationError("; ".join(problems))
    M = profile.degree
    g = M
    for _, r in profile.items():
        g = math.gcd(g, r.ideal_gcd())
    return M // g, g == 1


def local_index(profile: InvariantProfile, place_id: str) -> int:
    """Index of the completion at one place: M / gcd(M, value)."""
    return profile.value(place_id).order()


def disc_over_center(profile: InvariantProfile) -> FactoredRational:
    """Norm of the discriminant of the algebra over its center: the product
    over finite places of norm^(M*(M - gcd(M, value))).  Archimedean places
    contribute nothing."""
    ok, problems = validate_profile(profile)
    if not ok:
        raise ValidationError("; ".join(problems))
    M = profile.degree
    factors: dict[int, int] = {}
    for pid, r in profile.items():
        place = profile.setup.place(pid)
        if place.is_arch:
            continue
        exp = M * (M - r.ideal_gcd())
        if exp:
            factors[place.norm] = factors.get(place.norm, 0) + exp
    return FactoredRational(factors)


def local_disc_from_pairs(degree: int, pairs: Iterable[tuple[int, Residue]]) -> FactoredRational:
    """disc-over-center from raw (norm, invariant) pairs, for algebras whose
    center is not the setup's base field (e.g. after a base change)."""
    factors: dict[int, int] = {}
    for norm, r in pairs:
        if r.modulus != degree:
            raise ValidationError("invariant modulus disagrees with degree")
        exp = degree * (degree - r.ideal_gcd())
        if exp:
            factors[norm] = factors.get(norm, 0) + exp
    return FactoredRational(factors)


def ram_product(profile: InvariantProfile) -> FactoredRational:
    """Product of the norms of the finite places where the algebra ramifies
    (nonzero local invariant)."""
    factors: dict[int, int] = {}
    for pid, r in profile.items():
        place = profile.setup.place(pid)
        if place.is_arch:
            continue
        factors[place.norm] = factors.get(place.norm, 0) + 1
    return FactoredRational(factors)


@dataclass(frozen=True)
class AlgebraDiscData:
    """What the relative discriminant formula needs to know about one simple
    algebra: its discriminant over its center (factored), the absolute
    discriminant and degree of the center, and the algebra's degree over the
    center.  Center discriminants are inputs, never computed here."""

    local_disc: FactoredRational
    center_disc: int
    center_degree: int
    csa_degree: int

    @property
    def dim_over_q(self) -> int:
        return self.csa_degree**2 * self.center_degree

    def disc_over_q(self) -> FactoredRational:
        return self.local_disc * FactoredRational.from_integer(self.center_disc) ** (
            self.csa_degree**2
        )

    @classmethod
    def from_profile(
        cls, profile: InvariantProfile, center_disc: int = 1, center_degree: int = 1
    ) -> "AlgebraDiscData":
        return cls(disc_over_center(profile), center_disc, center_degree, profile.degree)


def disc_relative(upper: AlgebraDiscData, lower: AlgebraDiscData) -> FactoredRational:
    """Norm of the relative discriminant of an extension of simple algebras:
    the discriminant over Q of the larger divided by that of the smaller
    raised to the relative degree."""
    if upper.dim_over_q % lower.dim_over_q:
        raise ValidationError(
            f"degree ratio {upper.dim_over_q}/{lower.dim_over_q} is not integral"
        )
    n = upper.dim_over_q // lower.dim_over_q
    return upper.disc_over_q() / lower.disc_over_q() ** n


def embeds_into(setup: FieldSetup, profile: InvariantProfile) -> bool:
    """Can the setup's inner algebra be embedded into the algebra with these
    invariants?  Checked fiber by fiber at every place: the class
    d_w * value - d*j*kappa_w must be divisible by d*m in Z/MZ."""
    ok, problems = validate_profile(profile)
    if not ok:
        raise ValidationError("; ".join(problems))
    M, d, m, j = setup.M, setup.d, setup.m, setup.j
    ids = {p.id for p in setup.places} | set(profile.assignments)
    for pid in ids:
        place = setup.place(pid)
        lam = profile.value(pid)
        for f in place.fibers:
            diff = lam.scaled(f.local_degree) - Residue(M, d * j * f.kappa.value)
            if not diff.divisible_by(d * m):
                return False
    return True
