"""The arithmetic environment for the census: places of the base field Z with
norms, the fibers of the extension F|Z above each place, a Frobenius oracle,
and the forced local divisors at unconstrained primes.

A setup fixes integers d = [F:Z], m (degree of the inner algebra over F) and
j, with M = d*m*j.  Places of Z are addressed by stable string ids; for the
builtin rational and quadratic environments the id of a prime p is str(p) and
the archimedean place is "inf".  Only finitely many places are explicit: all
archimedean places and every exceptional finite place (ramified in F or
carrying a nonzero local invariant of the inner algebra).  All other places
are produced on demand by a tail oracle:

  rational       Z = F = Q; every prime has trivial Frobenius
  quadratic      Z = Q, F = Q(sqrt(D)); split/inert from the residue symbol
  listed         every usable place is explicit, up to a norm bound
  sampled        Frobenius classes drawn i.i.d. by class size from a seeded
                 generator (Monte Carlo; exact computations refuse this mode)
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from . import ntheory, perms
from .errors import (
    CoverageError,
    SchemaError,
    StochasticModeError,
    ValidationError,
)
from .perms import GroupTable
from .residues import Residue

ARCH_ID = "inf"


@dataclass(frozen=True)
class Fiber:
    """One place w of F above a place v of Z: local degree d_w = [F_w : Z_v]
    and the local invariant numerator kappa_w of the inner algebra, mod m."""

    local_degree: int
    kappa: Residue

    def __post_init__(self):
        if self.local_degree < 1:
            raise ValidationError("local degree must be >= 1")


@dataclass(frozen=True)
class Place:
    """A place of Z with the fiber data of F|Z above it."""

    id: str
    kind: str  # "real" | "complex" | "finite"
    norm: int | None = None  # finite places only (a prime power)
    ramified: bool = False
    fibers: tuple[Fiber, ...] = ()

    @property
    def is_arch(self) -> bool:
        return self.kind in ("real", "complex")

    def sort_key(self) -> tuple:
        return (1, 0, self.id) if self.is_arch else (0, self.norm, self.id)


@dataclass(frozen=True)
class TailOracle:
    kind: str  # "rational" | "quadratic" | "listed" | "sampled"
    discriminant: int | None = None
    bound: int | None = None
    seed: int | None = None

    @property
    def stochastic(self) -> bool:
        return self.kind == "sampled"


class FieldSetup:
    """Validated arithmetic environment; immutable after construction."""

    def __init__(
        self,
        d: int,
        m: int,
        j: int,
        group: GroupTable,
        places: list[Place],
        tail: TailOracle,
        zeta_residue: float = 1.0,
    ):
        self.d, self.m, self.j = d, m, j
        self.M = d * m * j
        self.group = group
        self.places = tuple(sorted(places, key=Place.sort_key))
        self.tail = tail
        self.zeta_residue = zeta_residue
        self._by_id = {p.id: p for p in self.places}
        self._tail_cache: dict[str, Place] = {}
        if len(self._by_id) != len(self.places):
            raise ValidationError("duplicate place ids")
        self._validate()
        self.exceptional = frozenset(
            p.id
            for p in self.places
            if p.is_arch or p.ramified or any(not f.kappa.is_zero() for f in p.fibers)
        )

    # -- validation ---------------------------------------------------------

    def _validate(self) -> None:
        if self.d < 1 or self.m < 1 or self.j < 1:
            raise ValidationError("d, m, j must be positive")
        if self.group.degree != self.d:
            raise ValidationError(
                f"group degree {self.group.degree} != d = {self.d}"
            )
        if self.d > 1 and not self.group.transitive:
            raise ValidationError("group must act transitively on the d embeddings")
        if not any(p.is_arch for p in self.places):
            raise ValidationError("at least one archimedean place is required")
        inv_sum = Fraction(0)
        for p in self.places:
            self._validate_place(p)
            inv_sum += sum((f.kappa.to_qz() for f in p.fibers), start=Fraction(0))
        if inv_sum.denominator != 1:
            raise ValidationError(
                f"local invariants of the inner algebra sum to {inv_sum} != 0 in Q/Z"
            )

    def _validate_place(self, p: Place) -> None:
        if p.kind not in ("real", "complex", "finite"):
            raise ValidationError(f"unknown place kind {p.kind!r}")
        if p.kind == "finite":
            if p.norm is None or p.norm < 2:
                raise ValidationError(f"finite place {p.id} needs a norm >= 2")
        elif p.norm is not None:
            raise ValidationError(f"archimedean place {p.id} must not carry a norm")
        if sum(f.local_degree for f in p.fibers) != self.d:
            raise ValidationError(
                f"place {p.id}: local degrees must sum to d = {self.d}"
            )
        for f in p.fibers:
            if f.kappa.modulus != self.m:
                raise ValidationError(
                    f"place {p.id}: kappa modulus {f.kappa.modulus} != m = {self.m}"
                )
        if p.kind == "complex":
            if any(f.local_degree != 1 or not f.kappa.is_zero() for f in p.fibers):
                raise ValidationError(
                    f"complex place {p.id}: all fibers must be (1, 0)"
                )
        if p.kind == "real":
            for f in p.fibers:
                if f.local_degree == 2:
                    if not f.kappa.is_zero():
                        raise ValidationError(
                            f"real place {p.id}: complex fiber must have kappa = 0"
                        )
                elif f.local_degree == 1:
                    if not (f.kappa.is_zero() or 2 * f.kappa.value == self.m):
                        raise ValidationError(
                            f"real place {p.id}: real fiber kappa must be 0 or m/2"
                        )
                else:
                    raise ValidationError(
                        f"real place {p.id}: fiber degrees must be 1 or 2"
                    )
        if p.kind == "finite" and not p.ramified:
            ctype = tuple(sorted(f.local_degree for f in p.fibers))
            if not self.group.classes_with_cycle_type(ctype):
                raise ValidationError(
                    f"place {p.id}: fiber degrees {ctype} match no Frobenius cycle type"
                )
            if self.tail.kind == "quadratic":
                sym = ntheory.kronecker_prime(self.tail.discriminant, p.norm)
                expect_split = ctype == (1, 1)
                if sym == 0:
                    raise ValidationError(
                        f"place {p.id}: divides the discriminant but is not ramified"
                    )
                if (sym == 1) != expect_split:
                    raise ValidationError(
                        f"place {p.id}: fibers disagree with the residue symbol"
                    )
        if p.kind == "finite" and p.ramified and self.tail.kind == "quadratic":
            if self.tail.discriminant % p.norm:
                raise ValidationError(
                    f"place {p.id}: marked ramified but does not divide the discriminant"
                )

    # -- place access -------------------------------------------------------

    def place(self, place_id: str) -> Place:
        """The record for a place id, synthesizing tail places on demand."""
        if place_id in self._by_id:
            return self._by_id[place_id]
        cached = self._tail_cache.get(place_id)
        if cached is not None:
            return cached
        norm = self._tail_norm(place_id)
        cls = self.frobenius_class(place_id)
        kappa0 = Residue(self.m, 0)
        fibers = tuple(
            Fiber(length, kappa0) for length in self.group.class_cycle_type(cls)
        )
        record = Place(id=place_id, kind="finite", norm=norm, fibers=fibers)
        self._tail_cache[place_id] = record
        return record

    def _tail_norm(self, place_id: str) -> int:
        if self.tail.kind == "listed":
            raise CoverageError(
                f"place {place_id} is not in the listed setup"
            )
        try:
            norm = int(place_id)
        except ValueError:
            raise CoverageError(f"unknown place id {place_id!r}") from None
        if not ntheory.is_prime(norm):
            raise ValidationError(f"tail place id {place_id!r} is not a prime")
        return norm

    def norm(self, place_id: str) -> int:
        return self.place(place_id).norm

    def is_exceptional(self, place_id: str) -> bool:
        return place_id in self.exceptional

    def exceptional_places(self) -> frozenset[str]:
        """The finite set of archimedean, ramified, or invariant-carrying places."""
        return self.exceptional

    # -- Frobenius oracle ----------------------------------------------------

    def frobenius_class(self, place_id: str) -> int:
        """Conjugacy-class index of the Frobenius at an unramified finite place."""
        if place_id in self._by_id:
            p = self._by_id[place_id]
            if p.is_arch:
                raise ValidationError(f"{place_id} is archimedean")
            if p.ramified:
                raise ValidationError(f"{place_id} is ramified in the extension")
            ctype = tuple(sorted(f.local_degree for f in p.fibers))
            return self.group.classes_with_cycle_type(ctype)[0]
        if self.tail.kind == "rational":
            self._tail_norm(place_id)
            return self.group.identity_class
        if self.tail.kind == "quadratic":
            norm = self._tail_norm(place_id)
            sym = ntheory.kronecker_prime(self.tail.discriminant, norm)
            if sym == 0:
                raise ValidationError(
                    f"prime {place_id} is ramified but not listed explicitly"
                )
            split = self.group.identity_class
            inert = 1 - split
            return split if sym == 1 else inert
        if self.tail.kind == "sampled":
            norm = self._tail_norm(place_id)
            rng = random.Random(f"{self.tail.seed}:{norm}")
            r = rng.randrange(self.group.order)
            acc = 0
            for i, size in enumerate(self.group.class_sizes):
                acc += size
                if r < acc:
                    return i
            raise AssertionError("unreachable")
        raise CoverageError(f"place {place_id} beyond listed coverage")

    def frobenius_cycle_gcd(self, place_id: str) -> int:
        return self.group.class_cycle_gcd(self.frobenius_class(place_id))

    def forced_divisor(self, tau: int, place_id: str) -> int:
        """The divisor of M that must divide the local invariant at a
        non-exceptional prime: lcm(dm/cycle_gcd(Frob), tau)."""
        if self.M % tau:
            raise ValidationError(f"tau={tau} does not divide M={self.M}")
        if self.is_exceptional(place_id):
            raise ValidationError(f"place {place_id} is exceptional")
        c = self.frobenius_cycle_gcd(place_id)
        return math.lcm(self.d * self.m // c, tau)

    # -- tail streaming -----------------------------------------------------

    def iter_finite_nonexceptional(self, max_norm: int) -> Iterator[Place]:
        """All non-exceptional finite places with norm <= max_norm, ascending
        by (norm, id).  Explicit records are merged with tail places."""
        explicit = [
            p
            for p in self.places
            if p.kind == "finite"
            and p.id not in self.exceptional
            and p.norm <= max_norm
        ]
        if self.tail.kind == "listed":
            if max_norm > self.tail.bound:
                raise CoverageError(
                    f"norm bound {max_norm} exceeds listed coverage {self.tail.bound}"
                )
            yield from sorted(explicit, key=Place.sort_key)
            return
        skip = set(self._by_id)
        merged = [(p.norm, p.id, p) for p in explicit]
        for q in ntheory.primes_up_to(max_norm):
            if str(q) in skip:
                continue
            merged.append((q, str(q), self.place(str(q))))
        merged.sort(key=lambda t: (t[0], t[1]))
        for _, _, p in merged:
            yield p

    # -- misc ----------------------------------------------------------------

    def archimedean_places(self) -> list[Place]:
        return [p for p in self.places if p.is_arch]

    def __repr__(self) -> str:
        return (
            f"FieldSetup(d={self.d}, m={self.m}, j={self.j}, M={self.M}, "
            f"tail={self.tail.kind!r}, places={len(self.places)})"
        )


# -- builders ----------------------------------------------------------------


def _kappa(m: int, value: int) -> Residue:
    return Residue(m, value)


def rational_setup(
    m: int,
    j: int,
    kappa: dict[str, int] | None = None,
    zeta_residue: float = 1.0,
) -> FieldSetup:
    """Z = F = Q.  kappa maps place ids ("inf" or a prime as a string) to the
    local invariant numerator of the inner algebra, mod m."""
    kappa = {str(k): v for k, v in (kappa or {}).items()}
    places = [
        Place(
            id=ARCH_ID,
            kind="real",
            fibers=(Fiber(1, _kappa(m, kappa.pop(ARCH_ID, 0))),),
        )
    ]
    for pid, val in sorted(kappa.items(), key=lambda kv: int(kv[0])):
        q = int(pid)
        places.append(
            Place(id=str(q), kind="finite", norm=q, fibers=(Fiber(1, _kappa(m, val)),))
        )
    return FieldSetup(
        1, m, j, perms.trivial_group(), places, TailOracle("rational"), zeta_residue
    )


def quadratic_setup(
    disc: int,
    m: int,
    j: int,
    kappa: dict[str, list[int] | int] | None = None,
    zeta_residue: float = 1.0,
) -> FieldSetup:
    """Z = Q, F the quadratic field of fundamental discriminant disc.

    kappa maps a place id to the list of fiber invariants (one per place of F
    above it, split primes have two).  Ramified primes are added automatically
    with zero invariants unless listed.
    """
    if not ntheory.is_fundamental_discriminant(disc):
        raise ValidationError(f"{disc} is not a fundamental discriminant")
    kappa = {str(k): (v if isinstance(v, list) else [v]) for k, v in (kappa or {}).items()}
    group = GroupTable([perms.from_images([2, 1])])
    places = []

    arch_vals = kappa.pop(ARCH_ID, None)
    if disc < 0:
        if arch_vals not in (None, [0]):
            raise ValidationError("complex fiber above inf must have kappa = 0")
        fibers = (Fiber(2, _kappa(m, 0)),)
    else:
        vals = arch_vals or [0, 0]
        if len(vals) != 2:
            raise ValidationError("real quadratic field: two fibers above inf")
        fibers = tuple(Fiber(1, _kappa(m, v)) for v in vals)
    places.append(Place(id=ARCH_ID, kind="real", fibers=fibers))

    ram = sorted(ntheory.factorize(abs(disc)))
    for q in ram:
        vals = kappa.pop(str(q), [0])
        if len(vals) != 1:
            raise ValidationError(f"ramified prime {q} has a single place above it")
        places.append(
            Place(
                id=str(q),
                kind="finite",
                norm=q,
                ramified=True,
                fibers=(Fiber(2, _kappa(m, vals[0])),),
            )
        )
    for pid, vals in sorted(kappa.items(), key=lambda kv: int(kv[0])):
        q = int(pid)
        sym = ntheory.kronecker_prime(disc, q)
        if sym == 1:
            if len(vals) != 2:
                raise ValidationError(f"split prime {q} has two places above it")
            fibers = tuple(Fiber(1, _kappa(m, v)) for v in vals)
        else:
            if len(vals) != 1:
                raise ValidationError(f"inert prime {q} has one place above it")
            fibers = (Fiber(2, _kappa(m, vals[0])),)
        places.append(Place(id=str(q), kind="finite", norm=q, fibers=fibers))
    return FieldSetup(
        2, m, j, group, places, TailOracle("quadratic", discriminant=disc), zeta_residue
    )


# -- JSON setup files ---------------------------------------------------------

_SETUP_FIELDS = {
    "kind", "d", "m", "j", "group_generators", "places", "tail", "zeta_residue",
}
_PLACE_FIELDS = {"id", "kind", "norm", "ramified", "fibers"}
_FIBER_FIELDS = {"dw", "kappa"}
_TAIL_FIELDS = {"discriminant", "bound", "seed"}


def _reject_unknown(obj: dict, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise SchemaError(f"unknown fields {sorted(unknown)} in {where}")


def _parse_generator(entry, d: int) -> perms.Perm:
    if not isinstance(entry, list) or not entry:
        raise SchemaError("each generator must be a non-empty list")
    if isinstance(entry[0], list):
        return perms.from_cycles(entry, d)
    return perms.from_images(entry)


def parse_setup(data: dict) -> FieldSetup:
    """Build a FieldSetup from a parsed JSON object; rejects unknown fields."""
    if not isinstance(data, dict):
        raise SchemaError("setup file must contain a JSON object")
    _reject_unknown(data, _SETUP_FIELDS, "setup")
    try:
        kind = data["kind"]
        m = int(data["m"])
        j = int(data["j"])
    except KeyError as e:
        raise SchemaError(f"setup is missing required field {e}") from None
    tail_data = data.get("tail", {})
    _reject_unknown(tail_data, _TAIL_FIELDS, "tail")
    zeta = float(data.get("zeta_residue", 1.0))

    if kind == "rational":
        kappa = _simple_kappa(data.get("places", []), m)
        return rational_setup(m, j, kappa, zeta)
    if kind == "quadratic":
        disc = tail_data.get("discriminant")
        if disc is None:
            raise SchemaError("quadratic setup needs tail.discriminant")
        kappa = _fiber_kappa(data.get("places", []))
        return quadratic_setup(int(disc), m, j, kappa, zeta)
    if kind in ("listed", "sampled"):
        d = int(data.get("d", 0))
        if d < 1:
            raise SchemaError(f"{kind} setup needs d >= 1")
        gens = data.get("group_generators")
        if gens:
            group = GroupTable([_parse_generator(g, d) for g in gens])
        elif d == 1:
            group = perms.trivial_group()
        else:
            raise SchemaError(f"{kind} setup with d > 1 needs group_generators")
        places = [_parse_place(p, m) for p in data.get("places", [])]
        if kind == "listed":
            bound = tail_data.get("bound")
            if bound is None:
                raise SchemaError("listed setup needs tail.bound")
            tail = TailOracle("listed", bound=int(bound))
        else:
            tail = TailOracle("sampled", seed=int(tail_data.get("seed", 0)))
        return FieldSetup(d, m, j, group, places, tail, zeta)
    raise SchemaError(f"unknown setup kind {kind!r}")


def _simple_kappa(entries: list, m: int) -> dict[str, int]:
    out = {}
    for p in entries:
        _reject_unknown(p, _PLACE_FIELDS, f"place {p.get('id')}")
        fibers = p.get("fibers", [])
        if len(fibers) != 1:
            raise SchemaError("rational setup places carry exactly one fiber")
        _reject_unknown(fibers[0], _FIBER_FIELDS, "fiber")
        out[str(p["id"])] = int(fibers[0].get("kappa", 0))
    return out


def _fiber_kappa(entries: list) -> dict[str, list[int]]:
    out = {}
    for p in entries:
        _reject_unknown(p, _PLACE_FIELDS, f"place {p.get('id')}")
        vals = []
        for f in p.get("fibers", []):
            _reject_unknown(f, _FIBER_FIELDS, "fiber")
            vals.append(int(f.get("kappa", 0)))
        out[str(p["id"])] = vals
    return out


def _parse_place(p: dict, m: int) -> Place:
    _reject_unknown(p, _PLACE_FIELDS, f"place {p.get('id')}")
    try:
        pid = str(p["id"])
        kind = p["kind"]
    except KeyError as e:
        raise SchemaError(f"place is missing required field {e}") from None
    fibers = tuple(
        Fiber(int(f["dw"]), Residue(m, int(f.get("kappa", 0))))
        for f in p.get("fibers", [])
    )
    norm = p.get("norm")
    return Place(
        id=pid,
        kind=kind,
        norm=int(norm) if norm is not None else None,
        ramified=bool(p.get("ramified", False)),
        fibers=fibers,
    )


def load_setup(path: str) -> FieldSetup:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError(f"invalid JSON in {path}: {e}") from None
    return parse_setup(data)


def build_setup(spec: dict | str) -> FieldSetup:
    """Single entry point: a parsed JSON object or a path to a setup file."""
    if isinstance(spec, str):
        return load_setup(spec)
    return parse_setup(spec)
