"""Permutation groups and the cycle-structure invariants that drive the
counting exponents.

Permutations on d points are tuples of 0-based images.  Groups are closed
eagerly from generators (the relevant groups are transitive subgroups of
symmetric groups of degree <= ~8, so |G| <= d! stays desk-scale) and carry
their conjugacy classes.

The central quantities:

  cycle_gcd(g)     gcd of the cycle lengths of g (fixed points count as 1)
  cycle_lcm (U)    lcm of cycle_gcd over the group
  least_prime (u)  smallest prime dividing U*j
  density (beta)   proportion of g in G with u | j*cycle_gcd(g)

together with two families of integer-valued class functions giving the
leading coefficient of local Euler factors, one for the discriminant count
and one for the ramified-product count.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import SearchCapError, ValidationError

Perm = tuple[int, ...]

DEFAULT_ORDER_CAP = 10**6


def identity(degree: int) -> Perm:
    return tuple(range(degree))


def compose(a: Perm, b: Perm) -> Perm:
    """a after b: (a*b)(x) = a(b(x))."""
    return tuple(a[b[x]] for x in range(len(a)))


def inverse(a: Perm) -> Perm:
    inv = [0] * len(a)
    for x, y in enumerate(a):
        inv[y] = x
    return tuple(inv)


def from_cycles(cycles: Iterable[Iterable[int]], degree: int) -> Perm:
    """Build a permutation from 1-based cycles, e.g. [[1,3,5],[2,4,6]]."""
    img = list(range(degree))
    for cyc in cycles:
        pts = [c - 1 for c in cyc]
        if any(p < 0 or p >= degree for p in pts):
            raise ValidationError(f"cycle {list(cyc)} out of range for degree {degree}")
        if len(set(pts)) != len(pts):
            raise ValidationError(f"repeated point in cycle {list(cyc)}")
        for i, p in enumerate(pts):
            img[p] = pts[(i + 1) % len(pts)]
    return tuple(img)


def from_images(images: Sequence[int]) -> Perm:
    """Build a permutation from a 1-based one-line image list."""
    img = tuple(x - 1 for x in images)
    if sorted(img) != list(range(len(img))):
        raise ValidationError(f"{list(images)} is not a bijection of 1..{len(images)}")
    return img


def cycle_lengths(g: Perm) -> list[int]:
    seen = [False] * len(g)
    out = []
    for start in range(len(g)):
        if seen[start]:
            continue
        n, x = 0, start
        while not seen[x]:
            seen[x] = True
            x = g[x]
            n += 1
        out.append(n)
    return sorted(out)


def cycle_gcd(g: Perm) -> int:
    """gcd of the orbit sizes of g; divides the degree."""
    return math.gcd(*cycle_lengths(g)) if g else 1


def cycle_type(g: Perm) -> tuple[int, ...]:
    """Sorted multiset of cycle lengths."""
    return tuple(cycle_lengths(g))


class GroupTable:
    """A permutation group closed from generators, with conjugacy classes.

    elements are sorted tuples (the identity comes first); classes partition
    the elements and are sorted by (size, smallest member).  Immutable after
    construction.
    """

    def __init__(self, generators: Sequence[Perm], order_cap: int = DEFAULT_ORDER_CAP):
        if not generators:
            raise ValidationError("need at least one generator (use identity(d))")
        degree = len(generators[0])
        if any(len(g) != degree for g in generators):
            raise ValidationError("generators have mismatched degrees")
        self.degree = degree
        self.generators = tuple(dict.fromkeys(generators))
        self.elements = self._close(order_cap)
        self.order = len(self.elements)
        self._index = {g: i for i, g in enumerate(self.elements)}
        self.transitive = self._orbit_of_zero() == set(range(degree))
        self.classes = self._conjugacy_classes()
        self.class_sizes = tuple(len(c) for c in self.classes)
        self.class_reps = tuple(c[0] for c in self.classes)
        self._class_of = {g: i for i, cls in enumerate(self.classes) for g in cls}
        self.identity_class = self._class_of[identity(degree)]

    def _close(self, cap: int) -> tuple[Perm, ...]:
        e = identity(self.degree)
        seen = {e}
        frontier = [e]
        while frontier:
            nxt = []
            for g in frontier:
                for s in self.generators:
                    h = compose(s, g)
                    if h not in seen:
                        seen.add(h)
                        nxt.append(h)
                        if len(seen) > cap:
                            raise SearchCapError(
                                f"group order exceeds cap {cap}"
                            )
            frontier = nxt
        return tuple(sorted(seen))

    def _orbit_of_zero(self) -> set[int]:
        orbit = {0}
        frontier = [0]
        while frontier:
            nxt = []
            for x in frontier:
                for s in self.generators:
                    if s[x] not in orbit:
                        orbit.add(s[x])
                        nxt.append(s[x])
            frontier = nxt
        return orbit

    def _conjugacy_classes(self) -> tuple[tuple[Perm, ...], ...]:
        unassigned = set(self.elements)
        classes = []
        for g in self.elements:
            if g not in unassigned:
                continue
            orbit = {g}
            frontier = [g]
            while frontier:
                nxt = []
                for h in frontier:
                    for s in self.generators:
                        c = compose(compose(s, h), inverse(s))
                        if c not in orbit:
                            orbit.add(c)
                            nxt.append(c)
                frontier = nxt
            unassigned -= orbit
            classes.append(tuple(sorted(orbit)))
        return tuple(sorted(classes, key=lambda c: (len(c), c[0])))

    def class_of(self, g: Perm) -> int:
        return self._class_of[g]

    def class_cycle_gcd(self, class_index: int) -> int:
        return cycle_gcd(self.class_reps[class_index])

    def class_cycle_type(self, class_index: int) -> tuple[int, ...]:
        return cycle_type(self.class_reps[class_index])

    def classes_with_cycle_type(self, ctype: tuple[int, ...]) -> list[int]:
        return [
            i for i, rep in enumerate(self.class_reps) if cycle_type(rep) == ctype
        ]

    def __repr__(self) -> str:
        return (
            f"GroupTable(degree={self.degree}, order={self.order}, "
            f"classes={len(self.classes)}, transitive={self.transitive})"
        )


def trivial_group() -> GroupTable:
    return GroupTable([identity(1)])


@dataclass(frozen=True)
class ClassFunction:
    """An exact-rational-valued function on the conjugacy classes of a group."""

    group: GroupTable
    values: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.values) != len(self.group.classes):
            raise ValidationError("one value per conjugacy class required")

    def __call__(self, class_index: int) -> Fraction:
        return self.values[class_index]

    def average(self) -> Fraction:
        """Inner product with the trivial character: (1/|G|) sum over g."""
        total = sum(
            (size * v for size, v in zip(self.group.class_sizes, self.values)),
            start=Fraction(0),
        )
        return total / self.group.order

    def is_constant(self) -> bool:
        return len(set(self.values)) <= 1


@dataclass(frozen=True)
class GroupInvariants:
    """The cycle-structure invariants of (G, j, m) controlling growth rates."""

    cycle_lcm: int            # lcm over G of cycle_gcd(g)
    least_prime: int          # smallest prime dividing cycle_lcm * j
    density: Fraction         # proportion of g with least_prime | j*cycle_gcd(g)
    mean_cycle_gcd: Fraction  # (1/|G|) sum of cycle_gcd(g)


def least_prime_factor(n: int) -> int:
    if n < 2:
        raise ValueError(f"{n} has no prime factor")
    f = 2
    while f * f <= n:
        if n % f == 0:
            return f
        f += 1
    return n


def group_invariants(group: GroupTable, j: int, m: int) -> GroupInvariants:
    """Compute (U, u, beta, average cycle gcd) for a transitive group.

    Requires U*j >= 2; the trivial-extension case (degree 1 with j = 1)
    has no meaningful least prime and is rejected.
    """
    if not group.transitive:
        raise ValidationError("group must act transitively")
    per_class = [group.class_cycle_gcd(i) for i in range(len(group.classes))]
    U = math.lcm(*per_class)
    if U * j == 1:
        raise ValidationError("U*j = 1: trivial extension excluded")
    u = least_prime_factor(U * j)
    hits = sum(
        size
        for size, c in zip(group.class_sizes, per_class)
        if (j * c) % u == 0
    )
    beta = Fraction(hits, group.order)
    mean = Fraction(
        sum(size * c for size, c in zip(group.class_sizes, per_class)), group.order
    )
    return GroupInvariants(U, u, beta, mean)


def ramanujan_sum(chi: int, q: int) -> int:
    """Sum of e(chi*x/q) over units x mod q, by the classical closed form.

    Always an integer: mu(q/g) * phi(q) / phi(q/g) with g = gcd(chi, q).
    chi = 0 gives Euler's totient phi(q); chi = 1 gives the Moebius mu(q).
    """
    from .ntheory import moebius, totient

    g = math.gcd(chi, q)
    qg = q // g
    return moebius(qg) * totient(q) // totient(qg)


def leading_class_function(
    group: GroupTable,
    metric: str,
    tau: int,
    chi: int,
    d: int,
    m: int,
    j: int,
    u: int,
) -> ClassFunction:
    """The class function giving the leading Euler-factor coefficient at an
    unramified prime whose Frobenius lies in a given class.

    metric "disc": value is the Ramanujan sum at the least prime u when the
    forced local divisor lcm(dm/cycle_gcd, tau) divides M/u, else 0.
    metric "ram": value is gcd(j*cycle_gcd, M/tau) - 1 when that gcd divides
    chi, else -1.
    """
    M = d * m * j
    if M % tau:
        raise ValidationError(f"tau={tau} does not divide M={M}")
    values = []
    for i in range(len(group.classes)):
        c = group.class_cycle_gcd(i)
        if metric == "disc":
            eta = math.lcm(d * m // c, tau)
            if (M // u) % eta == 0:
                values.append(Fraction(ramanujan_sum(chi, u)))
            else:
                values.append(Fraction(0))
        elif metric == "ram":
            g0 = math.gcd(j * c, M // tau)
            if chi % g0 == 0:
                values.append(Fraction(g0 - 1))
            else:
                values.append(Fraction(-1))
        else:
            raise ValueError(f"unknown metric {metric!r}")
    return ClassFunction(group, tuple(values))


def random_transitive_group(
    degree: int, rng: random.Random, max_generators: int = 4
) -> GroupTable:
    """Sample a transitive subgroup of S_degree: draw up to max_generators
    random permutations, close, retry until the action is transitive."""
    while True:
        k = rng.randint(1, max_generators)
        gens = []
        for _ in range(k):
            img = list(range(degree))
            rng.shuffle(img)
            gens.append(tuple(img))
        group = GroupTable(gens)
        if group.transitive:
            return group
