"""Exact arithmetic with integer combinations of M-th roots of unity.

An element of the group ring Z[Z/MZ] is an integer vector (a_0, ..., a_{M-1})
standing for sum a_k * e(k/M).  Character-sum identities are verified here
without any floating point: an element represents an integer exactly when its
polynomial reduces to a constant modulo the M-th cyclotomic polynomial, and
the reduction is exact integer polynomial division.
"""

from __future__ import annotations

from functools import lru_cache

from . import ntheory
from .errors import ValidationError


def _poly_divmod(num: list[int], den: list[int]) -> tuple[list[int], list[int]]:
    """Division with remainder in Z[x] for a monic divisor."""
    num = list(num)
    dn, dd = len(num) - 1, len(den) - 1
    if den[-1] != 1:
        raise ValueError("divisor must be monic")
    quo = [0] * max(dn - dd + 1, 1)
    for k in range(dn - dd, -1, -1):
        coeff = num[dd + k]
        if coeff:
            quo[k] = coeff
            for i, c in enumerate(den):
                num[i + k] -= coeff * c
    while len(num) > 1 and num[-1] == 0:
        num.pop()
    return quo, num


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Coefficients (ascending) of the n-th cyclotomic polynomial, computed by
    dividing x^n - 1 by the cyclotomic polynomials of the proper divisors."""
    if n == 1:
        return (-1, 1)
    poly = [-1] + [0] * (n - 1) + [1]
    for d in ntheory.divisors(n)[:-1]:
        poly, rem = _poly_divmod(poly, list(cyclotomic_polynomial(d)))
        if any(rem[i] for i in range(len(rem))):
            raise AssertionError("cyclotomic division must be exact")
    return tuple(poly)


class GroupRingElement:
    """An integer vector indexed by Z/MZ, representing sum a_k e(k/M)."""

    __slots__ = ("modulus", "coords")

    def __init__(self, modulus: int, coords: list[int] | None = None):
        self.modulus = modulus
        self.coords = list(coords) if coords is not None else [0] * modulus
        if len(self.coords) != modulus:
            raise ValidationError("coordinate vector length must equal the modulus")

    @classmethod
    def integer(cls, modulus: int, n: int) -> "GroupRingElement":
        e = cls(modulus)
        e.coords[0] = n
        return e

    @classmethod
    def root(cls, modulus: int, k: int, coeff: int = 1) -> "GroupRingElement":
        e = cls(modulus)
        e.coords[k % modulus] = coeff
        return e

    def __add__(self, other: "GroupRingElement") -> "GroupRingElement":
        if self.modulus != other.modulus:
            raise ValidationError("group ring moduli differ")
        return GroupRingElement(
            self.modulus, [a + b for a, b in zip(self.coords, other.coords)]
        )

    def add_root(self, k: int, coeff: int = 1) -> None:
        """In-place accumulation of coeff * e(k/M)."""
        self.coords[k % self.modulus] += coeff

    def scaled(self, c: int) -> "GroupRingElement":
        return GroupRingElement(self.modulus, [c * a for a in self.coords])

    def rotated(self, k: int) -> "GroupRingElement":
        """Multiplication by e(k/M): a cyclic index shift."""
        M = self.modulus
        k %= M
        return GroupRingElement(M, [self.coords[(i - k) % M] for i in range(M)])

    def is_zero(self) -> bool:
        return not any(self.coords)

    def rational_value(self) -> int | None:
        """The integer this element represents, or None if its image in the
        cyclotomic field is irrational.  Exact: reduce the coordinate
        polynomial modulo the M-th cyclotomic polynomial and require a
        constant remainder."""
        poly = list(self.coords)
        while len(poly) > 1 and poly[-1] == 0:
            poly.pop()
        _, rem = _poly_divmod(poly, list(cyclotomic_polynomial(self.modulus)))
        if any(rem[1:]):
            return None
        return rem[0]

    def collapse(self) -> int:
        """The represented integer; raises if the element is irrational."""
        v = self.rational_value()
        if v is None:
            raise ValidationError(
                f"group-ring coefficient {self.coords} mod {self.modulus} "
                "does not represent a rational number"
            )
        return v

    def __repr__(self) -> str:
        return f"GroupRingElement(mod {self.modulus}, {self.coords})"
