"""Arithmetic in Z/MZ with ideal-divisibility semantics.

A nonzero class a mod M generates the ideal (gcd(a, M)); "a divides b",
"order", and "gcd" statements are statements about these ideals, identified
with positive divisors of M.  Classes convert to reduced fractions in Q/Z
via a/M; the reduced denominator is the additive order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ModulusMismatchError


@dataclass(frozen=True, order=True)
class Residue:
    """A canonically reduced element of Z/MZ.

    value is always stored in [0, modulus); equality is syntactic.
    Immutable, safe to share across workers.
    """

    modulus: int
    value: int

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError(f"modulus must be positive, got {self.modulus}")
        object.__setattr__(self, "value", self.value % self.modulus)

    def __repr__(self) -> str:
        return f"Residue({self.value} mod {self.modulus})"

    def _check(self, other: "Residue") -> None:
        if self.modulus != other.modulus:
            raise ModulusMismatchError(
                f"moduli differ: {self.modulus} vs {other.modulus}"
            )

    def __add__(self, other: "Residue") -> "Residue":
        self._check(other)
        return Residue(self.modulus, self.value + other.value)

    def __neg__(self) -> "Residue":
        return Residue(self.modulus, -self.value)

    def __sub__(self, other: "Residue") -> "Residue":
        self._check(other)
        return Residue(self.modulus, self.value - other.value)

    def scaled(self, k: int) -> "Residue":
        """The class k*a mod M for an integer k."""
        return Residue(self.modulus, k * self.value)

    def ideal_gcd(self) -> int:
        """The positive divisor of M generating the ideal of this class.

        The zero class generates the zero ideal, represented by M itself.
        """
        return math.gcd(self.value, self.modulus)

    def order(self) -> int:
        """Additive order in Z/MZ: M / gcd(M, value)."""
        return self.modulus // self.ideal_gcd()

    def to_qz(self) -> Fraction:
        """The class of value/M in Q/Z as a reduced fraction in [0, 1).

        The reduced denominator equals order().
        """
        return Fraction(self.value, self.modulus)

    def divisible_by(self, t: "Residue | int") -> bool:
        """Ideal divisibility: does t divide this class?

        t is another residue mod M or a positive divisor of M; true iff
        gcd(t, M) divides every integer representative of this class.
        """
        if isinstance(t, Residue):
            self._check(t)
            t = t.ideal_gcd()
        if t < 1 or self.modulus % t:
            raise ValueError(f"{t} is not a positive divisor of {self.modulus}")
        return self.value % t == 0

    def is_zero(self) -> bool:
        return self.value == 0


def divides(a: "Residue | int", b: Residue) -> bool:
    """Does a divide b in Z/MZ (as principal ideals)?"""
    return b.divisible_by(a)
