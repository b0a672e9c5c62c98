"""Small exact number-theory helpers: sieves, factorization, multiplicative
functions, and the quadratic residue symbol for prime moduli.

Everything works on arbitrary-precision integers; all routines here are meant
for desk-scale inputs (norms and moduli of a few digits; sieve bounds up to a
few million).
"""

from __future__ import annotations

import math
from functools import lru_cache


def primes_up_to(n: int) -> list[int]:
    """All primes <= n by an Eratosthenes sieve."""
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return [i for i, flag in enumerate(sieve) if flag]


def iter_primes():
    """Unbounded ascending prime generator (growing sieve blocks)."""
    bound = 1 << 10
    emitted = 0
    while True:
        block = primes_up_to(bound)
        yield from block[emitted:]
        emitted = len(block)
        bound *= 4


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of n >= 1 by trial division."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 5
    while f * f <= n:
        for p in (f, f + 2):
            while n % p == 0:
                out[p] = out.get(p, 0) + 1
                n //= p
        f += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@lru_cache(maxsize=None)
def divisors(n: int) -> tuple[int, ...]:
    """Positive divisors of n, ascending."""
    ds = [1]
    for p, e in factorize(n).items():
        ds = [d * p**k for d in ds for k in range(e + 1)]
    return tuple(sorted(ds))


def totient(n: int) -> int:
    phi = n
    for p in factorize(n):
        phi -= phi // p
    return phi


def moebius(n: int) -> int:
    fac = factorize(n)
    if any(e > 1 for e in fac.values()):
        return 0
    return -1 if len(fac) % 2 else 1


def kronecker_prime(disc: int, p: int) -> int:
    """Quadratic residue symbol (disc | p) for a prime p.

    disc is a fundamental discriminant; returns 0 when p divides disc,
    otherwise +1 (split) or -1 (inert).  For odd p this is the Legendre
    symbol via Euler's criterion; for p = 2 the usual mod-8 rule.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if disc % p == 0:
        return 0
    if p == 2:
        return 1 if disc % 8 == 1 else -1
    r = pow(disc % p, (p - 1) // 2, p)
    return 1 if r == 1 else -1


def is_fundamental_discriminant(disc: int) -> bool:
    """Discriminant of a quadratic field: 1 mod 4 and squarefree, or
    4k with k = 2, 3 mod 4 squarefree."""
    if disc in (0, 1):
        return False
    if disc % 4 == 1:
        return moebius(abs(disc)) != 0
    if disc % 4 == 0:
        k = disc // 4
        return k % 4 in (2, 3) and moebius(abs(k)) != 0
    return False
