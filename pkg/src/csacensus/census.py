"""Exhaustive enumeration of invariant profiles under a discriminant or
ramified-product budget, plus the finite existence test and the constructive
witness for a profile with prescribed exceptional behavior.

The admissible profiles are the finitely supported maps from places to Z/MZ
subject to: trivial at complex places, 2-torsion at real places, the
embedding condition for the inner algebra at every fiber, total sum zero,
agreement with a prescribed partial map xi on a finite set S, and global
divisibility by a sieving divisor tau.  Completeness of the enumeration rests
on the budget: a non-exceptional prime can carry a nonzero value only if its
cheapest admissible nonzero value fits the remaining budget, which bounds the
candidate set explicitly.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .brauer import (
    FactoredRational,
    InvariantProfile,
    disc_over_center,
    embeds_into,
    index_and_skew,
    ram_product,
    validate_profile,
)
from .errors import (
    CoverageError,
    SearchCapError,
    StochasticModeError,
    ValidationError,
)
from .fieldsetup import FieldSetup, Place
from .perms import group_invariants
from .residues import Residue

EXISTENCE_CAP = 10**6
WITNESS_NORM_CAP = 10**6


@dataclass(frozen=True)
class LocalConstraint:
    """A prescribed partial profile: values xi on a finite place set S, and a
    divisor tau of the degree that must divide every local invariant."""

    xi: dict[str, int] = field(default_factory=dict)
    tau: int = 1

    def __post_init__(self):
        object.__setattr__(self, "xi", {str(k): int(v) for k, v in self.xi.items()})

    @property
    def support(self) -> frozenset[str]:
        return frozenset(self.xi)

    @classmethod
    def from_json_dict(cls, data: dict) -> "LocalConstraint":
        from .errors import SchemaError

        unknown = set(data) - {"xi", "tau"}
        if unknown:
            raise SchemaError(f"unknown fields {sorted(unknown)} in constraint")
        xi = {}
        for entry in data.get("xi", []):
            bad = set(entry) - {"place", "value"}
            if bad:
                raise SchemaError(f"unknown fields {sorted(bad)} in constraint entry")
            xi[str(entry["place"])] = int(entry["value"])
        return cls(xi=xi, tau=int(data.get("tau", 1)))


@dataclass
class CensusRow:
    """One enumerated algebra: its profile and the cached summary columns,
    all recomputable from the profile."""

    profile: InvariantProfile
    disc: FactoredRational
    ram: FactoredRational
    index: int
    is_skew: bool
    metric_value: int


# -- per-place admissibility --------------------------------------------------


def _fiber_condition(setup: FieldSetup, place: Place, value: int) -> bool:
    """Embedding condition at one place: dm | d_w*value - d*j*kappa_w for
    every fiber w above it."""
    M, dm, dj = setup.M, setup.d * setup.m, setup.d * setup.j
    for f in place.fibers:
        if (f.local_degree * value - dj * f.kappa.value) % dm:
            return False
    return True


def admissible_values(setup: FieldSetup, place: Place, tau: int) -> list[int]:
    """All values of Z/MZ allowed at one place: archimedean torsion bounds,
    the fiber embedding condition, and divisibility by tau."""
    M = setup.M
    if place.kind == "complex":
        candidates = [0]
    elif place.kind == "real":
        candidates = [0] + ([M // 2] if M % 2 == 0 else [])
    elif place.id in setup.exceptional:
        candidates = range(M)
    else:
        eta = setup.forced_divisor(tau, place.id)
        return list(range(0, M, eta))
    return [
        v
        for v in candidates
        if v % tau == 0 and _fiber_condition(setup, place, v)
    ]


def _value_cost(M: int, norm: int, value: int, metric: str) -> int:
    if metric == "disc":
        return norm ** (M * (M - math.gcd(M, value)))
    if metric == "ram":
        return norm if value else 1
    raise ValueError(f"unknown metric {metric!r}")


def validate_constraint(setup: FieldSetup, constraint: LocalConstraint) -> None:
    """The prescribed values must themselves be admissible."""
    if setup.M % constraint.tau:
        raise ValidationError(
            f"tau={constraint.tau} does not divide M={setup.M}"
        )
    for pid, value in constraint.xi.items():
        place = setup.place(pid)
        allowed = admissible_values(setup, place, constraint.tau)
        if value % setup.M not in allowed:
            raise ValidationError(
                f"constraint value {value} at place {pid} violates the local conditions"
            )


# -- membership ---------------------------------------------------------------


def accepts(
    setup: FieldSetup,
    constraint: LocalConstraint | None,
    profile: InvariantProfile,
    skew_only: bool = False,
) -> bool:
    """Does the profile lie in the constrained census set (optionally
    restricted to skew fields)?"""
    ok, _ = validate_profile(profile)
    if not ok:
        return False
    if not embeds_into(setup, profile):
        return False
    if constraint is not None:
        for pid, value in constraint.xi.items():
            if profile.value(pid).value != value % setup.M:
                return False
        if any(
            r.value % constraint.tau for _, r in profile.items()
        ):
            return False
    if skew_only and not index_and_skew(profile)[1]:
        return False
    return True


# -- enumeration ---------------------------------------------------------------


def _integer_root(bound: int, exp: int) -> int:
    """Largest n >= 0 with n**exp <= bound (exact, big-integer safe)."""
    if bound < 1:
        return 0
    if exp == 1:
        return bound
    n = int(round(bound ** (1.0 / exp)))
    while n**exp > bound:
        n -= 1
    while (n + 1) ** exp <= bound:
        n += 1
    return n


def _largest_admissible_divisor(M: int, eta: int) -> int | None:
    """Largest proper divisor of M divisible by eta, or None."""
    best = None
    for g in range(eta, M, eta):
        if M % g == 0:
            best = g
    return best


@dataclass
class _SearchItem:
    place_id: str
    norm: int
    options: list[tuple[int, int]]  # (value, cost), value 0 first when allowed
    min_nonzero_cost: int


def _prepare_items(
    setup: FieldSetup,
    constraint: LocalConstraint,
    metric: str,
    bound: int,
) -> tuple[dict[str, int], int, list[_SearchItem], int, list[tuple[str, list[int]]]]:
    """Split the problem into the fixed part, the finite search items (free
    exceptional places first, then budget-bounded tail candidates), and the
    free archimedean places."""
    M, tau = setup.M, constraint.tau
    fixed = {pid: v % M for pid, v in constraint.xi.items()}
    fixed_cost = 1
    for pid, v in fixed.items():
        place = setup.place(pid)
        if not place.is_arch:
            fixed_cost *= _value_cost(M, place.norm, v, metric)

    free_arch = []
    items: list[_SearchItem] = []
    for place in setup.places:
        if place.id in fixed:
            continue
        if place.is_arch:
            free_arch.append((place.id, admissible_values(setup, place, tau)))
        elif place.id in setup.exceptional:
            opts = [
                (v, _value_cost(M, place.norm, v, metric))
                for v in admissible_values(setup, place, tau)
            ]
            nz = [c for v, c in opts if v]
            items.append(
                _SearchItem(place.id, place.norm, opts, min(nz) if nz else bound + 1)
            )
    n_forced = len(items)

    if bound >= fixed_cost:
        remaining = bound // fixed_cost
        items.extend(_tail_candidates(setup, constraint, metric, remaining))
    return fixed, fixed_cost, items, n_forced, free_arch


def _tail_candidates(
    setup: FieldSetup,
    constraint: LocalConstraint,
    metric: str,
    remaining: int,
) -> list[_SearchItem]:
    M, tau = setup.M, constraint.tau
    if metric == "ram":
        max_norm = remaining
    else:
        exps = []
        for i in range(len(setup.group.classes)):
            c = setup.group.class_cycle_gcd(i)
            eta = math.lcm(setup.d * setup.m // c, tau)
            g = _largest_admissible_divisor(M, eta)
            if g is not None:
                exps.append(M * (M - g))
        if not exps:
            return []
        max_norm = _integer_root(remaining, min(exps))
    if max_norm < 2:
        return []
    out = []
    for place in setup.iter_finite_nonexceptional(max_norm):
        if place.id in constraint.xi:
            continue
        eta = setup.forced_divisor(tau, place.id)
        if eta == M:
            continue
        opts = [(0, 1)] + [
            (v, _value_cost(M, place.norm, v, metric)) for v in range(eta, M, eta)
        ]
        nz = [c for v, c in opts if v]
        if min(nz) > remaining:
            continue
        out.append(_SearchItem(place.id, place.norm, opts, min(nz)))
    out.sort(key=lambda it: (it.min_nonzero_cost, it.norm, it.place_id))
    return out


def _run_search(
    setup: FieldSetup,
    items: list[_SearchItem],
    n_forced: int,
    free_arch: list[tuple[str, list[int]]],
    fixed: dict[str, int],
    fixed_cost: int,
    bound: int,
    skew_only: bool,
    tau: int,
    prefix: list[int] | None = None,
) -> list[tuple[dict[str, int], int]]:
    """Depth-first search over finite value choices.

    items[:n_forced] are exceptional places enumerated exhaustively in order;
    the rest are budget-sorted tail candidates, visited in increasing index so
    that every assignment is produced exactly once, with a break as soon as
    the cheapest remaining nonzero value no longer fits.  Archimedean places
    are completed last (they cost nothing and must close the sum condition).
    Returns (assignment, metric) pairs, unsorted.  prefix pins the option
    chosen at the first len(prefix) items, partitioning the space across
    workers.
    """
    M = setup.M
    results: list[tuple[dict[str, int], int]] = []
    fixed_sum = sum(fixed.values()) % M

    arch_ids = [pid for pid, _ in free_arch]
    combos = [()]
    for _, vals in free_arch:
        combos = [c + (v,) for c in combos for v in vals]
    arch_by_total: dict[int, list[tuple[int, ...]]] = {}
    for c in combos:
        arch_by_total.setdefault(sum(c) % M, []).append(c)

    def finalize(chosen: dict[str, int], total_sum: int, metric_acc: int) -> None:
        deficit = (-total_sum) % M
        for combo in arch_by_total.get(deficit, ()):
            assignment = dict(fixed)
            assignment.update(chosen)
            assignment.update({pid: v for pid, v in zip(arch_ids, combo) if v})
            if skew_only:
                g = M
                for v in assignment.values():
                    g = math.gcd(g, v)
                if g != 1:
                    continue
            results.append((assignment, metric_acc))

    def recurse(idx: int, chosen: dict[str, int], total: int, acc: int) -> None:
        if idx >= n_forced:
            finalize(chosen, total, acc)
            for k in range(idx, len(items)):
                it = items[k]
                if it.min_nonzero_cost * acc > bound:
                    break
                for v, cost in it.options:
                    if v == 0 or acc * cost > bound:
                        continue
                    chosen[it.place_id] = v
                    recurse(k + 1, chosen, total + v, acc * cost)
                    del chosen[it.place_id]
        else:
            it = items[idx]
            for v, cost in it.options:
                if acc * cost > bound:
                    continue
                if v:
                    chosen[it.place_id] = v
                recurse(idx + 1, chosen, total + v, acc * cost)
                if v:
                    del chosen[it.place_id]

    if fixed_cost > bound:
        return results
    chosen: dict[str, int] = {}
    total, acc = fixed_sum, fixed_cost
    for depth, opt_index in enumerate(prefix or []):
        v, cost = items[depth].options[opt_index]
        if acc * cost > bound:
            return results
        if v:
            chosen[items[depth].place_id] = v
        total += v
        acc *= cost
    recurse(len(prefix or []), chosen, total, acc)
    return results


def _worker(args) -> list[tuple[dict[str, int], int]]:
    (setup, items, n_forced, free_arch, fixed, fixed_cost, bound, skew_only, tau, prefix) = args
    return _run_search(
        setup, items, n_forced, free_arch, fixed, fixed_cost, bound, skew_only, tau, prefix
    )


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("CSACENSUS_WORKERS", "1")))
    except ValueError:
        return 1


def enumerate_census(
    setup: FieldSetup,
    constraint: LocalConstraint | None,
    metric: str,
    bound: int,
    skew_only: bool = False,
    allow_stochastic: bool = False,
    workers: int | None = None,
) -> list[CensusRow]:
    """The complete, duplicate-free, deterministically ordered list of
    profiles meeting the constraint with metric <= bound."""
    if metric not in ("disc", "ram"):
        raise ValueError(f"unknown metric {metric!r}")
    if bound < 1:
        return []
    if setup.tail.stochastic and not allow_stochastic:
        raise StochasticModeError(
            "sampled tail oracle cannot support an exact census "
            "(pass allow_stochastic=True for a Monte Carlo shape run)"
        )
    constraint = constraint or LocalConstraint()
    validate_constraint(setup, constraint)
    fixed, fixed_cost, items, n_forced, free_arch = _prepare_items(
        setup, constraint, metric, bound
    )

    workers = default_workers() if workers is None else max(1, workers)
    if workers == 1 or not items:
        raw = _run_search(
            setup, items, n_forced, free_arch, fixed, fixed_cost, bound,
            skew_only, constraint.tau,
        )
    else:
        tasks = [
            (setup, items, n_forced, free_arch, fixed, fixed_cost, bound,
             skew_only, constraint.tau, [k])
            for k in range(len(items[0].options))
        ]
        raw = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_worker, tasks):
                raw.extend(part)

    rows = []
    for assignment, metric_value in raw:
        profile = InvariantProfile(setup, dict(assignment))
        index, skew = index_and_skew(profile)
        rows.append(
            CensusRow(
                profile=profile,
                disc=disc_over_center(profile),
                ram=ram_product(profile),
                index=index,
                is_skew=skew,
                metric_value=metric_value,
            )
        )
    rows.sort(key=_row_key)
    return rows


def _row_key(row: CensusRow):
    return (
        row.metric_value,
        tuple(
            (row.profile.setup.place(pid).sort_key(), r.value)
            for pid, r in row.profile.items()
        ),
    )


def count_table(
    setup: FieldSetup,
    constraint: LocalConstraint | None,
    metric: str,
    grid: list[int],
    allow_stochastic: bool = False,
) -> list[tuple[int, int, int]]:
    """(X, N(X), N_skew(X)) for each grid point, from a single enumeration at
    the largest bound."""
    if any(b > a for a, b in zip(grid, grid[1:])) or not grid:
        raise ValidationError("grid must be a non-empty ascending list")
    rows = enumerate_census(
        setup, constraint, metric, grid[-1], allow_stochastic=allow_stochastic
    )
    out = []
    for x in grid:
        n = sum(1 for r in rows if r.metric_value <= x)
        n_skew = sum(1 for r in rows if r.metric_value <= x and r.is_skew)
        out.append((x, n, n_skew))
    return out


# -- existence and witnesses ---------------------------------------------------


def _exceptional_options(
    setup: FieldSetup, xi: dict[str, int]
) -> list[tuple[str, list[int]]]:
    options = []
    for pid in sorted(setup.exceptional, key=lambda q: setup.place(q).sort_key()):
        place = setup.place(pid)
        if pid in xi:
            allowed = admissible_values(setup, place, 1)
            if xi[pid] % setup.M not in allowed:
                options.append((pid, []))
            else:
                options.append((pid, [xi[pid] % setup.M]))
        else:
            options.append((pid, admissible_values(setup, place, 1)))
    return options


def decide_existence(
    setup: FieldSetup,
    xi: dict[str, int] | None = None,
    skew: bool = False,
    cap: int = EXISTENCE_CAP,
) -> tuple[bool, dict[str, int] | None]:
    """Is there any admissible profile extending xi (given on a subset of the
    exceptional places)?  Returns (answer, certificate), the certificate being
    a satisfying map on the exceptional places.

    The search is finite: values on the exceptional places such that the sum
    is divisible by dm/U, and, for the skew variant, such that dm/U together
    with the assigned values generates Z/MZ.  A skew extension forces m and j
    coprime, which is checked first.
    """
    if skew and math.gcd(setup.m, setup.j) != 1:
        return False, None
    xi = {str(k): int(v) for k, v in (xi or {}).items()}
    unknown = set(xi) - setup.exceptional
    if unknown:
        raise ValidationError(
            f"existence is decided on exceptional places only; {sorted(unknown)} are not"
        )
    inv = group_invariants(setup.group, setup.j, setup.m)
    dm_over_U = setup.d * setup.m // inv.cycle_lcm
    options = _exceptional_options(setup, xi)

    total = 1
    for _, vals in options:
        total *= max(len(vals), 1)
        if total > cap:
            raise SearchCapError(
                f"existence search space exceeds cap {cap}"
            )
    if any(not vals for _, vals in options):
        return False, None

    M = setup.M

    def search(idx: int, assignment: dict[str, int], sigma: int, g: int):
        if idx == len(options):
            if sigma % dm_over_U:
                return None
            if skew and math.gcd(dm_over_U, g) != 1:
                return None
            return dict(assignment)
        pid, vals = options[idx]
        for v in vals:
            assignment[pid] = v
            found = search(
                idx + 1, assignment, (sigma + v) % M, math.gcd(g, math.gcd(v, M))
            )
            if found is not None:
                return found
            del assignment[pid]
        return None

    cert = search(0, {}, 0, M)
    return (cert is not None), cert


def construct_witness(
    setup: FieldSetup,
    partial: dict[str, int],
    skew: bool = False,
    norm_cap: int = WITNESS_NORM_CAP,
) -> InvariantProfile:
    """Extend a satisfying exceptional-place assignment to a full admissible
    profile by adjoining auxiliary primes.

    If a skew profile is requested, first add one prime per attainable forced
    divisor so that those divisors together generate down to dm/U; then close
    the sum condition by an integer linear combination of forced divisors
    spread over fresh primes, one per divisor.
    """
    if setup.tail.stochastic:
        raise StochasticModeError("witness construction needs an exact tail oracle")
    M = setup.M
    partial = {str(k): int(v) % M for k, v in partial.items()}
    if set(partial) - setup.exceptional:
        raise ValidationError("the partial map must live on the exceptional places")
    for pid, v in partial.items():
        if v % M not in admissible_values(setup, setup.place(pid), 1):
            raise ValidationError(f"partial value at {pid} violates local conditions")
    inv = group_invariants(setup.group, setup.j, setup.m)
    dm_over_U = setup.d * setup.m // inv.cycle_lcm
    sigma0 = sum(partial.values()) % M
    if sigma0 % dm_over_U:
        raise ValidationError("partial map fails the reachable-sum condition")

    forced = sorted(
        {
            setup.d * setup.m // setup.group.class_cycle_gcd(i)
            for i in range(len(setup.group.classes))
        }
    )

    assignment = dict(partial)
    used: set[str] = set(partial)

    def claim_prime(value_needed: int) -> str:
        for place in setup.iter_finite_nonexceptional(norm_cap):
            if place.id in used:
                continue
            if setup.forced_divisor(1, place.id) == value_needed:
                used.add(place.id)
                return place.id
        raise CoverageError(
            f"no unused prime with forced divisor {value_needed} within norm {norm_cap}"
        )

    if skew:
        if math.gcd(setup.m, setup.j) != 1:
            raise ValidationError("no skew extension exists: m and j share a factor")
        g_part = M
        for v in partial.values():
            g_part = math.gcd(g_part, math.gcd(v, M))
        if math.gcd(dm_over_U, g_part) != 1:
            raise ValidationError("partial map fails the skew generation condition")
        for w in forced:
            pid = claim_prime(w)
            assignment[pid] = w % M

    deficit = (-sum(assignment.values())) % M
    if deficit:
        g_all = math.gcd(*forced)
        if deficit % g_all:
            raise AssertionError("deficit not reachable; existence check was wrong")
        # integer combination sum x_i * forced_i = gcd, then scale
        coeffs = _gcd_combination(forced)
        t = deficit // g_all
        for w, x in zip(forced, coeffs):
            v = (t * x * w) % M
            if v:
                pid = claim_prime(w)
                assignment[pid] = v

    profile = InvariantProfile(setup, dict(assignment))
    if not accepts(setup, None, profile, skew_only=skew):
        raise AssertionError("constructed witness failed verification")
    return profile


def _gcd_combination(values: list[int]) -> list[int]:
    """Integers x_i with sum x_i*values_i = gcd(values)."""
    coeffs = [0] * len(values)
    g, coeffs[0] = values[0], 1
    for i in range(1, len(values)):
        g2, a, b = _ext_gcd(g, values[i])
        for k in range(i):
            coeffs[k] *= a
        coeffs[i] = b
        g = g2
    return coeffs


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return a, 1, 0
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y
