"""Exception hierarchy shared across the library.

Each class maps to a distinct CLI exit code (see cli.py).
"""


class CensusError(Exception):
    """Base class for all library errors."""


class SchemaError(CensusError):
    """Malformed input file: unknown fields, wrong types, bad JSON."""


class ValidationError(CensusError):
    """Mathematically inconsistent data (invariant sums, fiber mismatches, ...)."""


class ModulusMismatchError(ValidationError):
    """Binary residue operation on unequal moduli."""


class CoverageError(CensusError):
    """A requested computation needs places beyond what the tail oracle provides."""


class StochasticModeError(CoverageError):
    """An exact computation was requested on a sampled (Monte Carlo) setup."""


class SearchCapError(CensusError):
    """A finite search would exceed the configured size cap."""
