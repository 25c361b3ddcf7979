"""Concurrent games and probabilistic strategies with parallel causes,
over finite event structures, with brute-force oracles for verification."""

from .errors import (BudgetError, FormatError, InternalError, ParcausesError,
                     UndefinedConditionalError, UsageError)
from .structures import (DEFAULT_BUDGET, Family, FamilyMap, StructMap, Structure,
                         ValidationReport, canonical_ges, configs,
                         configs_bruteforce, family_of, identity_map,
                         irreducibles, make_family, make_family_map, make_map,
                         make_structure, maps_equivalent, prime_as_general,
                         to_conflicts, to_explicit, validate, validate_family,
                         validate_family_map, validate_map)

__all__ = [name for name in dir() if not name.startswith("_")]
