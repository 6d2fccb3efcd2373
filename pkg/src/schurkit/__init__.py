"""S-rings over small abelian groups, Cayley isomorphism, and CI censuses."""

from __future__ import annotations

from .errors import (AxiomViolation, BudgetExceeded, InvalidArgument, NotApplicable,
                     PropertyViolation, SchurKitError)
from .groups import Group, Section, Subgroup, automorphism_group, make_section
from .sring import SRing, generated_sring, validate_sring

__version__ = "0.1.0"

__all__ = [
    "AxiomViolation", "BudgetExceeded", "Group", "InvalidArgument", "NotApplicable",
    "PropertyViolation", "SRing", "SchurKitError", "Section", "Subgroup",
    "automorphism_group", "generated_sring", "make_section", "validate_sring",
]
