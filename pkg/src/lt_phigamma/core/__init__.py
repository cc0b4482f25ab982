"""Core arithmetic, combinatorics and presentations for lt-phigamma."""

from lt_phigamma.core.arith import (
    FieldContext,
    LaurentPoly,
    PrimeParams,
    TruncSeries,
    WittRing,
    field_make,
    witt_make,
)
from lt_phigamma.core.combinat import FSubset, de_split, digits_of, mu, nu_map
from lt_phigamma.core.errors import (
    BudgetExceededError,
    InfeasiblePresentationError,
    OracleError,
    PrecisionError,
)
from lt_phigamma.core.families import (
    FamilyKind,
    FamilySpec,
    family_change_ell,
    family_fiber,
    family_to_irreducible,
    rhd_edges_from_families,
)
from lt_phigamma.core.lubin_tate import LTSeries, lt_coeffs, lt_verify_identities
from lt_phigamma.core.oracle import delta_oracle, gamma_check
from lt_phigamma.core.presentation import (
    PhiMatrix,
    Presentation,
    phi_matrix,
    reducible_presentation,
    stratum_of,
)
from lt_phigamma.core.strata import (
    Irreducible,
    Reducible,
    StrataGraph,
    StratumE,
    rhd,
    weight_set,
)
from lt_phigamma.core.verifiers import VerificationReport

__all__ = [
    "BudgetExceededError",
    "FSubset",
    "FamilyKind",
    "FamilySpec",
    "FieldContext",
    "InfeasiblePresentationError",
    "Irreducible",
    "LTSeries",
    "LaurentPoly",
    "OracleError",
    "PhiMatrix",
    "PrecisionError",
    "Presentation",
    "PrimeParams",
    "Reducible",
    "StrataGraph",
    "StratumE",
    "TruncSeries",
    "VerificationReport",
    "WittRing",
    "de_split",
    "delta_oracle",
    "digits_of",
    "family_change_ell",
    "family_fiber",
    "family_to_irreducible",
    "field_make",
    "gamma_check",
    "lt_coeffs",
    "lt_verify_identities",
    "mu",
    "nu_map",
    "phi_matrix",
    "reducible_presentation",
    "rhd",
    "rhd_edges_from_families",
    "stratum_of",
    "weight_set",
    "witt_make",
]
