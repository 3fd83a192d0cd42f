"""Decision procedures for thorn-dividing, thorn-forking and thorn-ranks in
the theories of pure equality, dense linear order and an equivalence
relation with infinitely many infinite classes."""

__version__ = "0.1.0"

from .definable import Family, family_of_conjugates, is_algebraic, k_inconsistent, min_k
from .forking import (
    SearchBudget,
    is_morley,
    morley_consistent,
    morley_sequence,
    strongly_divides,
    thorn_divides,
    thorn_forks,
    thorn_indep,
)
from .oracles import oracle_dim, oracle_indep, oracle_rank, oracle_uth
from .rank import RankParams, lascar_check, local_rank, uth_of_formula, uth_rank, uth_star_rank
from .theories import get_theory

__all__ = [
    "Family",
    "RankParams",
    "SearchBudget",
    "family_of_conjugates",
    "get_theory",
    "is_algebraic",
    "is_morley",
    "k_inconsistent",
    "lascar_check",
    "local_rank",
    "min_k",
    "morley_consistent",
    "morley_sequence",
    "oracle_dim",
    "oracle_indep",
    "oracle_rank",
    "oracle_uth",
    "strongly_divides",
    "thorn_divides",
    "thorn_forks",
    "thorn_indep",
    "uth_of_formula",
    "uth_rank",
    "uth_star_rank",
]
