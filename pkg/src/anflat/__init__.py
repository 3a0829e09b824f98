"""Boolean function analysis over GF(2).

Parse and manipulate algebraic normal forms, run greedy 0-restrictions,
decompose quadratics into their canonical form, and constructively find
large flats on which a low-thickness function is constant.
"""

from .anf_core import (
    Anf,
    FunctionInput,
    TruthTable,
    anf_to_truth_table,
    compose_affine,
    format_anf,
    parse_anf,
    truth_table_to_anf,
)
from .f2_linalg import AffineMap, BitMatrix, BitVec, Flat
from .pipeline import FlatReport, find_constant_flat, verify_flat
from .quadratic import DicksonForm, dickson_decompose, quadratic_flat
from .restriction import (
    RestrictionState,
    RestrictionTrace,
    UntilCrucialAtMostThirdOfAlive,
    UntilNoCrucial,
    UntilSteps,
    exhaustive_hitting_set,
    greedy_restrict,
)

__version__ = "0.1.0"

__all__ = [
    "AffineMap",
    "Anf",
    "BitMatrix",
    "BitVec",
    "DicksonForm",
    "Flat",
    "FlatReport",
    "FunctionInput",
    "RestrictionState",
    "RestrictionTrace",
    "TruthTable",
    "UntilCrucialAtMostThirdOfAlive",
    "UntilNoCrucial",
    "UntilSteps",
    "anf_to_truth_table",
    "compose_affine",
    "dickson_decompose",
    "exhaustive_hitting_set",
    "find_constant_flat",
    "format_anf",
    "greedy_restrict",
    "parse_anf",
    "quadratic_flat",
    "truth_table_to_anf",
    "verify_flat",
    "__version__",
]
