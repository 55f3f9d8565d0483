"""Binary orthogonal arrays in exact arithmetic."""

from .boolean import BooleanFunction, ci_order, nordstrom_robinson, weight
from .core import (
    BinaryArray,
    CanonicalForm,
    IsoOp,
    MultiplicityVector,
    OAParams,
    canonical_form,
    delete_columns,
    derive,
    is_simple,
    verify_strength,
)
from .lp import delsarte_min_runs, lp_max_multiplicity, lp_max_multiplicity_bound
from .solver import Status, enumerate_classes, extend_classes, feasible

__version__ = "0.1.0"

__all__ = [
    "BinaryArray",
    "BooleanFunction",
    "CanonicalForm",
    "IsoOp",
    "MultiplicityVector",
    "OAParams",
    "Status",
    "canonical_form",
    "ci_order",
    "delete_columns",
    "delsarte_min_runs",
    "derive",
    "enumerate_classes",
    "extend_classes",
    "feasible",
    "is_simple",
    "lp_max_multiplicity",
    "lp_max_multiplicity_bound",
    "nordstrom_robinson",
    "verify_strength",
    "weight",
]
