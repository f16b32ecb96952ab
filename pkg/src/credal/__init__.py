"""Credal network inference: exact credal variable elimination and k-reduction."""

from .geometry import (
    HPolytope,
    InfeasibleError,
    certify_vertex,
    distance,
    h_to_v,
    k_reduction,
    remove_redundant_vertices,
    v_to_h,
)
from .inference import (
    ReductionPolicy,
    ZeroEvidenceError,
    brute_force_oracle,
    credal_ve,
    elimination_order,
)
from .model import (
    ConditionalCredalTable,
    CredalNetwork,
    CredalSet,
    Dag,
    IntervalResult,
    Query,
    Variable,
    validate_network,
)
from .preprocess import requisite_graph

__version__ = "0.1.0"
