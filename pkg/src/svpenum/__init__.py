"""Space-efficient shortest-vector search.

Coset enumeration over a bounded-distance decoder built from dual-lattice
Gaussian samples, plus an exactly simulated Grover-search variant with
query accounting. Estimator-style frontends (`BddpDecoder`, `EnumSVP`,
`QuantumSVP`) follow the scikit-learn fit/transform conventions.
"""

from .decoder import (
    BddConfig,
    BddpAdvice,
    BddpDecoder,
    DecodeFailure,
    bddp_preprocess,
    bddp_query,
    periodic_gaussian,
    periodic_gaussian_gradient,
)
from .gaussian import (
    DualSampleSet,
    epsilon_for_dim,
    rho,
    sample_dual_set,
    sample_lattice_gaussian,
    smoothing_parameter,
)
from .grover import (
    QuantumSVP,
    QueryLedger,
    filter_mark,
    grover_measure_sim,
    quantum_svp,
    threshold_search,
    toffoli_estimate,
)
from .lattice import (
    LatticePoint,
    babai_round,
    basis_fingerprint,
    check_basis,
    coset_reduce,
    dual_basis,
    generate_basis,
    gram_schmidt,
    lll_reduce,
    read_basis,
    write_basis,
)
from .oracles import ball_points, brute_force_cvp, brute_force_svp, tv_distance
from .solver import EnumSVP, SvpResult, enum_all, enum_svp

__version__ = "0.1.0"

__all__ = [
    "BddConfig",
    "BddpAdvice",
    "BddpDecoder",
    "DecodeFailure",
    "DualSampleSet",
    "EnumSVP",
    "LatticePoint",
    "QuantumSVP",
    "QueryLedger",
    "SvpResult",
    "babai_round",
    "ball_points",
    "basis_fingerprint",
    "bddp_preprocess",
    "bddp_query",
    "brute_force_cvp",
    "brute_force_svp",
    "check_basis",
    "coset_reduce",
    "dual_basis",
    "enum_all",
    "enum_svp",
    "epsilon_for_dim",
    "filter_mark",
    "generate_basis",
    "gram_schmidt",
    "grover_measure_sim",
    "lll_reduce",
    "periodic_gaussian",
    "periodic_gaussian_gradient",
    "quantum_svp",
    "read_basis",
    "rho",
    "sample_dual_set",
    "sample_lattice_gaussian",
    "smoothing_parameter",
    "threshold_search",
    "toffoli_estimate",
    "tv_distance",
    "write_basis",
]
