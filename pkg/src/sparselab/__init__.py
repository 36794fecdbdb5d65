"""Exact verification toolkit for sparse-form bounds on the unit interval.

Step functions on a three-shift dyadic lattice, weight characteristics,
maximal operators, sparse collections, and step-by-step proof pipelines
with explicit constants — everything checkable is checked in exact rational
arithmetic, and every tolerance is stated where it is used.
"""

from .errors import (
    GenerationError,
    HypothesisError,
    MalformedInputError,
    NormalizationError,
    ParameterError,
    SparselabError,
    VerificationError,
)
from .gridfn import (
    GridFunction,
    MeasureSpec,
    NormConvention,
    average,
    kolmogorov_check,
    kolmogorov_subset,
    weak_norm,
    weighted_norm,
)
from .lattice import (
    SHIFTS,
    CellSpan,
    LatticeInterval,
    NoCoverError,
    Resolution,
    children,
    grid_intervals,
    one_third_cover,
)
from .maximal import (
    MaximalMode,
    bilinear_maximal,
    maximal,
    n_weak_check,
    weighted_n,
)
from .pipelines import (
    SearchResult,
    TheoremParams,
    calibration,
    extremal_search,
    log_sweep,
    normalize_for,
    prop31_check,
    prop32_check,
    reduction_construct_Eprime,
    search_csv,
    sweep_csv,
    thm_a_verify,
    thm_c_verify,
)
from .reports import CheckReport, PipelineTrace
from .sparse import (
    CoefficientFamily,
    SparseCollection,
    bilinear_form,
    carleson_sum,
    coefficient_operator,
    magic_selection,
    sparse_operator,
    stopping_time_sparse,
    verify_sparsity,
)
from .weights import (
    Family,
    LimitedRangeMap,
    Weight,
    WeightCharacteristics,
    a1_constant,
    ap_constant,
    aprs_constant,
    fw_constant,
    generate_weight,
    limited_range_transform,
)

__version__ = "0.1.0"
