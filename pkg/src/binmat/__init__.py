"""Desk-scale computational toolkit for simple binary matroids."""

__version__ = "0.1.0"

FORMAT_VERSIONS = {
    "matroid": 1,
    "polynomial": 1,
    "factor": 1,
    "decomposition": 1,
    "report": 1,
}

from .errors import (
    BudgetError,
    ContractError,
    DimensionMismatchError,
    MatroidParseError,
    ParameterError,
)
from .gf2 import (
    GF2Subspace,
    GF2Vector,
    fwht,
    inverse_walsh_hadamard,
    max_subspace_avoiding,
    rank_of,
    rank_of_masks,
    walsh_hadamard,
)
from .matroid import (
    LinearInjection,
    Matroid,
    ag,
    automorphism_count,
    bb,
    contains_copy,
    count_copies,
    count_injections,
    critical_number,
    double,
    iterated_double,
    make_geometry,
    n_geometry,
    parse_matroid,
    format_matroid,
    pg,
    shifted_intersection,
)
from .torus import DyadicTorus
from .polynomial import (
    NonclassicalPoly,
    PolyTable,
    derivative,
    measured_degree,
    polynomial_catalog,
    shift_subgroup_refine,
    verify_degree,
)
from .gowers import fourier_bias, gowers_norm, modulation_invariance_check, phase_table
from .factor import (
    AtomIndex,
    ConsistencyGroup,
    PolynomialFactor,
    consistency_group,
    equidistribution_report,
    factor_shift_extend,
    factor_uniformity,
)
from .forms import LinearFormSystem, glued_double_system, linear_forms_of, product_expectation
from .regularity import (
    Decomposition,
    EtaSchedule,
    ReducedMatroid,
    decompose_linear,
    reduced_matroid,
    verify_partition,
)
from .counting import (
    counting_bound_check,
    gowers_count_bound_check,
    homomorphism_exists,
)
from .extremal import (
    BoseBurtonResult,
    CoordinateSubgroup,
    DyadicGroup,
    bose_burton_witness,
    exhaustive_extremal,
    extbb_greedy,
    threshold_demo_n21,
)
