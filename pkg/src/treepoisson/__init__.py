"""Poisson transforms on trees of bounded degree, computed exactly on finite truncations."""

from .boundary import (
    EigenReport,
    LimitTable,
    beta,
    boundary_measure,
    chain_formula_check,
    check_eigen_characterization,
    limit_recover_clopen,
    limit_recover_vertex,
    reconstruct_function,
    roundtrip_measure,
)
from .errors import *  # noqa: F401,F403
from .hoelder import (
    GrowthEnvelope,
    GrowthReport,
    SectionMap,
    boundary_distance,
    function_growth_envelope,
    hoelder_norm,
    lipschitz_seminorm,
    measure_growth_envelope,
    mod_growth_crosscheck,
    mu_W_extension,
)
from .measure import (
    BoundaryMeasure,
    ClopenSet,
    CylinderFunction,
    EdgeCoefficients,
    dirac,
    edge_flow,
    evaluate_clopen,
    evaluate_clopen_from,
    flow_away,
    from_leaf_masses,
    pair,
    random_measure,
    rotation_invariant,
)
from .poisson import (
    VertexFunction,
    eigen_residual,
    laplacian,
    poisson_transform,
    poisson_transform_direct,
    potential,
    relative_eigen_residual,
)
from .tree import Tree, build_from_parents, build_regular

__version__ = "0.1.0"
