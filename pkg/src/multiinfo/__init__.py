"""Multi-information on finite product spaces.

Computes multi-information, constructs and recognizes its global maximizers,
describes the stratification of the two-unit maximizer set, and checks that
low-order interaction families reach the maximizers in their closure.
"""

from .errors import (
    BudgetError,
    ConvergenceError,
    MultiInfoError,
    NoMaximizerError,
    NotAMaximizerError,
    ValidationError,
)
from .probspace import (
    INFINITY,
    Distribution,
    ProductSpace,
    entropy,
    is_factorizable,
    kl_divergence,
    marginal,
    multi_information,
    product_of_marginals,
    upper_bound,
)
from .interactions import (
    InteractionFamilySpec,
    RealFunction,
    basis_of_family,
    family_dim,
    gibbs,
    info_projection,
    project_onto_IA,
    project_onto_pure_IA,
    pure_dim,
)
from .maximizers import (
    SurjectionFamily,
    TSet,
    build_tset,
    construct_maximizer,
    enumerate_equal_unit_maximizers,
    exists_maximizer_exhaustive,
    find_witness,
    is_maximizer,
    n_min,
)
from .poset import (
    PosetMap,
    count_strata_by_dim,
    cover_graph,
    enumerate_poset,
    leq,
    sample_stratum,
    stirling2,
    stratum_dim,
)
from .approx import (
    ApproxTrace,
    GeneralPositionMap,
    make_general_position,
    pair_sequence_converges,
    pair_sequence_element,
    quadratic_family_element,
    search_local_maximizer,
)

__version__ = "0.1.0"
