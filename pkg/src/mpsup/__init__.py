"""Matrix product states under permutations.

Canonical forms of translation-invariant MPS, Schmidt spectra across
arbitrary bipartitions, MPS-up certification and the named states of the
W/Dicke/weight family.
"""

from ._config import config_context, get_config, set_config
from .exceptions import (
    DecompositionFailed,
    DecompositionSuspect,
    InvalidInput,
    MPSUpError,
    NotBlockInjective,
    NotInjective,
    NotNormal,
    NotNormalOrBug,
    PeriodUndetected,
    TooLarge,
)
from .mps import (
    CanonicalGauge,
    MPSChain,
    StateVector,
    TIMPS,
    block_sites,
    gauge_transform,
    left_canonical,
    left_canonical_chain,
    materialize,
    transfer_matrix,
)
from .structure import (
    CanonicalForm,
    block_injectivity_length,
    block_projectors,
    canonical_form,
    detect_period,
    eta,
    injectivity_length,
    is_normal,
    product_decompose,
    tensor_inverse,
)
from .permlab import (
    Bipartition,
    Permutation,
    certify_mps_up,
    comb_permutation,
    ergodicity_profile,
    gap_closeness_bound,
    interleave_permutation,
    permute_state,
    purity_gap_bound_check,
    rank_counting_probe,
    schmidt_spectrum,
    subsystem_purity,
)
from .gallery import (
    WeightStateSpec,
    border_w,
    cp_rank_probe,
    dicke_mps,
    ghz,
    table2_report,
    weight_mps,
    weight_state,
)

__version__ = "0.1.0"

__all__ = [
    "Bipartition",
    "CanonicalForm",
    "CanonicalGauge",
    "DecompositionFailed",
    "DecompositionSuspect",
    "InvalidInput",
    "MPSChain",
    "MPSUpError",
    "NotBlockInjective",
    "NotInjective",
    "NotNormal",
    "NotNormalOrBug",
    "PeriodUndetected",
    "Permutation",
    "StateVector",
    "TIMPS",
    "TooLarge",
    "WeightStateSpec",
    "block_injectivity_length",
    "block_projectors",
    "block_sites",
    "border_w",
    "canonical_form",
    "certify_mps_up",
    "comb_permutation",
    "config_context",
    "cp_rank_probe",
    "detect_period",
    "dicke_mps",
    "ergodicity_profile",
    "eta",
    "gap_closeness_bound",
    "gauge_transform",
    "get_config",
    "ghz",
    "injectivity_length",
    "interleave_permutation",
    "is_normal",
    "left_canonical",
    "left_canonical_chain",
    "materialize",
    "permute_state",
    "product_decompose",
    "purity_gap_bound_check",
    "rank_counting_probe",
    "schmidt_spectrum",
    "set_config",
    "subsystem_purity",
    "table2_report",
    "tensor_inverse",
    "transfer_matrix",
    "weight_mps",
    "weight_state",
]
