"""Spatial correlations of bipartite quantum dynamics via Choi-state mutual information."""

__version__ = "0.1.0"

from .channels import (  # noqa: E402
    Channel,
    apply,
    apply_to_S,
    choi_state,
    compose,
    max_entangled_state,
    tensor_channels,
)
from .correlation import (  # noqa: E402
    CorrelationReport,
    check_fundamental_law,
    error_probability,
    i_bar,
    is_maximally_correlated,
    is_uncorrelated,
    reshuffle,
    von_neumann_entropy,
)
from .linalg import DensityMatrix, hermitian_eig, kron, partial_trace, permute_subsystems, trace_distance  # noqa: E402

__all__ = [
    "Channel", "apply", "apply_to_S", "choi_state", "compose", "max_entangled_state",
    "tensor_channels", "CorrelationReport", "check_fundamental_law", "error_probability",
    "i_bar", "is_maximally_correlated", "is_uncorrelated", "reshuffle", "von_neumann_entropy",
    "DensityMatrix", "hermitian_eig", "kron", "partial_trace", "permute_subsystems",
    "trace_distance",
]
