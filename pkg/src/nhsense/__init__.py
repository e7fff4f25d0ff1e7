"""Non-Hermitian quantum sensors as post-selected measurements.

Simulates non-Hermitian two-level sensors, constructs their
Naimark-dilated Hermitian counterparts, and decomposes the Fisher
information of the implied post-selected measurement.
"""

from .dilation import (
    DilationBundle,
    PostSelectionOutcome,
    build_bundle,
    dilated_evolve_postselect,
    eta_of_t,
    pseudo_hermitian_shortcut,
    rescale_eta0,
    verify_dilation,
)
from .dynamics import evolve, normalize, param_derivative, time_ordered_propagator
from .fisher import (
    FisherBreakdown,
    check_hierarchy,
    fisher_breakdown,
    fisher_post,
    qfi_mixed,
    qfi_pure,
)
from .linalg import eig_herm, herm_sqrt, is_psd, mat_exp, min_eigenvalue
from .models import (
    MODEL_FACTORIES,
    ep_gyro_model,
    loss_loss_model,
    make_model,
    pseudo_hermitian_model,
    pt_symmetric_model,
)
from .sweep import SweepConfig, SweepRecord, run_sweep

__all__ = [
    "DilationBundle",
    "FisherBreakdown",
    "MODEL_FACTORIES",
    "PostSelectionOutcome",
    "SweepConfig",
    "SweepRecord",
    "build_bundle",
    "check_hierarchy",
    "dilated_evolve_postselect",
    "eig_herm",
    "ep_gyro_model",
    "eta_of_t",
    "evolve",
    "fisher_breakdown",
    "fisher_post",
    "herm_sqrt",
    "is_psd",
    "loss_loss_model",
    "make_model",
    "mat_exp",
    "min_eigenvalue",
    "normalize",
    "param_derivative",
    "pseudo_hermitian_model",
    "pseudo_hermitian_shortcut",
    "pt_symmetric_model",
    "qfi_mixed",
    "qfi_pure",
    "rescale_eta0",
    "run_sweep",
    "time_ordered_propagator",
    "verify_dilation",
]

__version__ = "0.1.0"
