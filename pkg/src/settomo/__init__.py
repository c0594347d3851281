"""Simulation and reconstruction of path/polarization hyperentangled photon pairs.

Compares coincidence-counting tomography (QST) with stimulated-emission
tomography (SET) on a source whose polarization is correlated with the
transverse momentum inside each mask hole.
"""

from .linalg import DensityMatrix, PureStateVector, eig_hermitian, partial_trace, sqrt_psd, tensor
from .measurement import (
    MeasurementRecord,
    ProjectorSetting,
    ProtocolConfig,
    born_probability,
    simulate_qst,
    simulate_set,
    tomography_settings,
)
from .metrics import StateMetrics, concurrence, fidelity, purity, tangle
from .states import (
    MixedStateSpec,
    SourceConfig,
    calibrate_phase_gradient,
    hyper_state,
    hyper_state_kappa,
    mixed_state,
    path_state,
    pol_state,
)
from .tomography import ReconstructionResult, linear_inversion, mle_reconstruct, resample_uncertainty
from .visibility import BeamSplitter, check_purity_consistency, purity_bound, visibility_1q, visibility_2q

__version__ = "0.1.0"
