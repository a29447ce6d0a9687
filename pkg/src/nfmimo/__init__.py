"""Near-field MIMO radar 3D localization toolkit.

Spherical-wavefront channel modeling, Fisher-information/CRB analysis, two
concentrated-likelihood grid localizers, and a Monte Carlo MSE-versus-SNR
harness with a CLI front end.
"""

from .channel import (
    EXACT,
    ConstantAmplitude,
    SteeringBundle,
    effective_reflections,
    steering_bundle,
    steering_matrix,
    steering_rx,
    steering_tx,
)
from .crb import (
    CrbReport,
    FimResult,
    PositionCrb,
    crb_asymptotic_far,
    crb_from_fim,
    crb_monostatic_axis,
    crb_single_wgn,
    fim_multi,
)
from .errors import ConfigError, DegenerateSceneError, NumericalError
from .estimators import (
    ACO,
    CO_WGN,
    CyclicLocalizer,
    EstimateResult,
    GridSchedule,
    aml_coefficients,
    concentrated_nll_aco,
    concentrated_nll_wgn,
    localize,
    refine_search,
    wgn_coefficients,
)
from .geometry import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    CarrierSpec,
    TargetScene,
    build_upa,
    check_separation,
    scene_from_config,
)
from .harness import SweepRecord, SweepSpec, matched_squared_errors, mse_sweep, run_trial
from .synthesis import (
    ReceivedData,
    StructuredNoise,
    WgnNoise,
    signal_matrix,
    structured_clutter_cov,
    synthesize,
)
from .waveform import (
    Waveform,
    build_nonisotropic_cov,
    complex_normal,
    directed_waveform,
    isotropic_waveform,
)

__version__ = "0.1.0"
