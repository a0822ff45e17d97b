"""Hybrid-beamforming NOMA downlink simulator."""

__version__ = "0.1.0"

from .arrays import (
    AngleSpec,
    ArrayGeometry,
    PathGain,
    SinglePathChannel,
    channel_matrix,
    fejer_correlation,
    normalized_angle,
    steering_vector,
)
from .bounds import (
    BoundComponents,
    CorrelationReport,
    bound_components,
    decompose_effective_channel,
    eta_factor,
    hermitian_correlation,
    kernel_sum,
    lower_bound_rate,
    max_leakage_eigenvalue,
)
from .errors import ConfigurationError, SingularClusteringError
from .power import (
    ClusterPlan,
    PowerPlan,
    allocate_power,
    default_intra_fractions,
    order_by_gain,
    reorder_by_effective_norm,
)
from .precoding import (
    AnalogCombiner,
    AnalogPrecoder,
    BasebandPrecoder,
    EffectiveChannelSet,
    PrecoderDiagnostics,
    design_analog_stage,
    effective_channels,
    power_constraint_check,
    zero_forcing_precoder,
)
from .rates import (
    RateBreakdown,
    beam_gain,
    inter_interference,
    intra_interference,
    sum_rate,
    user_rate,
)
from .scenario import ClusterSpec, ScenarioConfig, UserSpec, load_config, parse_config_text

__all__ = [name for name in dir() if not name.startswith("_")]
