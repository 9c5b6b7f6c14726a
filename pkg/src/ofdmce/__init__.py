"""Link-level OFDM downlink simulator for comparing pilot-based channel
estimators (LS, simplified LMMSE, low-rank LMMSE) under cyclic-prefix and
zero-padding guard intervals."""

from .channel import (
    ChannelRealization,
    NoiseConfig,
    add_awgn,
    apply_channel,
    draw_channel,
    dump_taps_csv,
    true_cfr,
    uniform_pdp,
)
from .errors import (
    ConfigurationError,
    EstimationError,
    InterpolationError,
    MappingError,
    NumericalError,
    SimulationError,
)
from .estimation import (
    CorrelationModel,
    EstimatorConfig,
    PilotObservation,
    beta_for,
    build_correlation,
    freq_correlation,
    interpolate_grid,
    lmmse_estimate,
    lmmse_filter,
    lr_lmmse_estimate,
    lr_lmmse_filter,
    ls_estimate,
    mse,
)
from .grid import (
    CellKind,
    GridConfig,
    PilotPattern,
    ResourceGrid,
    default_pilot_pattern,
    demap_grid,
    dump_grid_csv,
    lookup_grid_config,
    map_grid,
    occupied_bins,
    pilot_positions,
    pilot_values,
    subcarrier_to_bin,
)
from .harness import (
    ExperimentConfig,
    SweepRecord,
    SweepResult,
    derive_trial_seed,
    effective_snr,
    emit_plots,
    noise_variance_for,
    read_csv,
    run_trial,
    sweep,
    write_csv,
)
from .mimo import (
    AntennaConfig,
    ber,
    bits_per_symbol,
    qam16_demap,
    qam16_map,
    qpsk_demap,
    qpsk_map,
    zf_detect,
)
from .ofdm import (
    CP,
    ZP,
    GuardConfig,
    add_guard,
    efficiency_factors,
    ofdm_demodulate,
    ofdm_modulate,
    strip_guard,
)

__version__ = "0.1.0"
