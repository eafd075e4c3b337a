"""Hybrid precoder/combiner design for decentralized estimation in mmWave
MIMO wireless sensor networks, plus a seeded Monte-Carlo MSE simulator."""

from .config import PerSensor, TotalBudget, WsnConfig, dbw_to_watts, snr_to_variance
from .channel import (ChannelDecomposition, ChannelRealization, array_response,
                      channel_from_record, channel_to_record, decompose,
                      generate_channel)
from .measurement import (MeasurementModel, TransmitSignalStats,
                          build_measurement_model, sample_parameter, sense)
from .precoding import (PowerAllocation, PrecoderSet, SensorCoupling,
                        assemble_digital_precoders, sensor_coupling,
                        solve_per_sensor_noiseless, solve_per_sensor_noisy,
                        transmit_power, waterfill_total_noiseless,
                        waterfill_total_noisy)
from .somp import HybridPrecoderSet, SompResult, factor_precoders, somp_decompose
from .combining import (CombinerSet, design_combiners, estimate, hybrid_combiner,
                        lmmse_combiner, received_covariance)
from .metrics import (MseReport, bcrb, centralized_bound,
                      dominant_directional_design, error_covariance,
                      mse_closed_form, mse_of_linear_transceiver)
from .simulate import ResultRow, SweepSpec, emit, run_sweep, run_trial
from . import errors

__version__ = "0.1.0"
