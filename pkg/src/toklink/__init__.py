"""Joint bandwidth/power/token-length allocation for multiuser token
transmission, with a link-level simulator for the token channel path."""

from .ao import AOTrace, solve, solve_multistart
from .bandwidth_power import (FeasibilityResult, LatencySearchResult,
                              min_latency_search, min_power_for_bandwidth,
                              power_curve_derivative, solve_min_total_power)
from .baselines import OracleGrid, era_allocation, oracle_solve, pbwf_allocation
from .errors import (ConfigError, FeasibilityContractError,
                     InfeasibleProblemError, OracleSizeError)
from .linksim import (ComplexSignal, LinkConfig, TokenMatrix, channel_apply,
                      contrastive_loss, equalize_demodulate, modulate,
                      noise_var_for_snr_db, pooled_representative,
                      reconstruction_loss, run_reconstruction_trials,
                      sliding_pool, zf_mse_expected)
from .perf import (AUDIO_PRESET, VISUAL_PRESET, FitDataset, FitResult,
                   PerfModel, fit, fit_linear_at_beta, phi, phi_derivative,
                   phi_extended)
from .scenario import (DEFAULT_PRESETS, DevicePreset, Scenario, SweepRecord,
                       run_sweep, sample_instance, summarize_records,
                       write_records_csv)
from .system import (Allocation, CostBreakdown, DeviceState, SystemConfig,
                     channel_gain, check_allocation, dbm_to_watt, latency,
                     path_loss_db, rate, total_cost, watt_to_dbm)
from .token_opt import TokenSolveResult, solve_token_lengths, stationarity_g

__version__ = "0.1.0"

__all__ = [
    "AOTrace", "solve", "solve_multistart",
    "FeasibilityResult", "LatencySearchResult", "min_latency_search",
    "min_power_for_bandwidth", "power_curve_derivative", "solve_min_total_power",
    "OracleGrid", "era_allocation", "oracle_solve", "pbwf_allocation",
    "ConfigError", "FeasibilityContractError", "InfeasibleProblemError",
    "OracleSizeError",
    "ComplexSignal", "LinkConfig", "TokenMatrix", "channel_apply",
    "contrastive_loss", "equalize_demodulate", "modulate",
    "noise_var_for_snr_db", "pooled_representative", "reconstruction_loss",
    "run_reconstruction_trials", "sliding_pool", "zf_mse_expected",
    "AUDIO_PRESET", "VISUAL_PRESET", "FitDataset", "FitResult", "PerfModel",
    "fit", "fit_linear_at_beta", "phi", "phi_derivative", "phi_extended",
    "DEFAULT_PRESETS", "DevicePreset", "Scenario", "SweepRecord", "run_sweep",
    "sample_instance", "summarize_records", "write_records_csv",
    "Allocation", "CostBreakdown", "DeviceState", "SystemConfig",
    "channel_gain", "check_allocation", "dbm_to_watt", "latency",
    "path_loss_db", "rate", "total_cost", "watt_to_dbm",
    "TokenSolveResult", "solve_token_lengths", "stationarity_g",
    "__version__",
]
