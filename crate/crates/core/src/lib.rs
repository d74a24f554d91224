//! Amplitude space sharing between a macro cell and small cells.
//!
//! * [`channel`]: two-user Gaussian interference channel, interference
//!   regimes and the Han-Kobayashi achievable sum-rate of a power split.
//! * [`optimizer`]: per-regime optimal power allocation, a grid oracle and
//!   the ETW / TIN / orthogonal baselines.
//! * [`geometry`]: path-loss link budgets, multi-small-cell SNR/INR pairs,
//!   single-layer rate rules and network throughput.
//! * [`experiments`]: mode maps, SAP-distance sweeps and multi-cell
//!   throughput runs rendered as CSV.

pub mod channel;
pub mod config;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod optimizer;

pub use channel::{
    classify_mode, common_rate_bounds, gamma, link_budget, max_common_sum, private_rates,
    split_sum_rate, ChannelGains, CommonRateBounds, InterferenceMode, LinkBudget, PowerBudget,
    PowerSplit,
};
pub use config::{ExperimentConfig, ExperimentKind, Scheme};
pub use error::{Error, Result};
pub use geometry::{
    calibrate_noise, network_throughput, pair_budget, pair_channel, pair_rates, path_loss_db,
    place_saps_grid, place_sue, Direction, LinkKind, NetworkConfig, NetworkLayout, PairBudget,
    PairRates, Position, Throughput,
};
pub use optimizer::{
    baseline_rates, brute_force_split, closed_form_sum_rate, etw_split, optimize, weak_mode_split,
    AllocationResult, BaselineRates, WeakModeCoefficients, DEFAULT_GRID_N,
};
