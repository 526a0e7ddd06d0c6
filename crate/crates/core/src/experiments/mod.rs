//! Statistical harnesses: fixed-point CLT checks, bandwidth sweeps, rate
//! fits and the gasket probes. Every run is deterministic in its config and
//! master seed; trials run on the rayon pool and are merged in index order.

mod clt;
mod functions;
mod report;
mod sg;
mod stats;
mod sweep;

pub use clt::{clt_degenerate_decay, clt_fixed_point, clt_with_retries, CltCheck, CltConfig, CltMode, CltReport, CltSetup, DecayReport};
pub use functions::TestFunction;
pub use report::{config_hash, report_json, verify_report_json, write_report, Report};
pub use sg::{
    sg_probe, sg_rescaling_probe, SgConfig, SgLevelRow, SgPairResult, SgProbeConfig, SgProbeReport, SgRescalingConfig,
    SgSeedResult,
};
pub use stats::{kolmogorov_tail, ks_standard_normal, log_grid, mean_sd, rate_fit, KsResult, RateFit};
pub use sweep::{default_eval_points, epsilon_sweep, ArgminRow, SweepCell, SweepConfig, SweepResult};
