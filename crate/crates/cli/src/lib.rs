//! Library surface of the sweep tool: configuration, suite runners and
//! deterministic emission. The `euler-rates` binary is a thin wrapper.

// `!(x > 0.0)` guards reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod emit;
pub mod suites;

use anyhow::Result;

use config::{Suite, SweepConfig};
use suites::SuiteRun;

pub fn run_suite(cfg: &SweepConfig) -> Result<SuiteRun> {
    match cfg.suite {
        Suite::Kernel => suites::run_kernel_suite(cfg),
        Suite::Norms => suites::run_norms_suite(cfg),
        Suite::Rates => suites::run_rate_sweep(cfg),
        Suite::Sharpness => suites::run_sharpness(cfg),
        Suite::Limits => suites::run_limits(cfg),
    }
}
