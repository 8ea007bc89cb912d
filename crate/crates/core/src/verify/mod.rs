//! Monte Carlo verification of the simulators against exact formulas and
//! limit laws.

mod checks;
pub mod stats;

pub use checks::{
    cube_root, hour_at, icbrt, run_replicates, Check, FluctuationSample, SuiteParams, Thresholds, Verifier,
};
pub use stats::{GofReport, McEstimate, Rule, TestKind, Verdict};
