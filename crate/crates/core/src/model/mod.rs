//! Process state, the three samplers and the exact small-`N` oracle.

mod edges;
mod nhg;
mod oracle;
mod samplers;
mod types;

pub use edges::{edge_probability, split_aged_recent};
pub use nhg::{neg_hypergeom_pmf, neg_hypergeom_sample, NegHypergeometric, NhgMethod};
pub use oracle::{
    exact_distribution, pmf_mean, pmf_variance, transition_pmf, ExactOracle, DEFAULT_MARGINAL_CAP, DEFAULT_PATH_CAP,
};
pub use samplers::{
    first_edge_time, simulate_insertion, simulate_pool, simulate_pool_capped, simulate_urn, simulate_urn_until,
    simulate_urn_with, DEFAULT_EDGE_CAP,
};
pub use types::{AgedRecentSplit, EdgeEvent, ModelParams, PoolState, SeedSpec, Trajectory, UrnState, WeakComposition};
