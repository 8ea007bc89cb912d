//! Limit objects of the edge-counting process.

mod curves;
mod diffusion;
mod laws;
pub mod quad;

pub use curves::{
    bridge_integrand, bridge_variance_increment, cov_kernel, diffusion_coefficient, phi, phi_integral, psi,
    psi_double_integral, psi_single_integral,
};
pub use diffusion::{simulate_limit_diffusion, validate_grid, DiffusionMethod, DiffusionPath, ExactDiffusion};
pub use laws::{
    early_poisson_cumulative, early_poisson_rate, erlang_cdf, first_edge_limit_cdf, first_edge_limit_moment,
    gamma_dirichlet_sample, LimitLaw,
};
