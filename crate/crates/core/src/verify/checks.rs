//! The Monte Carlo checks. Each returns a set of [`GofReport`]s and is a
//! pure function of its parameters and the master seed.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::stats::{correlation, covariance, ks_test, ks_two_sample, tv_distance, GofReport, McEstimate, Rule};
use crate::asymptotics::{
    cov_kernel, erlang_cdf, first_edge_limit_cdf, first_edge_limit_moment, gamma_dirichlet_sample, phi, psi,
    simulate_limit_diffusion, DiffusionMethod, ExactDiffusion,
};
use crate::error::{Error, Result};
use crate::model::{
    edge_probability, first_edge_time, simulate_insertion, simulate_pool, simulate_urn, simulate_urn_until,
    ExactOracle, ModelParams, NhgMethod, SeedSpec, Trajectory,
};
use crate::moments::{
    compensator, first_edge_survival, last_stage_mean, mean_edges, mean_edges_all, mean_table, second_difference_mean,
    variance_closed_form, variance_recursion, MomentTable,
};
use crate::numeric::Scalar;

/// Decision thresholds for every check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub max_z: f64,
    pub max_tv: f64,
    pub min_chi_square_p: f64,
    pub max_fluid_gap: f64,
    pub max_curve_mean_gap: f64,
    pub max_curve_variance_gap: f64,
    pub max_first_edge_ks: f64,
    pub first_edge_moment_rel: f64,
    pub exact_abs: f64,
    pub poisson_rel: f64,
    pub max_bin_correlation: f64,
    pub fluctuation_variance_rel: f64,
    pub fluctuation_covariance_rel: f64,
    pub min_normal_ks_p: f64,
    pub max_terminal_ks: f64,
    pub max_terminal_correlation: f64,
    pub erlang_mean_rel: f64,
    pub symbolic_abs: f64,
    pub max_gamma_dirichlet_ks: f64,
    pub diffusion_variance_rel: f64,
    pub diffusion_covariance_rel: f64,
    pub euler_variance_rel: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            max_z: 3.0,
            max_tv: 0.01,
            min_chi_square_p: 1e-3,
            max_fluid_gap: 0.05,
            max_curve_mean_gap: 0.01,
            max_curve_variance_gap: 0.005,
            max_first_edge_ks: 0.02,
            first_edge_moment_rel: 0.05,
            exact_abs: 1e-12,
            poisson_rel: 0.05,
            max_bin_correlation: 0.05,
            fluctuation_variance_rel: 0.15,
            fluctuation_covariance_rel: 0.20,
            min_normal_ks_p: 0.01,
            max_terminal_ks: 0.1,
            max_terminal_correlation: 0.1,
            erlang_mean_rel: 0.10,
            symbolic_abs: 1e-8,
            max_gamma_dirichlet_ks: 0.01,
            diffusion_variance_rel: 0.02,
            diffusion_covariance_rel: 0.05,
            euler_variance_rel: 0.05,
        }
    }
}

/// The named checks, as accepted by `--suite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    ExactOracle,
    Moments,
    SamplerEquivalence,
    EdgeProbability,
    Martingales,
    FluidLimit,
    MomentCurves,
    FirstEdge,
    EarlyPoisson,
    GaussianFluctuations,
    Diffusion,
    LastStage,
    GammaDirichlet,
}

impl Check {
    pub const ALL: [Check; 13] = [
        Check::ExactOracle,
        Check::Moments,
        Check::SamplerEquivalence,
        Check::EdgeProbability,
        Check::Martingales,
        Check::FluidLimit,
        Check::MomentCurves,
        Check::FirstEdge,
        Check::EarlyPoisson,
        Check::GaussianFluctuations,
        Check::Diffusion,
        Check::LastStage,
        Check::GammaDirichlet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::ExactOracle => "exact-oracle",
            Check::Moments => "moments",
            Check::SamplerEquivalence => "sampler-equivalence",
            Check::EdgeProbability => "edge-probability",
            Check::Martingales => "martingales",
            Check::FluidLimit => "fluid-limit",
            Check::MomentCurves => "moment-curves",
            Check::FirstEdge => "first-edge",
            Check::EarlyPoisson => "early-poisson",
            Check::GaussianFluctuations => "gaussian-fluctuations",
            Check::Diffusion => "diffusion",
            Check::LastStage => "last-stage",
            Check::GammaDirichlet => "gamma-dirichlet",
        }
    }

    /// Seed family, so that every check draws from its own streams
    /// whatever else runs alongside it.
    fn family(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let known: Vec<_> = Check::ALL.iter().map(|c| c.name()).collect();
            Error::InvalidParams(format!("unknown check '{s}'; expected one of {}", known.join(", ")))
        })
    }
}

/// Optional overrides of a check's default size.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SuiteParams {
    pub vertices: Option<u64>,
    pub reps: Option<u64>,
}

/// Runs `f` once per replicate on independent seed streams. The output
/// order is the replicate order whatever the thread count.
pub fn run_replicates<T, F>(master_seed: u64, family: u64, reps: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(SeedSpec) -> T + Sync + Send,
{
    let stream = SeedSpec::family(master_seed, family);
    (0..reps).into_par_iter().map(|i| f(SeedSpec::new(stream, i))).collect()
}

/// `Y_N(t) = (X_{⌊tN⌋} - N²φ(t)/2) / N^{3/2}` on a grid, one row per replicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluctuationSample {
    pub vertices: u64,
    pub t_grid: Vec<f64>,
    /// `y[r][i] = Y_N(t_grid[i])` in replicate `r`.
    pub y: Vec<Vec<f64>>,
}

/// `⌊tN⌋`, robust to `t·N` landing just below an integer.
pub fn hour_at(t: f64, vertices: u64) -> u64 {
    let v = t * vertices as f64;
    let r = v.round();
    let h = if (v - r).abs() < 1e-9 * v.max(1.0) { r } else { v.floor() };
    h as u64
}

impl FluctuationSample {
    pub fn collect(vertices: u64, reps: u64, t_grid: &[f64], master_seed: u64, family: u64) -> Result<Self> {
        let params = ModelParams::new(vertices)?;
        if t_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::BadGrid);
        }
        let hours: Vec<u64> = t_grid.iter().map(|&t| hour_at(t, vertices)).collect();
        let centre: Vec<f64> =
            t_grid.iter().map(|&t| phi(t).map(|p| p * (vertices * vertices) as f64 / 2.0)).collect::<Result<_>>()?;
        let scale = (vertices as f64).powf(1.5);
        let last = hours.iter().copied().max().unwrap_or(0);
        let y = run_replicates(master_seed, family, reps, |seed| {
            let x = simulate_urn_until(&params, seed, last, NhgMethod::Sequential);
            hours
                .iter()
                .zip(&centre)
                .map(|(&h, c)| {
                    let xn = if h == 0 { 0 } else { x[(h - 1) as usize] };
                    (xn as f64 - c) / scale
                })
                .collect()
        });
        Ok(Self { vertices, t_grid: t_grid.to_vec(), y })
    }

    pub fn column(&self, t: f64) -> Option<Vec<f64>> {
        let i = self.t_grid.iter().position(|&s| s == t)?;
        Some(self.y.iter().map(|row| row[i]).collect())
    }
}

/// `N^{1/3}`, exact for perfect cubes.
pub fn cube_root(n: u64) -> f64 {
    let r = icbrt(n);
    if r * r * r == n {
        r as f64
    } else {
        (n as f64).cbrt()
    }
}

/// `⌊N^{1/3}⌋`.
pub fn icbrt(n: u64) -> u64 {
    let mut r = (n as f64).cbrt().round() as u64;
    while r > 0 && r * r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn need_reps(reps: u64, min: u64) -> Result<()> {
    if reps < min {
        return Err(Error::InvalidParams(format!("need at least {min} replicates, got {reps}")));
    }
    Ok(())
}

fn estimate(xs: &[f64]) -> McEstimate {
    McEstimate::from_samples(xs).expect("at least two replicates")
}

fn mean_report(check: String, xs: &[f64], expected: f64, max_z: f64) -> GofReport {
    let est = estimate(xs);
    GofReport::z_score(check, est.mean, expected, est.stderr, est.reps, max_z)
}

fn variance_report(check: String, xs: &[f64], expected: f64, max_z: f64) -> GofReport {
    let est = estimate(xs);
    GofReport::z_score(check, est.variance, expected, est.variance_stderr(), est.reps, max_z)
}

/// Frequency of an event against its exact probability, binomial SE.
fn frequency_report(check: String, hits: u64, reps: u64, p: f64, max_z: f64) -> GofReport {
    let se = (p * (1.0 - p) / reps as f64).sqrt();
    GofReport::z_score(check, hits as f64 / reps as f64, p, se, reps, max_z)
}

fn exact_report(check: String, value: f64, expected: f64, tol: f64) -> GofReport {
    GofReport::bound(check, (value - expected).abs(), 1, tol)
        .with_detail(format!("value {value:.15e}, expected {expected:.15e}"))
}

/// Held-out ratio `later / earlier`, which must be below 1.
fn decrease_report(check: String, earlier: f64, later: f64, n: u64) -> GofReport {
    let ratio = if earlier > 0.0 { later / earlier } else { f64::INFINITY };
    GofReport::bound(check, ratio, n, 1.0).with_detail(format!("{earlier:.6e} -> {later:.6e}"))
}

fn quarter_hours(vertices: u64) -> Vec<u64> {
    let mut hours: Vec<u64> = [vertices / 4, vertices / 2, 3 * vertices / 4, vertices].into_iter().map(|n| n.max(1)).collect();
    hours.dedup();
    hours
}

fn moment_table(vertices: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    if vertices <= 64 {
        let t = MomentTable::<BigRational>::compute(vertices)?;
        Ok((t.mu.iter().map(Scalar::as_f64).collect(), t.sigma2.iter().map(Scalar::as_f64).collect()))
    } else {
        let t = MomentTable::float(vertices)?;
        Ok((t.mu, t.sigma2))
    }
}

/// Runs checks under one master seed and one set of thresholds.
#[derive(Debug, Clone, Default)]
pub struct Verifier {
    pub seed: u64,
    pub thresholds: Thresholds,
    /// Adds a two-sample KS of `Y_N(0.5)` against the limit diffusion.
    pub compare_diffusion: bool,
}

impl Verifier {
    pub fn new(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    /// Runs one check, at its default size unless overridden.
    pub fn run(&self, check: Check, params: SuiteParams) -> Result<Vec<GofReport>> {
        let n = params.vertices;
        let reps = params.reps;
        match check {
            Check::ExactOracle => self.check_exact_oracle(n.unwrap_or(10)),
            Check::Moments => self.check_moments(n.unwrap_or(8), reps.unwrap_or(100_000)),
            Check::SamplerEquivalence => {
                let list = n.map_or_else(|| vec![3, 4, 5], |n| vec![n]);
                let mut out = Vec::new();
                for n in list {
                    out.extend(self.check_sampler_equivalence(n, reps.unwrap_or(100_000))?);
                }
                Ok(out)
            }
            Check::EdgeProbability => {
                let (big, hour, edges) = match n {
                    None => (30, 20, vec![(1, 2), (5, 10), (1, 20)]),
                    Some(big) => {
                        let hour = (2 * big).div_ceil(3).max(2);
                        (big, hour, vec![(1, 2), ((hour / 4).max(1), (hour / 2).max(2)), (1, hour)])
                    }
                };
                self.check_edge_probability(big, hour, &edges, reps.unwrap_or(10_000))
            }
            Check::Martingales => self.check_martingales(n.unwrap_or(100), reps.unwrap_or(10_000)),
            Check::FluidLimit => {
                let list = n.map_or_else(|| vec![500, 2000], |n| vec![(n / 4).max(2), n]);
                self.check_fluid_limit(&list, reps.unwrap_or(100))
            }
            Check::MomentCurves => {
                let list = n.map_or_else(|| vec![500, 2000], |n| vec![(n / 4).max(2), n]);
                self.check_moment_curves(&list)
            }
            Check::FirstEdge => self.check_first_edge(n.unwrap_or(1_000_000), reps.unwrap_or(10_000)),
            Check::EarlyPoisson => {
                self.check_early_poisson(n.unwrap_or(1_000_000), &[0.0, 2.0, 3.0], reps.unwrap_or(10_000))
            }
            Check::GaussianFluctuations => {
                self.check_gaussian_fluctuations(n.unwrap_or(2000), reps.unwrap_or(4000))
            }
            Check::Diffusion => self.check_diffusion(reps.unwrap_or(100_000)),
            Check::LastStage => self.check_last_stage(n.unwrap_or(1000), reps.unwrap_or(1000), 2),
            Check::GammaDirichlet => self.check_gamma_dirichlet(2, reps.unwrap_or(100_000)),
        }
    }

    /// Closed-form and recursive moments against the exact law, in rational
    /// arithmetic, for every `N` up to `max_vertices` and every hour.
    pub fn check_exact_oracle(&self, max_vertices: u64) -> Result<Vec<GofReport>> {
        let oracle = ExactOracle::default();
        let mut out = Vec::new();
        for vertices in 2..=max_vertices {
            let params = ModelParams::new(vertices)?;
            let marginals = oracle.marginals::<BigRational>(&params)?;
            let mu_rec = mean_table::<BigRational>(vertices)?;
            let var_rec = variance_recursion(vertices, &mu_rec);
            let var_closed = variance_closed_form(vertices, &mu_rec);
            let mut mismatches = 0u64;
            let mut compared = 0u64;
            for n in 1..=vertices {
                let pmf = &marginals[(n - 1) as usize];
                let mean = crate::model::pmf_mean(pmf);
                let var = crate::model::pmf_variance(pmf);
                let i = (n - 1) as usize;
                let closed = mean_edges::<BigRational>(vertices, n)?;
                for ok in [closed == mean, mu_rec[i] == mean, var_rec[i] == var, var_closed[i] == var] {
                    compared += 1;
                    mismatches += u64::from(!ok);
                }
            }
            out.push(
                GofReport::bound(format!("exact-oracle/N={vertices}"), mismatches as f64, compared, 0.5)
                    .with_detail(format!("{mismatches} of {compared} rational comparisons differ")),
            );
        }
        Ok(out)
    }

    /// Empirical mean and variance of `X_n` at the quarter hours against
    /// the exact tables, plus path invariants on every replicate.
    pub fn check_moments(&self, vertices: u64, reps: u64) -> Result<Vec<GofReport>> {
        need_reps(reps, 100)?;
        let params = ModelParams::new(vertices)?;
        let (mu, sigma2) = moment_table(vertices)?;
        let paths = run_replicates(self.seed, Check::Moments.family(), reps, |s| simulate_urn(&params, s));
        let broken = paths.iter().filter(|p| p.check().is_err()).count();
        let max_z = self.thresholds.max_z;
        let mut out = vec![GofReport::bound(format!("moments/path-invariants/N={vertices}"), broken as f64, reps, 0.5)
            .with_detail(format!("{broken} paths violate an invariant"))];
        for n in quarter_hours(vertices) {
            let xs: Vec<f64> = paths.iter().map(|p| p.at(n) as f64).collect();
            let i = (n - 1) as usize;
            out.push(mean_report(format!("moments/mean/N={vertices}/n={n}"), &xs, mu[i], max_z));
            out.push(variance_report(format!("moments/variance/N={vertices}/n={n}"), &xs, sigma2[i], max_z));
        }
        Ok(out)
    }

    /// Joint law of `(X_1, ..., X_N)` from each sampler against the exact
    /// path law, and the samplers against one another.
    pub fn check_sampler_equivalence(&self, vertices: u64, reps: u64) -> Result<Vec<GofReport>> {
        need_reps(reps, 100)?;
        let params = ModelParams::new(vertices)?;
        let law = ExactOracle::default().paths::<f64>(&params)?;
        let index: HashMap<&Vec<u64>, usize> = law.keys().enumerate().map(|(i, k)| (k, i)).collect();
        let mut pmf: Vec<f64> = law.values().copied().collect();
        // one extra category for paths outside the support
        pmf.push(0.0);
        let outside = pmf.len() - 1;
        let tally = |paths: Vec<Vec<u64>>| {
            let mut counts = vec![0u64; pmf.len()];
            for p in &paths {
                counts[index.get(p).copied().unwrap_or(outside)] += 1;
            }
            counts
        };
        let family = Check::SamplerEquivalence.family() << 8 | vertices;
        let pool = run_replicates(self.seed, family << 2, reps, |s| {
            simulate_pool(&params, s, false).map(|t| t.x).unwrap_or_default()
        });
        let urn = run_replicates(self.seed, family << 2 | 1, reps, |s| simulate_urn(&params, s).x);
        let insertion = run_replicates(self.seed, family << 2 | 2, reps, |s| {
            simulate_insertion(&params, s).to_trajectory(params).map(|t| t.x).unwrap_or_default()
        });
        let samplers = [("pool", tally(pool)), ("urn", tally(urn)), ("insertion", tally(insertion))];

        let mut out = Vec::new();
        for (name, counts) in &samplers {
            let tv = tv_distance(counts, &pmf);
            out.push(
                GofReport::new(
                    format!("sampler-equivalence/{name}/N={vertices}"),
                    super::stats::TestKind::TvVsOracle,
                    tv,
                    None,
                    reps,
                )
                .with_rule(Rule::StatisticBelow, self.thresholds.max_tv)
                .with_detail(format!("{} paths in the support, {} outside", law.len(), counts[outside])),
            );
        }
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let r = super::stats::chi_square_two_sample(
                format!("sampler-equivalence/{}-vs-{}/N={vertices}", samplers[a].0, samplers[b].0),
                &samplers[a].1,
                &samplers[b].1,
            );
            out.push(r.with_rule(Rule::PValueAbove, self.thresholds.min_chi_square_p));
        }
        Ok(out)
    }

    /// Frequency of `(i, j) ∈ G_n` over tracked event-level runs against
    /// `(n - j)/(N - j + 1)`.
    pub fn check_edge_probability(
        &self,
        vertices: u64,
        hour: u64,
        edges: &[(u64, u64)],
        reps: u64,
    ) -> Result<Vec<GofReport>> {
        need_reps(reps, 2)?;
        let params = ModelParams::new(vertices)?;
        let probs: Vec<f64> =
            edges.iter().map(|&(i, j)| edge_probability(vertices, hour, i, j)).collect::<Result<_>>()?;
        let hits_per_run = run_replicates(self.seed, Check::EdgeProbability.family(), reps, |s| {
            let t = simulate_pool(&params, s, true).expect("N within the edge cap");
            let events = t.edge_times.unwrap_or_default();
            edges
                .iter()
                .map(|&(i, j)| events.iter().any(|e| u64::from(e.origin) == i && u64::from(e.target) == j && u64::from(e.hour) < hour))
                .collect::<Vec<bool>>()
        });
        Ok(edges
            .iter()
            .zip(&probs)
            .enumerate()
            .map(|(k, (&(i, j), &p))| {
                let hits = hits_per_run.iter().filter(|h| h[k]).count() as u64;
                frequency_report(
                    format!("edge-probability/N={vertices}/n={hour}/edge=({i},{j})"),
                    hits,
                    reps,
                    p,
                    self.thresholds.max_z,
                )
            })
            .collect())
    }

    /// Zero means of `X_n - C_n` and `(X_n - μ_n)/(N - n + 1)`, and the
    /// mean second difference at `N/2`.
    pub fn check_martingales(&self, vertices: u64, reps: u64) -> Result<Vec<GofReport>> {
        need_reps(reps, 100)?;
        let params = ModelParams::new(vertices)?;
        let mu = mean_edges_all(vertices);
        let hours = quarter_hours(vertices);
        let mid = vertices / 2;
        let with_second = vertices >= 4 && mid >= 2;
        let rows = run_replicates(self.seed, Check::Martingales.family(), reps, |s| {
            let t = simulate_urn(&params, s);
            let c = compensator(&t);
            let mut row: Vec<f64> = Vec::with_capacity(2 * hours.len() + 1);
            for &n in &hours {
                row.push(t.at(n) as f64 - c.at(n));
                row.push((t.at(n) as f64 - mu[(n - 1) as usize]) / (vertices - n + 1) as f64);
            }
            if with_second {
                row.push(t.increment(mid + 1) as f64 - t.increment(mid) as f64);
            }
            row
        });
        let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
        let max_z = self.thresholds.max_z;
        let mut out = Vec::new();
        for (h, &n) in hours.iter().enumerate() {
            out.push(mean_report(format!("martingales/compensated/N={vertices}/n={n}"), &col(2 * h), 0.0, max_z));
            out.push(mean_report(format!("martingales/scaled-centred/N={vertices}/n={n}"), &col(2 * h + 1), 0.0, max_z));
        }
        if with_second {
            let expected = second_difference_mean(vertices, mid)?;
            out.push(mean_report(
                format!("martingales/second-difference/N={vertices}/n={mid}"),
                &col(2 * hours.len()),
                expected,
                max_z,
            ));
        }
        Ok(out)
    }

    /// Mean over replicates of `sup_t |2X_{⌊tN⌋}/N² - φ(t)|` for each `N`.
    /// The supremum is exact: the path is constant and `φ` increasing on
    /// each `[n/N, (n+1)/N)`.
    pub fn check_fluid_limit(&self, vertex_list: &[u64], reps: u64) -> Result<Vec<GofReport>> {
        need_reps(reps, 2)?;
        if vertex_list.is_empty() {
            return Err(Error::InvalidParams("fluid-limit needs at least one N".into()));
        }
        let mut gaps = Vec::new();
        let mut out = Vec::new();
        for &vertices in vertex_list {
            let params = ModelParams::new(vertices)?;
            let big = vertices as f64;
            let curve: Vec<f64> = (0..=vertices).map(|n| phi(n as f64 / big)).collect::<Result<_>>()?;
            let family = Check::FluidLimit.family() << 32 | vertices;
            let sup = run_replicates(self.seed, family, reps, |s| {
                let t = simulate_urn(&params, s);
                let scale = 2.0 / (big * big);
                let mut g: f64 = 0.0;
                for n in 0..vertices {
                    let c = t.at(n) as f64 * scale;
                    g = g.max((c - curve[n as usize]).abs()).max((c - curve[n as usize + 1]).abs());
                }
                g.max((t.at(vertices) as f64 * scale - curve[vertices as usize]).abs())
            });
            let mean_gap = estimate(&sup).mean;
            gaps.push(mean_gap);
            if Some(&vertices) == vertex_list.last() {
                out.push(
                    GofReport::bound(format!("fluid-limit/sup-gap/N={vertices}"), mean_gap, reps, self.thresholds.max_fluid_gap)
                        .with_detail(format!("mean sup-gap over {reps} paths")),
                );
            }
        }
        for (w, ns) in gaps.windows(2).zip(vertex_list.windows(2)) {
            out.push(decrease_report(format!("fluid-limit/decreasing/N={}->{}", ns[0], ns[1]), w[0], w[1], reps));
        }
        Ok(out)
    }

    /// Exact tables against `φ` and `ψ` for `n ≤ 0.9N`.
    pub fn check_moment_curves(&self, vertex_list: &[u64]) -> Result<Vec<GofReport>> {
        if vertex_list.is_empty() {
            return Err(Error::InvalidParams("moment-curves needs at least one N".into()));
        }
        let mut gaps = Vec::new();
        for &vertices in vertex_list {
            let table = MomentTable::float(vertices)?;
            let big = vertices as f64;
            let (mut gm, mut gv): (f64, f64) = (0.0, 0.0);
            for n in 1..=vertices {
                let t = n as f64 / big;
                if t > 0.9 {
                    break;
                }
                gm = gm.max((2.0 * table.mean(n) / (big * big) - phi(t)?).abs());
                gv = gv.max((table.variance(n) / big.powi(3) - psi(t)?).abs());
            }
            gaps.push((gm, gv));
        }
        let last = *vertex_list.last().expect("non-empty");
        let (gm, gv) = *gaps.last().expect("non-empty");
        let mut out = vec![
            GofReport::bound(format!("moment-curves/mean/N={last}"), gm, last, self.thresholds.max_curve_mean_gap),
            GofReport::bound(format!("moment-curves/variance/N={last}"), gv, last, self.thresholds.max_curve_variance_gap),
        ];
        for (w, ns) in gaps.windows(2).zip(vertex_list.windows(2)) {
            out.push(decrease_report(format!("moment-curves/mean-decreasing/N={}->{}", ns[0], ns[1]), w[0].0, w[1].0, ns[1]));
            out.push(decrease_report(
                format!("moment-curves/variance-decreasing/N={}->{}", ns[0], ns[1]),
                w[0].1,
                w[1].1,
                ns[1],
            ));
        }
        Ok(out)
    }

    /// `N^{-1/3} ξ_N` against `1 - exp(-x³/6)`, its third moment, and the
    /// exact survival function.
    pub fn check_first_edge(&self, vertices: u64, reps: u64) -> Result<Vec<GofReport>> {
        need_reps(reps, 2)?;
        let params = ModelParams::new(vertices)?;
        let xi = run_replicates(self.seed, Check::FirstEdge.family(), reps, |s| {
            first_edge_time(&params, s).unwrap_or(vertices + 1)
        });
        let scale = cube_root(vertices);
        let scaled: Vec<f64> = xi.iter().map(|&x| x as f64 / scale).collect();
        let th = &self.thresholds;

        let ks = ks_test(format!("first-edge/ks/N={vertices}"), &scaled, |x| first_edge_limit_cdf(x).unwrap_or(0.0))
            .with_rule(Rule::StatisticBelow, th.max_first_edge_ks);
        let cubes: Vec<f64> = xi.iter().map(|&x| (x as f64).powi(3) / vertices as f64).collect();
        let third = GofReport::relative(
            format!("first-edge/third-moment/N={vertices}"),
            estimate(&cubes).mean,
            first_edge_limit_moment(3.0)?,
            reps,
            th.first_edge_moment_rel,
        );
        let hour = icbrt(vertices).clamp(1, vertices);
        let survived = xi.iter().filter(|&&x| x > hour).count() as u64;
        let survival = frequency_report(
            format!("first-edge/survival/N={vertices}/n={hour}"),
            survived,
            reps,
            first_edge_survival(vertices, hour)?,
            th.max_z,
        );
        let exact = exact_report("first-edge/survival-exact/N=10/n=4".into(), first_edge_survival(10, 4)?, 28.0 / 45.0, th.exact_abs);
        Ok(vec![ks, third, survival, exact])
    }

    /// Edge counts on the `N^{1/3}` clock in the bins `[t_i, t_{i+1})`
    /// against the Poisson limit with `Λ(t) = t³/6`.
    pub fn check_early_poisson(&self, vertices: u64, bins: &[f64], reps: u64) -> Result<Vec<GofReport>> {
        need_reps(reps, 2)?;
        if bins.len() < 2 || bins.windows(2).any(|w| w[0] >= w[1]) || bins[0] < 0.0 {
            return Err(Error::InvalidParams("bin edges must be increasing and non-negative".into()));
        }
        let params = ModelParams::new(vertices)?;
        let scale = cube_root(vertices);
        let hours: Vec<u64> = bins.iter().map(|&t| ((t * scale + 1e-9).floor() as u64).min(vertices)).collect();
        let last = *hours.last().expect("non-empty");
        let counts = run_replicates(self.seed, Check::EarlyPoisson.family(), reps, |s| {
            let x = simulate_urn_until(&params, s, last, NhgMethod::Sequential);
            let at = |h: u64| if h == 0 { 0 } else { x[(h - 1) as usize] };
            hours.windows(2).map(|w| (at(w[1]) - at(w[0])) as f64).collect::<Vec<f64>>()
        });
        let th = &self.thresholds;
        let mut out = Vec::new();
        let columns: Vec<Vec<f64>> = (0..bins.len() - 1).map(|b| counts.iter().map(|c| c[b]).collect()).collect();
        for (b, col) in columns.iter().enumerate() {
            let (lo, hi) = (bins[b], bins[b + 1]);
            let expected = (hi.powi(3) - lo.powi(3)) / 6.0;
            let est = estimate(col);
            out.push(GofReport::relative(format!("early-poisson/mean/bin=[{lo},{hi})"), est.mean, expected, reps, th.poisson_rel));
            out.push(GofReport::relative(
                format!("early-poisson/variance/bin=[{lo},{hi})"),
                est.variance,
                expected,
                reps,
                th.poisson_rel,
            ));
        }
        for a in 0..columns.len() {
            for b in a + 1..columns.len() {
                let rho = correlation(&columns[a], &columns[b]);
                out.push(
                    GofReport::bound(format!("early-poisson/correlation/bins={a},{b}"), rho.abs(), reps, th.max_bin_correlation)
                        .with_detail(format!("rho = {rho:.5}")),
                );
            }
        }
        Ok(out)
    }

    /// Variance, covariance and normality of `Y_N` at fixed times.
    pub fn check_gaussian_fluctuations(&self, vertices: u64, reps: u64) -> Result<Vec<GofReport>> {
        need_reps(reps, 100)?;
        let grid = [0.3, 0.5, 0.6];
        let family = Check::GaussianFluctuations.family();
        let sample = FluctuationSample::collect(vertices, reps, &grid, self.seed, family)?;
        let y3 = sample.column(0.3).expect("on grid");
        let y5 = sample.column(0.5).expect("on grid");
        let y6 = sample.column(0.6).expect("on grid");
        let th = &self.thresholds;

        let est = estimate(&y5);
        let var = GofReport::relative(format!("gaussian-fluctuations/variance/N={vertices}/t=0.5"), est.variance, psi(0.5)?, reps, th.fluctuation_variance_rel);
        let cov = GofReport::relative(
            format!("gaussian-fluctuations/covariance/N={vertices}/t=0.3,0.6"),
            covariance(&y3, &y6),
            cov_kernel(0.3, 0.6)?,
            reps,
            th.fluctuation_covariance_rel,
        );
        let sd = est.variance.sqrt();
        let standardised: Vec<f64> = y5.iter().map(|y| (y - est.mean) / sd).collect();
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        let ks = ks_test(format!("gaussian-fluctuations/normality/N={vertices}/t=0.5"), &standardised, |x| normal.cdf(x))
            .with_rule(Rule::PValueAbove, th.min_normal_ks_p);
        let mut out = vec![var, cov, ks];
        if self.compare_diffusion {
            let limit = ExactDiffusion::new(&[0.0, 0.5])?;
            let ys = run_replicates(self.seed, family << 8 | 1, reps, |s| limit.sample(&mut s.rng()).y[1]);
            out.push(
                ks_two_sample(format!("gaussian-fluctuations/vs-diffusion/N={vertices}/t=0.5"), &y5, &ys)
                    .with_rule(Rule::PValueAbove, th.min_normal_ks_p),
            );
        }
        Ok(out)
    }

    /// Exact and Euler paths of the limit diffusion against `ψ` and the
    /// covariance kernel.
    pub fn check_diffusion(&self, paths: u64) -> Result<Vec<GofReport>> {
        need_reps(paths, 100)?;
        let grid = [0.0, 0.3, 0.5, 0.6];
        let family = Check::Diffusion.family();
        let exact = ExactDiffusion::new(&grid)?;
        let ex = run_replicates(self.seed, family << 1, paths, |s| exact.sample(&mut s.rng()).y);
        let eu = run_replicates(self.seed, family << 1 | 1, paths, |s| {
            simulate_limit_diffusion(&grid, s, DiffusionMethod::euler()).expect("valid grid").y
        });
        let col = |rows: &[Vec<f64>], i: usize| rows.iter().map(|r| r[i]).collect::<Vec<f64>>();
        let th = &self.thresholds;
        let exact_var = estimate(&col(&ex, 2)).variance;
        Ok(vec![
            GofReport::relative("diffusion/exact/variance/t=0.5", exact_var, psi(0.5)?, paths, th.diffusion_variance_rel),
            GofReport::relative(
                "diffusion/exact/covariance/t=0.3,0.6",
                covariance(&col(&ex, 1), &col(&ex, 3)),
                cov_kernel(0.3, 0.6)?,
                paths,
                th.diffusion_covariance_rel,
            ),
            GofReport::relative(
                "diffusion/euler-vs-exact/variance/t=0.5",
                estimate(&col(&eu, 2)).variance,
                exact_var,
                paths,
                th.euler_variance_rel,
            ),
        ])
    }

    /// The terminal regime: exact mean of `ΔX_{N+1}`, `Exp(1)` marginals
    /// and weak correlation of the last `m + 1` scaled increments, and
    /// Erlang means of the scaled deficits.
    pub fn check_last_stage(&self, vertices: u64, reps: u64, m: u64) -> Result<Vec<GofReport>> {
        need_reps(reps, 2)?;
        if m + 2 > vertices {
            return Err(Error::InvalidParams(format!("m = {m} too large for N = {vertices}")));
        }
        let params = ModelParams::new(vertices)?;
        let total = params.total_edges();
        let rows = run_replicates(self.seed, Check::LastStage.family(), reps, |s| {
            let t: Trajectory = simulate_urn(&params, s);
            let inc: Vec<u64> = (0..=m).map(|i| t.increment(vertices + 1 - i)).collect();
            let deficit: Vec<u64> = (0..=m).map(|j| total - t.at(vertices - j)).collect();
            (inc, deficit)
        });
        let th = &self.thresholds;
        let scale = vertices as f64 * (vertices as f64).ln();
        let mut out = Vec::new();

        let last: Vec<f64> = rows.iter().map(|r| r.0[0] as f64).collect();
        let exact_mean = last_stage_mean(vertices)?;
        out.push(mean_report(format!("last-stage/mean/N={vertices}"), &last, exact_mean, th.max_z));
        let mu_n = mean_edges::<BigRational>(vertices, vertices)?;
        let symbolic = (BigRational::from_integer(total.into()) - mu_n).as_f64();
        out.push(
            GofReport::bound(format!("last-stage/symbolic/N={vertices}"), (exact_mean - symbolic).abs(), 1, th.symbolic_abs)
                .with_detail(format!("N(h_N - 1) = {exact_mean:.12}, C(N,2) - mu_N = {symbolic:.12}")),
        );

        let scaled: Vec<Vec<f64>> =
            (0..=m as usize).map(|i| rows.iter().map(|r| r.0[i] as f64 / scale).collect()).collect();
        for (i, col) in scaled.iter().enumerate() {
            let n = vertices + 1 - i as u64;
            let mut r = ks_test(format!("last-stage/exp1-ks/N={vertices}/increment={n}"), col, |x| {
                erlang_cdf(0, x).unwrap_or(0.0)
            })
            .with_rule(Rule::StatisticBelow, th.max_terminal_ks);
            if i == 0 {
                // ΔX_{N+1} >= N - 1 on every path
                let floor = 1.0 - (-((vertices - 1) as f64) / scale).exp();
                r = r.with_detail(format!("KS is at least {floor:.4} at this N"));
            }
            out.push(r);
        }
        for a in 0..scaled.len() {
            for b in a + 1..scaled.len() {
                let rho = correlation(&scaled[a], &scaled[b]);
                out.push(
                    GofReport::bound(
                        format!("last-stage/correlation/N={vertices}/increments={},{}", vertices + 1 - a as u64, vertices + 1 - b as u64),
                        rho.abs(),
                        reps,
                        th.max_terminal_correlation,
                    )
                    .with_detail(format!("rho = {rho:.5}")),
                );
            }
        }
        for j in 0..=m as usize {
            let col: Vec<f64> = rows.iter().map(|r| r.1[j] as f64 / scale).collect();
            out.push(GofReport::relative(
                format!("last-stage/erlang-mean/N={vertices}/j={j}"),
                estimate(&col).mean,
                j as f64 + 1.0,
                reps,
                th.erlang_mean_rel,
            ));
        }
        Ok(out)
    }

    /// Marginals of the gamma-Dirichlet construction against `Exp(1)`.
    pub fn check_gamma_dirichlet(&self, m: u64, samples: u64) -> Result<Vec<GofReport>> {
        need_reps(samples, 2)?;
        let draws = run_replicates(self.seed, Check::GammaDirichlet.family(), samples, |s| {
            gamma_dirichlet_sample(m, &mut s.rng())
        });
        Ok((0..=m as usize)
            .map(|i| {
                let col: Vec<f64> = draws.iter().map(|d| d[i]).collect();
                ks_test(format!("gamma-dirichlet/exp1-ks/m={m}/coordinate={i}"), &col, |x| erlang_cdf(0, x).unwrap_or(0.0))
                    .with_rule(Rule::StatisticBelow, self.thresholds.max_gamma_dirichlet_ks)
            })
            .collect())
    }
}
