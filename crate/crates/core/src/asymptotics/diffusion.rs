//! Sample paths of the limiting fluctuation process
//! `dY = -Y/(1-t) dt + (t + log(1-t)) dB`, `Y(0) = 0`, `Y(1) = 0`.
//!
//! The exact method uses `Y(t) = (1-t) M(t)` where `M` has independent
//! centred Gaussian increments with `Var M(t) = ψ(t)/(1-t)²`. The Euler
//! method integrates the SDE up to `1 - δ` and is kept as a cross-check.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::curves::{bridge_variance_increment, diffusion_coefficient};
use crate::error::{Error, Result};
use crate::model::SeedSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiffusionMethod {
    Exact,
    Euler { delta: f64, step: f64 },
}

impl DiffusionMethod {
    pub fn euler() -> Self {
        DiffusionMethod::Euler { delta: 1e-3, step: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffusionPath {
    pub grid: Vec<f64>,
    pub y: Vec<f64>,
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    let ok = grid.first() == Some(&0.0)
        && grid.iter().all(|t| (0.0..=1.0).contains(t))
        && grid.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(Error::BadGrid)
    }
}

/// Exact sampler for a fixed grid; the per-step standard deviations are
/// computed once and reused for every path.
#[derive(Debug, Clone)]
pub struct ExactDiffusion {
    grid: Vec<f64>,
    step_sd: Vec<f64>,
}

impl ExactDiffusion {
    pub fn new(grid: &[f64]) -> Result<Self> {
        validate_grid(grid)?;
        let step_sd = grid
            .windows(2)
            .map(|w| if w[1] >= 1.0 { 0.0 } else { bridge_variance_increment(w[0], w[1]).sqrt() })
            .collect();
        Ok(Self { grid: grid.to_vec(), step_sd })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DiffusionPath {
        let mut y = Vec::with_capacity(self.grid.len());
        y.push(0.0);
        let mut martingale = 0.0;
        for (k, sd) in self.step_sd.iter().enumerate() {
            let t = self.grid[k + 1];
            if t >= 1.0 {
                y.push(0.0);
                continue;
            }
            let z: f64 = rng.sample(StandardNormal);
            martingale += sd * z;
            y.push((1.0 - t) * martingale);
        }
        DiffusionPath { grid: self.grid.clone(), y }
    }
}

fn euler_path<R: Rng + ?Sized>(grid: &[f64], delta: f64, step: f64, rng: &mut R) -> Result<DiffusionPath> {
    if !(delta > 0.0 && delta < 1.0 && step > 0.0) {
        return Err(Error::InvalidParams(format!("Euler needs 0 < δ < 1 and step > 0, got δ={delta}, step={step}")));
    }
    let stop = 1.0 - delta;
    let mut t = 0.0;
    let mut cur = 0.0;
    let mut advance = |target: f64, t: &mut f64, cur: &mut f64| {
        while *t < target {
            let h = step.min(target - *t);
            let z: f64 = rng.sample(StandardNormal);
            *cur += -*cur / (1.0 - *t) * h + diffusion_coefficient(*t) * h.sqrt() * z;
            *t += h;
            if target - *t < 1e-12 {
                *t = target;
            }
        }
    };
    let mut y = Vec::with_capacity(grid.len());
    let mut at_stop = None;
    for &g in grid {
        if g <= stop {
            advance(g, &mut t, &mut cur);
            y.push(cur);
        } else {
            let ys = *at_stop.get_or_insert_with(|| {
                advance(stop, &mut t, &mut cur);
                cur
            });
            // linear from Y(1-δ) to the pinned value Y(1) = 0
            y.push(ys * (1.0 - g) / delta);
        }
    }
    Ok(DiffusionPath { grid: grid.to_vec(), y })
}

pub fn simulate_limit_diffusion(grid: &[f64], seed: SeedSpec, method: DiffusionMethod) -> Result<DiffusionPath> {
    let mut rng = seed.rng();
    match method {
        DiffusionMethod::Exact => Ok(ExactDiffusion::new(grid)?.sample(&mut rng)),
        DiffusionMethod::Euler { delta, step } => {
            validate_grid(grid)?;
            euler_path(grid, delta, step, &mut rng)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_at_zero_and_ends_pinned() {
        let grid = [0.0, 0.25, 0.5, 0.9995, 1.0];
        for method in [DiffusionMethod::Exact, DiffusionMethod::euler()] {
            for r in 0..5 {
                let p = simulate_limit_diffusion(&grid, SeedSpec::new(1, r), method).unwrap();
                assert_eq!(p.y[0], 0.0);
                assert_eq!(*p.y.last().unwrap(), 0.0);
                assert!(p.y.iter().all(|v| v.is_finite()));
            }
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let seed = SeedSpec::new(0, 0);
        for grid in [vec![0.1, 0.5], vec![0.0, 0.5, 0.4], vec![0.0, 1.5], vec![]] {
            assert_eq!(simulate_limit_diffusion(&grid, seed, DiffusionMethod::Exact), Err(Error::BadGrid));
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let grid = [0.0, 0.3, 0.6];
        let s = SeedSpec::new(4, 4);
        for method in [DiffusionMethod::Exact, DiffusionMethod::euler()] {
            assert_eq!(
                simulate_limit_diffusion(&grid, s, method).unwrap(),
                simulate_limit_diffusion(&grid, s, method).unwrap()
            );
        }
    }
}
