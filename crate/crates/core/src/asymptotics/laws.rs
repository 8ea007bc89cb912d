//! The limit laws of the early and terminal regimes.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use statrs::function::gamma::{gamma, gamma_lr};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitLaw {
    /// Limit of `N^{-1/3} ξ_N`: `P[ξ > x] = exp(-x³/6)`.
    FirstEdge,
    /// Limit of `ΔX_{N+1-i} / (N log N)`.
    ExpOne,
    /// `Gamma(m+1, 1)`, limit of `(C(N,2) - X_{N-m}) / (N log N)`.
    Erlang { m: u64 },
    /// Edge arrivals on the `N^{1/3}` clock, rate `t²/2`.
    EarlyPoisson,
    /// Reversed atoms `(C(N,2) - X_{N-j})/(N log N)`, unit rate.
    UnitPoisson,
}

impl LimitLaw {
    /// Distribution function, for the three random-variable laws.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        match *self {
            LimitLaw::FirstEdge => first_edge_limit_cdf(x),
            LimitLaw::ExpOne => erlang_cdf(0, x),
            LimitLaw::Erlang { m } => erlang_cdf(m, x),
            LimitLaw::EarlyPoisson | LimitLaw::UnitPoisson => {
                Err(Error::OutOfDomain(format!("{self:?} is a point process, not a distribution")))
            }
        }
    }

    /// Cumulative intensity `Λ(t)`, for the two point processes.
    pub fn cumulative_rate(&self, t: f64) -> Result<f64> {
        match *self {
            LimitLaw::EarlyPoisson => early_poisson_cumulative(t),
            LimitLaw::UnitPoisson if t >= 0.0 => Ok(t),
            LimitLaw::UnitPoisson => Err(Error::OutOfDomain(format!("t = {t} < 0"))),
            _ => Err(Error::OutOfDomain(format!("{self:?} is a distribution, not a point process"))),
        }
    }

    pub fn mean(&self) -> Option<f64> {
        match *self {
            LimitLaw::FirstEdge => first_edge_limit_moment(1.0).ok(),
            LimitLaw::ExpOne => Some(1.0),
            LimitLaw::Erlang { m } => Some(m as f64 + 1.0),
            _ => None,
        }
    }
}

fn non_negative(x: f64, what: &str) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::OutOfDomain(format!("{what} = {x} must be non-negative")));
    }
    Ok(())
}

/// `1 - exp(-x³/6)`.
pub fn first_edge_limit_cdf(x: f64) -> Result<f64> {
    non_negative(x, "x")?;
    Ok(-(-x.powi(3) / 6.0).exp_m1())
}

/// `E[ξ^α] = 6^{α/3} Γ(1 + α/3)`.
pub fn first_edge_limit_moment(alpha: f64) -> Result<f64> {
    non_negative(alpha, "alpha")?;
    Ok(6f64.powf(alpha / 3.0) * gamma(1.0 + alpha / 3.0))
}

/// `Λ(t) = t³/6`.
pub fn early_poisson_cumulative(t: f64) -> Result<f64> {
    non_negative(t, "t")?;
    Ok(t.powi(3) / 6.0)
}

/// `λ(t) = t²/2`.
pub fn early_poisson_rate(t: f64) -> Result<f64> {
    non_negative(t, "t")?;
    Ok(t * t / 2.0)
}

/// Distribution function of `Gamma(m+1, 1)`.
pub fn erlang_cdf(m: u64, x: f64) -> Result<f64> {
    non_negative(x, "x")?;
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(gamma_lr(m as f64 + 1.0, x))
}

/// `γ·(ξ_1, ..., ξ_{m+1})` with `γ ~ Gamma(m+1, 1)` and `ξ` uniform on the
/// `m`-simplex (spacings of `m` sorted uniforms). Each coordinate is `Exp(1)`.
pub fn gamma_dirichlet_sample<R: Rng + ?Sized>(m: u64, rng: &mut R) -> Vec<f64> {
    let shape = Gamma::new(m as f64 + 1.0, 1.0).expect("positive shape");
    let g = shape.sample(rng);
    let mut cuts: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.push(1.0);
    let mut prev = 0.0;
    cuts.into_iter()
        .map(|c| {
            let part = c - prev;
            prev = c;
            g * part
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::quad::adaptive_simpson;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_edge_moments() {
        assert!((first_edge_limit_moment(3.0).unwrap() - 6.0).abs() < 1e-12);
        assert!((first_edge_limit_moment(0.0).unwrap() - 1.0).abs() < 1e-14);
        // E[ξ] = ∫ P[ξ > x] dx
        let tail = adaptive_simpson(&|x: f64| (-x.powi(3) / 6.0).exp(), 0.0, 12.0, 1e-12);
        let m1 = first_edge_limit_moment(1.0).unwrap();
        assert!((m1 - tail).abs() < 1e-9);
        assert!((m1 - 1.6226).abs() < 1e-4);
        assert!(first_edge_limit_moment(-1.0).is_err());
    }

    #[test]
    fn first_edge_cdf() {
        assert_eq!(first_edge_limit_cdf(0.0).unwrap(), 0.0);
        assert!((first_edge_limit_cdf(6f64.cbrt()).unwrap() - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!(first_edge_limit_cdf(-0.5).is_err());
    }

    #[test]
    fn early_poisson() {
        assert_eq!(early_poisson_cumulative(0.0).unwrap(), 0.0);
        assert!((early_poisson_cumulative(2.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        let h = 1e-4;
        let d = (early_poisson_cumulative(1.0 + h).unwrap() - early_poisson_cumulative(1.0).unwrap()) / h;
        // one-sided difference: error h·Λ''(1)/2 = 5e-5
        assert!((d - early_poisson_rate(1.0).unwrap()).abs() < 1e-4);
        let d = (early_poisson_cumulative(1.0 + h).unwrap() - early_poisson_cumulative(1.0 - h).unwrap()) / (2.0 * h);
        assert!((d - 0.5).abs() < 1e-6);
    }

    #[test]
    fn erlang() {
        for x in [0.1, 1.0, 3.5] {
            assert!((erlang_cdf(0, x).unwrap() - (1.0 - (-x).exp())).abs() < 1e-14);
            let two = 1.0 - (-x).exp() * (1.0 + x + x * x / 2.0);
            assert!((erlang_cdf(2, x).unwrap() - two).abs() < 1e-13);
        }
        assert_eq!(LimitLaw::Erlang { m: 4 }.mean(), Some(5.0));
        assert!(LimitLaw::UnitPoisson.cdf(1.0).is_err());
        assert_eq!(LimitLaw::UnitPoisson.cumulative_rate(2.5).unwrap(), 2.5);
    }

    #[test]
    fn gamma_dirichlet_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = gamma_dirichlet_sample(0, &mut rng);
        assert_eq!(v.len(), 1);
        let v = gamma_dirichlet_sample(4, &mut rng);
        assert_eq!(v.len(), 5);
        assert!(v.iter().all(|&c| c >= 0.0));
    }
}
