//! Exact finite-`N` moments of the edge count.
//!
//! Every formula is generic over [`Scalar`]: run it over `BigRational` for
//! ground truth at small `N`, over `f64` (compensated sums) for large `N`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{NegHypergeometric, Trajectory};
use crate::numeric::{binom2, CompensatedSum, NumericMode, Scalar};

fn check_hour(vertices: u64, n: u64) -> Result<()> {
    if vertices < 2 || n < 1 || n > vertices {
        return Err(Error::OutOfDomain(format!("need 1 <= n <= N with N >= 2, got n={n}, N={vertices}")));
    }
    Ok(())
}

fn int<T: Scalar>(v: u64) -> T {
    T::from_i64(v as i64)
}

/// `Σ_{j=1}^{n-1} 1/(N-j+1)`.
fn harmonic_tail<T: Scalar>(vertices: u64, n: u64) -> T {
    T::sum((1..n).map(|j| T::ratio(1, (vertices - j + 1) as i64)))
}

/// Prefix sums `Σ_{j=1}^{n-1} 1/(N-j+1)` for every `n = 1..=N`, accumulated
/// from the small end.
#[derive(Debug, Clone)]
pub struct HarmonicTail {
    vertices: u64,
    prefix: Vec<f64>,
}

impl HarmonicTail {
    pub fn new(vertices: u64) -> Self {
        let mut acc = CompensatedSum::new();
        let mut prefix = Vec::with_capacity(vertices as usize);
        prefix.push(0.0);
        for j in 1..vertices {
            acc += 1.0 / (vertices - j + 1) as f64;
            prefix.push(acc.value());
        }
        Self { vertices, prefix }
    }

    /// Value for hour `n`.
    pub fn at(&self, n: u64) -> f64 {
        self.prefix[(n - 1) as usize]
    }

    pub fn vertices(&self) -> u64 {
        self.vertices
    }
}

/// `μ_n = C(n,2) + (n-1)(N-n) - N(N-n+1) Σ_{j<n} 1/(N-j+1)`.
pub fn mean_edges<T: Scalar>(vertices: u64, n: u64) -> Result<T> {
    check_hour(vertices, n)?;
    let big = int::<T>(vertices);
    Ok(int::<T>(binom2(n)) + int::<T>((n - 1) * (vertices - n))
        - big * int::<T>(vertices - n + 1) * harmonic_tail::<T>(vertices, n))
}

/// The closed-form mean for every hour, sharing one harmonic table.
pub fn mean_edges_all(vertices: u64) -> Vec<f64> {
    let tail = HarmonicTail::new(vertices);
    let big = vertices as f64;
    (1..=vertices)
        .map(|n| {
            let mut acc = CompensatedSum::new();
            acc += binom2(n) as f64;
            acc += ((n - 1) * (vertices - n)) as f64;
            acc += -big * (vertices - n + 1) as f64 * tail.at(n);
            acc.value()
        })
        .collect()
}

/// `μ_1..μ_N` from `μ_{n+1} = μ_n + (C(n,2) - μ_n)/(N-n+1)`.
pub fn mean_table<T: Scalar>(vertices: u64) -> Result<Vec<T>> {
    check_hour(vertices, 1)?;
    let mut mu = Vec::with_capacity(vertices as usize);
    let mut cur = T::zero();
    mu.push(cur.clone());
    for n in 1..vertices {
        cur = cur.clone() + (int::<T>(binom2(n)) - cur) / int::<T>(vertices - n + 1);
        mu.push(cur.clone());
    }
    Ok(mu)
}

/// `μ_{n+1} - μ_n = -(n-1)(N-n)/(N-n+1) + N Σ_{i<n} 1/(N-i+1)`.
pub fn mean_diff<T: Scalar>(vertices: u64, n: u64) -> Result<T> {
    if n >= vertices {
        return Err(Error::OutOfDomain(format!("need n < N, got n={n}, N={vertices}")));
    }
    check_hour(vertices, n)?;
    Ok(-T::ratio(((n - 1) * (vertices - n)) as i64, (vertices - n + 1) as i64)
        + int::<T>(vertices) * harmonic_tail::<T>(vertices, n))
}

/// `E[ΔX_{n+1} - ΔX_n] = (n-1)/(N-n+1)`.
pub fn second_difference_mean(vertices: u64, n: u64) -> Result<f64> {
    if n < 2 || n >= vertices {
        return Err(Error::OutOfDomain(format!("need 2 <= n < N, got n={n}, N={vertices}")));
    }
    Ok((n - 1) as f64 / (vertices - n + 1) as f64)
}

/// Variances from the one-step recursion and from its solved form.
#[derive(Debug, Clone)]
pub struct VarianceTable<T> {
    pub recursion: Vec<T>,
    pub closed_form: Vec<T>,
}

impl VarianceTable<f64> {
    /// Largest relative disagreement between the two routes, ignoring
    /// entries that are exactly zero in both.
    pub fn max_relative_gap(&self) -> f64 {
        self.recursion
            .iter()
            .zip(&self.closed_form)
            .filter(|(a, b)| **a != 0.0 || **b != 0.0)
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()))
            .fold(0.0, f64::max)
    }
}

pub fn variance_recursion<T: Scalar>(vertices: u64, mu: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(mu.len());
    let mut s = T::zero();
    out.push(s.clone());
    for n in 1..vertices {
        let d = mu[n as usize].clone() - mu[(n - 1) as usize].clone();
        let num = int::<T>(vertices - n) * d.clone() * (d + T::one()) - int::<T>(2) * s.clone();
        s = s.clone() + num / int::<T>(vertices - n + 2);
        out.push(s.clone());
    }
    out
}

pub fn variance_closed_form<T: Scalar>(vertices: u64, mu: &[T]) -> Vec<T> {
    let prefix = T::prefix_sums((1..vertices).map(|j| {
        let d = mu[j as usize].clone() - mu[(j - 1) as usize].clone();
        d.clone() * (d + T::one()) / int::<T>((vertices - j + 1) * (vertices - j + 2))
    }));
    (1..=vertices)
        .map(|n| int::<T>((vertices - n + 1) * (vertices - n + 2)) * prefix[(n - 1) as usize].clone())
        .collect()
}

/// Both variance routes for `n = 1..=N`.
pub fn variance_table<T: Scalar>(vertices: u64) -> Result<VarianceTable<T>> {
    let mu = mean_table::<T>(vertices)?;
    Ok(VarianceTable { recursion: variance_recursion(vertices, &mu), closed_form: variance_closed_form(vertices, &mu) })
}

/// Exact means and variances for one `N`.
#[derive(Debug, Clone, Serialize)]
pub struct MomentTable<T> {
    pub vertices: u64,
    /// `mu[n - 1] = μ_n`
    pub mu: Vec<T>,
    /// `sigma2[n - 1] = σ_n²`
    pub sigma2: Vec<T>,
    pub mode: NumericMode,
}

impl<T: Scalar> MomentTable<T> {
    pub fn compute(vertices: u64) -> Result<Self> {
        let mu = mean_table::<T>(vertices)?;
        let sigma2 = variance_closed_form(vertices, &mu);
        Ok(Self { vertices, mu, sigma2, mode: T::MODE })
    }

    pub fn mean(&self, n: u64) -> &T {
        &self.mu[(n - 1) as usize]
    }

    pub fn variance(&self, n: u64) -> &T {
        &self.sigma2[(n - 1) as usize]
    }
}

impl MomentTable<f64> {
    /// The float table with `μ` taken from the closed form rather than the
    /// recursion (they agree to ~1e-12; this is the more accurate one).
    pub fn float(vertices: u64) -> Result<Self> {
        check_hour(vertices, 1)?;
        let mu = mean_edges_all(vertices);
        let sigma2 = variance_closed_form(vertices, &mu);
        Ok(Self { vertices, mu, sigma2, mode: NumericMode::CompensatedFloat })
    }
}

/// `E[(C(n,2) - X_n)²]`, the second moment of the number of virtual edges,
/// with the bivariate sum accumulated by prefix sums in `O(n)`.
pub fn second_moment_virtual<T: Scalar>(vertices: u64, n: u64) -> Result<T> {
    check_hour(vertices, n)?;
    let big = vertices as i64;
    let front = int::<T>((vertices - n + 1) * (vertices - n + 2));
    let same_origin = T::sum((1..=n as i64).map(|i| T::ratio((i - 1) * (i - 2), (big - i + 1) * (big - i + 2))));
    let mut prefix = T::zero();
    let mut cross_terms = Vec::with_capacity(n as usize);
    for j in 1..=n as i64 {
        cross_terms.push(prefix.clone() * T::ratio(j - 1, big - j + 2));
        prefix = prefix + T::ratio(j - 1, big - j + 1);
    }
    let cross = T::sum(cross_terms);
    let expected_virtual = int::<T>(binom2(n)) - mean_edges::<T>(vertices, n)?;
    Ok(expected_virtual + front.clone() * same_origin + int::<T>(2) * front * cross)
}

/// Predictable compensator `C_n = Σ_{j<n} (C(j,2) - X_j)/(N-j+1)` of a path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompensatorSeries {
    /// `c[n - 1] = C_n`
    pub c: Vec<f64>,
}

impl CompensatorSeries {
    pub fn at(&self, n: u64) -> f64 {
        self.c[(n - 1) as usize]
    }
}

pub fn compensator(traj: &Trajectory) -> CompensatorSeries {
    let vertices = traj.params.vertices();
    let mut acc = CompensatedSum::new();
    let mut c = Vec::with_capacity(vertices as usize);
    c.push(0.0);
    for j in 1..vertices {
        acc += (binom2(j) - traj.at(j)) as f64 / (vertices - j + 1) as f64;
        c.push(acc.value());
    }
    CompensatorSeries { c }
}

/// `P[ξ_N > n] = Π_{j=2}^{n-1} (N-j)/(C(j,2)+N-j)`, summed in log space.
pub fn first_edge_survival(vertices: u64, n: u64) -> Result<f64> {
    check_hour(vertices, n)?;
    let mut log_s = CompensatedSum::new();
    for j in 2..n {
        let edges = binom2(j) as f64;
        log_s += (-edges / (edges + (vertices - j) as f64)).ln_1p();
    }
    Ok(log_s.value().exp())
}

/// `E[ΔX_{N+1}] = N(h_N - 1)`.
pub fn last_stage_mean(vertices: u64) -> Result<f64> {
    check_hour(vertices, vertices)?;
    let tail: CompensatedSum = (2..=vertices).rev().map(|k| 1.0 / k as f64).collect();
    Ok(vertices as f64 * tail.value())
}

/// Conditional mean and variance of an increment drawn from `M` balls with
/// `K` white.
pub fn conditional_increment_moments(total: u64, white: u64) -> Result<(f64, f64)> {
    if white == 0 {
        return Err(Error::NoWhiteBalls { m: total });
    }
    let d = NegHypergeometric::new(total, white)?;
    Ok((d.mean(), d.variance()))
}

/// Upper bound `5 (N-n+2) N² log²(N/(N-n+1))` on `σ_n²` for `n > N/2`.
pub fn variance_upper_bound(vertices: u64, n: u64) -> f64 {
    let big = vertices as f64;
    let l = (big / (vertices - n + 1) as f64).ln();
    5.0 * (vertices - n + 2) as f64 * big * big * l * l
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExactOracle, ModelParams};
    use crate::model::{pmf_mean, pmf_variance};
    use num_rational::BigRational;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::ratio(a, b)
    }

    /// First form of the mean: `Σ_j (j-1)(n-j)/(N-j+1)`, straight from the
    /// edge probabilities.
    fn mean_by_edges(vertices: u64, n: u64) -> BigRational {
        (1..n as i64).map(|j| q((j - 1) * (n as i64 - j), vertices as i64 - j + 1)).sum()
    }

    #[test]
    fn mean_examples() {
        assert_eq!(mean_edges::<BigRational>(3, 3).unwrap(), q(1, 2));
        assert_eq!(mean_edges::<BigRational>(4, 4).unwrap(), q(5, 3));
        assert_eq!(mean_edges::<BigRational>(9, 2).unwrap(), q(0, 1));
        assert!((mean_edges::<f64>(4, 4).unwrap() - 5.0 / 3.0).abs() < 1e-14);
        assert!(mean_edges::<f64>(4, 5).is_err());
        for big in 2..15 {
            for n in 1..=big {
                assert_eq!(mean_edges::<BigRational>(big, n).unwrap(), mean_by_edges(big, n));
            }
        }
    }

    #[test]
    fn mean_table_examples() {
        assert_eq!(mean_table::<BigRational>(3).unwrap(), vec![q(0, 1), q(0, 1), q(1, 2)]);
        assert_eq!(mean_table::<f64>(2).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn mean_table_vs_closed_form_n1000() {
        let rec = mean_table::<f64>(1000).unwrap();
        let closed = mean_edges_all(1000);
        let gap = rec
            .iter()
            .zip(&closed)
            .skip(2)
            .map(|(a, b)| (a - b).abs() / b.abs())
            .fold(0.0, f64::max);
        assert!(gap < 1e-9, "gap {gap}");
        for n in [3, 17, 500, 1000] {
            let one = mean_edges::<f64>(1000, n).unwrap();
            assert!((one - closed[n as usize - 1]).abs() <= 1e-12 * one.abs());
        }
    }

    #[test]
    fn mean_diff_examples() {
        assert_eq!(mean_diff::<BigRational>(3, 2).unwrap(), q(1, 2));
        assert_eq!(mean_diff::<BigRational>(7, 1).unwrap(), q(0, 1));
        let mu = mean_table::<BigRational>(10).unwrap();
        assert_eq!(mean_diff::<BigRational>(10, 9).unwrap(), mu[9].clone() - mu[8].clone());
        assert!(mean_diff::<f64>(10, 10).is_err());
    }

    #[test]
    fn second_difference_examples() {
        assert_eq!(second_difference_mean(30, 15).unwrap(), 14.0 / 16.0);
        assert_eq!(second_difference_mean(9, 2).unwrap(), 1.0 / 8.0);
        let mu = mean_table::<f64>(10).unwrap();
        let d2 = mu[5] - 2.0 * mu[4] + mu[3];
        assert!((second_difference_mean(10, 5).unwrap() - d2).abs() < 1e-12);
        assert!(second_difference_mean(10, 1).is_err());
    }

    #[test]
    fn variance_examples() {
        let v = variance_table::<BigRational>(3).unwrap();
        assert_eq!(v.closed_form[2], q(1, 4));
        assert_eq!(v.recursion, v.closed_form);
        let v = variance_table::<BigRational>(2).unwrap();
        assert!(v.closed_form.iter().all(|s| *s == q(0, 1)));
    }

    #[test]
    fn variance_matches_oracle_n8() {
        let params = ModelParams::new(8).unwrap();
        let marg: Vec<Vec<BigRational>> = ExactOracle::default().marginals(&params).unwrap();
        let v = variance_table::<BigRational>(8).unwrap();
        for (n, pmf) in marg.iter().enumerate().take(8) {
            assert_eq!(pmf_variance(pmf), v.closed_form[n]);
            assert_eq!(pmf_variance(pmf), v.recursion[n]);
        }
        assert_eq!(pmf_mean(&marg[4]), mean_edges::<BigRational>(8, 5).unwrap());
    }

    #[test]
    fn float_variance_routes_agree() {
        for big in [50, 1000, 20_000] {
            let v = variance_table::<f64>(big).unwrap();
            assert!(v.max_relative_gap() < 1e-9, "N={big}: {}", v.max_relative_gap());
            assert!(v.closed_form.iter().all(|s| *s >= 0.0));
        }
    }

    #[test]
    fn second_moment_examples() {
        assert_eq!(second_moment_virtual::<BigRational>(3, 3).unwrap(), q(13, 2));
        assert_eq!(second_moment_virtual::<BigRational>(7, 1).unwrap(), q(0, 1));
        let sm = second_moment_virtual::<f64>(8, 6).unwrap();
        let mu = mean_edges::<f64>(8, 6).unwrap();
        let s2 = variance_table::<f64>(8).unwrap().closed_form[5];
        assert!((s2 - (sm - (15.0 - mu).powi(2))).abs() < 1e-9);
    }

    #[test]
    fn second_moment_matches_oracle() {
        for big in 2..=9u64 {
            let params = ModelParams::new(big).unwrap();
            let marg: Vec<Vec<BigRational>> = ExactOracle::default().marginals(&params).unwrap();
            for n in 1..=big {
                let c = binom2(n) as i64;
                let want: BigRational = marg[(n - 1) as usize]
                    .iter()
                    .enumerate()
                    .map(|(k, p)| p * BigRational::from_i64((c - k as i64).pow(2)))
                    .sum();
                assert_eq!(second_moment_virtual::<BigRational>(big, n).unwrap(), want, "N={big} n={n}");
            }
        }
    }

    #[test]
    fn survival_examples() {
        assert!((first_edge_survival(10, 3).unwrap() - 8.0 / 9.0).abs() < 1e-15);
        assert!((first_edge_survival(10, 4).unwrap() - 28.0 / 45.0).abs() < 1e-12);
        assert_eq!(first_edge_survival(10, 2).unwrap(), 1.0);
        assert_eq!(first_edge_survival(10, 1).unwrap(), 1.0);
    }

    #[test]
    fn survival_matches_oracle() {
        let params = ModelParams::new(9).unwrap();
        let marg: Vec<Vec<f64>> = ExactOracle::default().marginals(&params).unwrap();
        for n in 1..=9u64 {
            let p0 = marg[(n - 1) as usize][0];
            assert!((first_edge_survival(9, n).unwrap() - p0).abs() < 1e-13);
        }
    }

    #[test]
    fn last_stage_examples() {
        assert!((last_stage_mean(3).unwrap() - 2.5).abs() < 1e-14);
        assert!((last_stage_mean(2).unwrap() - 1.0).abs() < 1e-15);
        assert!((last_stage_mean(4).unwrap() - 13.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn conditional_moments() {
        let (m, v) = conditional_increment_moments(3, 1).unwrap();
        assert!((m - 1.0).abs() < 1e-15 && (v - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(conditional_increment_moments(6, 6).unwrap(), (0.0, 0.0));
        assert!(conditional_increment_moments(6, 0).is_err());
    }

    #[test]
    fn compensator_starts_at_zero_and_grows() {
        let params = ModelParams::new(60).unwrap();
        let t = crate::model::simulate_urn(&params, crate::model::SeedSpec::new(2, 2));
        let c = compensator(&t);
        assert_eq!(c.at(1), 0.0);
        assert!(c.c.windows(2).all(|w| w[1] >= w[0]));
    }
}
