//! Negative hypergeometric law: the number of black balls drawn without
//! replacement before the first white one, from `M` balls of which `K` are
//! white. Its pmf is `C(M-ℓ-1, K-1) / C(M, K)` on `0 <= ℓ <= M-K`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::{CompensatedSum, Scalar};

/// How an increment is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NhgMethod {
    /// Draw balls one at a time until a white one comes up. Exact in
    /// integer arithmetic; cost proportional to the value drawn.
    #[default]
    Sequential,
    /// One uniform, walked through the cdf with the pmf ratio recurrence.
    InverseCdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NegHypergeometric {
    total: u64,
    white: u64,
}

impl NegHypergeometric {
    pub fn new(total: u64, white: u64) -> Result<Self> {
        if white > total {
            return Err(Error::OutOfDomain(format!("K = {white} exceeds M = {total}")));
        }
        if white == 0 && total > 0 {
            return Err(Error::NoWhiteBalls { m: total });
        }
        Ok(Self { total, white })
    }

    pub fn black(&self) -> u64 {
        self.total - self.white
    }

    /// `P[ℓ]`, accumulated as a sum of logarithms of the ratio recurrence
    /// `P[ℓ+1] / P[ℓ] = (M-K-ℓ) / (M-ℓ-1)`.
    pub fn pmf(&self, ell: u64) -> f64 {
        let (m, k) = (self.total, self.white);
        if ell > self.black() {
            return 0.0;
        }
        if m == 0 || k == m {
            return 1.0;
        }
        let mut log_p = CompensatedSum::new();
        log_p += (k as f64 / m as f64).ln();
        for i in 0..ell {
            // (M-K-i)/(M-i-1) = 1 - (K-1)/(M-1-i)
            log_p += (-((k - 1) as f64) / (m - 1 - i) as f64).ln_1p();
        }
        log_p.value().exp()
    }

    /// Whole pmf over `0..=M-K`.
    pub fn pmf_table(&self) -> Vec<f64> {
        self.pmf_table_in::<f64>()
    }

    /// Whole pmf in any scalar type; exact over rationals.
    pub fn pmf_table_in<T: Scalar>(&self) -> Vec<T> {
        let (m, k) = (self.total as i64, self.white as i64);
        if m == 0 || k == m {
            return vec![T::one()];
        }
        let black = m - k;
        let mut out = Vec::with_capacity(black as usize + 1);
        let mut p = T::ratio(k, m);
        out.push(p.clone());
        for ell in 0..black {
            p = p * T::ratio(black - ell, m - ell - 1);
            out.push(p.clone());
        }
        out
    }

    pub fn mean(&self) -> f64 {
        self.black() as f64 / (self.white as f64 + 1.0)
    }

    pub fn variance(&self) -> f64 {
        let (m, k) = (self.total as f64, self.white as f64);
        (m + 1.0) * (m - k) * k / ((k + 1.0).powi(2) * (k + 2.0))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, method: NhgMethod) -> u64 {
        match method {
            NhgMethod::Sequential => self.sample_sequential(rng),
            NhgMethod::InverseCdf => self.sample_inverse_cdf(rng),
        }
    }

    pub fn sample_sequential<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let mut remaining = self.total;
        let mut drawn = 0;
        while remaining > self.white {
            if rng.random_range(0..remaining) < self.white {
                break;
            }
            drawn += 1;
            remaining -= 1;
        }
        drawn
    }

    pub fn sample_inverse_cdf<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let (m, k) = (self.total, self.white);
        if m == 0 || k == m {
            return 0;
        }
        let black = m - k;
        let u: f64 = rng.random();
        let mut p = k as f64 / m as f64;
        let mut cdf = p;
        let mut ell = 0;
        while u >= cdf && ell < black {
            p *= (black - ell) as f64 / (m - ell - 1) as f64;
            ell += 1;
            cdf += p;
        }
        ell
    }
}

/// `P[ΔX = ℓ]` for an urn with `M` balls of which `K` are white.
pub fn neg_hypergeom_pmf(total: u64, white: u64, ell: u64) -> Result<f64> {
    Ok(NegHypergeometric::new(total, white)?.pmf(ell))
}

/// One exact draw by sequential without-replacement sampling.
pub fn neg_hypergeom_sample<R: Rng + ?Sized>(total: u64, white: u64, rng: &mut R) -> Result<u64> {
    Ok(NegHypergeometric::new(total, white)?.sample_sequential(rng))
}
