//! Exact small-`N` distributions by dynamic programming over the Markov
//! chain `(n, X_n)`, with the negative hypergeometric law as kernel.

use std::collections::BTreeMap;

use super::nhg::NegHypergeometric;
use super::types::{ModelParams, UrnState};
use crate::error::{Error, Result};
use crate::numeric::{binom2, Scalar};

pub const DEFAULT_MARGINAL_CAP: u64 = 12;
pub const DEFAULT_PATH_CAP: u64 = 7;

#[derive(Debug, Clone, Copy)]
pub struct ExactOracle {
    /// Largest `N` accepted for marginal laws.
    pub marginal_cap: u64,
    /// Largest `N` accepted for whole-path laws.
    pub path_cap: u64,
}

impl Default for ExactOracle {
    fn default() -> Self {
        Self { marginal_cap: DEFAULT_MARGINAL_CAP, path_cap: DEFAULT_PATH_CAP }
    }
}

/// Law of `ΔX_{n+1}` given `X_n = k`.
pub fn transition_pmf<T: Scalar>(params: &ModelParams, n: u64, k: u64) -> Result<Vec<T>> {
    if n == 0 || n >= params.vertices() || k > binom2(n) {
        return Err(Error::OutOfDomain(format!("no transition from (n, k) = ({n}, {k})")));
    }
    let urn = UrnState::at_hour(params, n, k);
    Ok(NegHypergeometric::new(urn.total, urn.white)?.pmf_table_in())
}

impl ExactOracle {
    fn check_cap(&self, params: &ModelParams, cap: u64) -> Result<()> {
        if params.vertices() > cap {
            return Err(Error::CapExceeded { what: "N for the exact oracle", value: params.vertices(), cap });
        }
        Ok(())
    }

    /// Marginal pmf of `X_1, ..., X_N`, entry `n - 1` indexed by `k`.
    pub fn marginals<T: Scalar>(&self, params: &ModelParams) -> Result<Vec<Vec<T>>> {
        self.check_cap(params, self.marginal_cap)?;
        let n_max = params.vertices();
        let mut out = vec![vec![T::one()]];
        for n in 1..n_max {
            let cur = &out[(n - 1) as usize];
            let mut next = vec![T::zero(); binom2(n + 1) as usize + 1];
            for (k, pk) in cur.iter().enumerate() {
                if *pk == T::zero() {
                    continue;
                }
                for (ell, q) in transition_pmf::<T>(params, n, k as u64)?.into_iter().enumerate() {
                    let slot = &mut next[k + ell];
                    *slot = slot.clone() + pk.clone() * q;
                }
            }
            out.push(next);
        }
        Ok(out)
    }

    /// Pmf of `X_n` over `0..=C(n,2)`.
    pub fn distribution<T: Scalar>(&self, params: &ModelParams, n: u64) -> Result<Vec<T>> {
        if n == 0 || n > params.vertices() {
            return Err(Error::OutOfDomain(format!("hour {n} outside 1..={}", params.vertices())));
        }
        let mut all = self.marginals(params)?;
        Ok(all.swap_remove((n - 1) as usize))
    }

    /// Law of the whole path `(X_1, ..., X_N)`; `ΔX_{N+1}` is determined.
    pub fn paths<T: Scalar>(&self, params: &ModelParams) -> Result<BTreeMap<Vec<u64>, T>> {
        self.check_cap(params, self.path_cap)?;
        let mut layer: BTreeMap<Vec<u64>, T> = BTreeMap::new();
        layer.insert(vec![0], T::one());
        for n in 1..params.vertices() {
            let mut next = BTreeMap::new();
            for (path, prob) in layer {
                let k = *path.last().unwrap();
                for (ell, q) in transition_pmf::<T>(params, n, k)?.into_iter().enumerate() {
                    let mut extended = path.clone();
                    extended.push(k + ell as u64);
                    next.insert(extended, prob.clone() * q);
                }
            }
            layer = next;
        }
        Ok(layer)
    }
}

/// Pmf of `X_n` with the default cap.
pub fn exact_distribution<T: Scalar>(params: &ModelParams, n: u64) -> Result<Vec<T>> {
    ExactOracle::default().distribution(params, n)
}

pub fn pmf_mean<T: Scalar>(pmf: &[T]) -> T {
    T::sum(pmf.iter().enumerate().map(|(k, p)| p.clone() * T::from_i64(k as i64)))
}

pub fn pmf_variance<T: Scalar>(pmf: &[T]) -> T {
    let mean = pmf_mean(pmf);
    let second = T::sum(pmf.iter().enumerate().map(|(k, p)| p.clone() * T::from_i64((k * k) as i64)));
    second - mean.clone() * mean
}
