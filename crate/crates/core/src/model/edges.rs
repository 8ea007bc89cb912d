use super::types::{AgedRecentSplit, Trajectory};
use crate::error::{Error, Result};

/// `P[edge i <- j is in G_n] = (n - j) / (N - j + 1)`, `1 <= i < j <= n <= N`.
pub fn edge_probability(vertices: u64, n: u64, i: u64, j: u64) -> Result<f64> {
    if !(1 <= i && i < j && j <= n && n <= vertices) {
        return Err(Error::OutOfDomain(format!(
            "need 1 <= i < j <= n <= N, got i={i}, j={j}, n={n}, N={vertices}"
        )));
    }
    Ok((n - j) as f64 / (vertices - j + 1) as f64)
}

/// Splits `X_n - X_m` into aged edges (target `j <= m`, occupied in hours
/// `m..n`) and recent edges (target `m < j <= n`, occupied by hour `n`).
pub fn split_aged_recent(traj: &Trajectory, m: u64, n: u64) -> Result<AgedRecentSplit> {
    let events = traj.edge_times.as_ref().ok_or(Error::MissingEdgeTimes)?;
    if !(1 <= m && m < n && n <= traj.params.vertices()) {
        return Err(Error::OutOfDomain(format!("need 1 <= m < n <= N, got m={m}, n={n}")));
    }
    let mut aged = 0;
    let mut recent = 0;
    for e in events {
        let hour = e.hour as u64;
        if hour < m || hour >= n {
            continue;
        }
        if (e.target as u64) <= m {
            aged += 1;
        } else {
            recent += 1;
        }
    }
    Ok(AgedRecentSplit { m, n, aged, recent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{simulate_pool, simulate_urn, ModelParams, SeedSpec};
    use crate::numeric::binom2;

    #[test]
    fn edge_probability_values() {
        assert!((edge_probability(10, 5, 1, 2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(edge_probability(10, 7, 3, 7).unwrap(), 0.0);
        assert!(edge_probability(10, 5, 2, 2).is_err());
        assert!(edge_probability(10, 11, 1, 2).is_err());
    }

    #[test]
    fn split_identity_on_every_path() {
        let params = ModelParams::new(30).unwrap();
        for r in 0..50 {
            let t = simulate_pool(&params, SeedSpec::new(21, r), true).unwrap();
            for (m, n) in [(1, 2), (10, 11), (10, 20), (29, 30), (5, 30)] {
                let s = split_aged_recent(&t, m, n).unwrap();
                assert_eq!(s.aged + s.recent, t.at(n) - t.at(m));
                assert!(s.aged <= binom2(m) - t.at(m));
            }
        }
    }

    #[test]
    fn split_needs_edge_times() {
        let params = ModelParams::new(5).unwrap();
        let t = simulate_urn(&params, SeedSpec::new(0, 0));
        assert_eq!(split_aged_recent(&t, 2, 3), Err(Error::MissingEdgeTimes));
    }
}
