//! Deterministic limit curves: `φ` for the scaled mean, `ψ` for the scaled
//! variance, and the covariance kernel of the limiting fluctuation process.

use super::quad::adaptive_simpson;
use crate::error::{Error, Result};

const QUAD_TOL: f64 = 1e-10;
/// Upper integration limits are kept this far below 1.
const ENDPOINT_GAP: f64 = 1e-12;

fn check_unit(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfDomain(format!("t = {t} outside [0, 1]")));
    }
    Ok(())
}

fn log1m(t: f64) -> f64 {
    (-t).ln_1p()
}

/// `φ(t) = 2(1-t)L + 2t - t²` with `L = log(1-t)`; `φ(1) = 1`.
pub fn phi(t: f64) -> Result<f64> {
    check_unit(t)?;
    if t == 1.0 {
        return Ok(1.0);
    }
    Ok(2.0 * (1.0 - t) * log1m(t) + 2.0 * t - t * t)
}

/// `ψ(t) = (1-t){(2-t)L² + 2(3-t)L + t(6-t)}`; `ψ(1) = 0`.
pub fn psi(t: f64) -> Result<f64> {
    check_unit(t)?;
    if t == 1.0 {
        return Ok(0.0);
    }
    let l = log1m(t);
    Ok((1.0 - t) * ((2.0 - t) * l * l + 2.0 * (3.0 - t) * l + t * (6.0 - t)))
}

/// `Cov(Y(s), Y(t)) = (1-t)/(1-s) ψ(s)` for `s <= t`.
pub fn cov_kernel(s: f64, t: f64) -> Result<f64> {
    check_unit(s)?;
    check_unit(t)?;
    if s > t {
        return Err(Error::OutOfDomain(format!("cov_kernel needs s <= t, got s={s}, t={t}")));
    }
    if s == 1.0 {
        return Ok(0.0);
    }
    Ok((1.0 - t) / (1.0 - s) * psi(s)?)
}

/// Diffusion coefficient `t + log(1-t)` of the limit SDE; equals `-φ'(t)/2`.
pub fn diffusion_coefficient(t: f64) -> f64 {
    t + log1m(t)
}

/// Integrand `((s + log(1-s))/(1-s))²` of the single-integral form of `ψ`.
pub fn bridge_integrand(s: f64) -> f64 {
    let g = diffusion_coefficient(s) / (1.0 - s);
    g * g
}

/// `∫_a^b ((s + log(1-s))/(1-s))² ds`, the variance of the martingale part
/// of `Y` accumulated over `[a, b]`.
pub fn bridge_variance_increment(a: f64, b: f64) -> f64 {
    let b = b.min(1.0 - ENDPOINT_GAP);
    if b <= a {
        return 0.0;
    }
    // the integrand grows like s⁴ near 0, so scale the tolerance to the interval
    let tol = QUAD_TOL * (b - a).min(1.0) * b.powi(4).max(1e-20);
    adaptive_simpson(&bridge_integrand, a, b, tol)
}

/// `ψ(t) = (1-t)² ∫_0^t ((s + log(1-s))/(1-s))² ds` by quadrature.
pub fn psi_single_integral(t: f64) -> Result<f64> {
    check_unit(t)?;
    let upper = t.min(1.0 - ENDPOINT_GAP);
    Ok((1.0 - t).powi(2) * adaptive_simpson(&bridge_integrand, 0.0, upper, QUAD_TOL))
}

/// `ψ(t) = 2(1-t) ∬_{0<x<y<t} xy(t-y)/((1-x)(1-y)²) dx dy` by nested quadrature.
pub fn psi_double_integral(t: f64) -> Result<f64> {
    check_unit(t)?;
    let upper = t.min(1.0 - ENDPOINT_GAP);
    let inner = |y: f64| adaptive_simpson(&|x: f64| x / (1.0 - x), 0.0, y, 1e-12);
    let outer = |y: f64| y * (t - y) / (1.0 - y).powi(2) * inner(y);
    Ok(2.0 * (1.0 - t) * adaptive_simpson(&outer, 0.0, upper, QUAD_TOL))
}

/// `φ(t) = 2 ∫_0^t s(t-s)/(1-s) ds` by quadrature.
pub fn phi_integral(t: f64) -> Result<f64> {
    check_unit(t)?;
    let upper = t.min(1.0 - ENDPOINT_GAP);
    Ok(2.0 * adaptive_simpson(&|s: f64| s * (t - s) / (1.0 - s), 0.0, upper, QUAD_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.0).unwrap(), 0.0);
        assert_eq!(phi(1.0).unwrap(), 1.0);
        assert!((phi(0.5).unwrap() - 0.056853).abs() < 1e-6);
        assert!((phi(0.5).unwrap() - phi_integral(0.5).unwrap()).abs() < 1e-10);
        assert!(phi(-0.1).is_err() && phi(1.1).is_err());
        assert!((phi(1.0 - 1e-9).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn psi_values() {
        assert_eq!(psi(0.0).unwrap(), 0.0);
        assert_eq!(psi(1.0).unwrap(), 0.0);
        assert!((psi(0.5).unwrap() - 0.0024718).abs() < 1e-6);
        assert!((psi(0.3).unwrap() - 1.570e-4).abs() < 2e-7);
        assert!(psi(2.0).is_err());
    }

    #[test]
    fn psi_representations_agree() {
        for i in 1..20 {
            let t = i as f64 * 0.05;
            let closed = psi(t).unwrap();
            let single = psi_single_integral(t).unwrap();
            let double = psi_double_integral(t).unwrap();
            assert!((closed - single).abs() < 1e-8, "t={t}: {closed} vs {single}");
            assert!((closed - double).abs() < 1e-6, "t={t}: {closed} vs {double}");
        }
    }

    #[test]
    fn curves_are_monotone_and_nonnegative() {
        let mut prev = 0.0;
        for i in 0..=1000 {
            let t = i as f64 / 1000.0;
            let p = phi(t).unwrap();
            assert!(p >= prev - 1e-15);
            prev = p;
            assert!(psi(t).unwrap() >= -1e-15);
        }
    }

    #[test]
    fn odes_hold_by_finite_differences() {
        let h = 1e-5;
        for i in 1..=9 {
            let t = i as f64 / 10.0;
            let dphi = (phi(t + h).unwrap() - phi(t - h).unwrap()) / (2.0 * h);
            let rhs = (t * t - phi(t).unwrap()) / (1.0 - t);
            assert!((dphi - rhs).abs() < 1e-5, "φ' at {t}");
            let dpsi = (psi(t + h).unwrap() - psi(t - h).unwrap()) / (2.0 * h);
            let rhs = -2.0 * psi(t).unwrap() / (1.0 - t) + rhs * rhs / 4.0;
            assert!((dpsi - rhs).abs() < 1e-5, "ψ' at {t}");
        }
    }

    #[test]
    fn covariance_examples() {
        assert_eq!(cov_kernel(0.3, 0.3).unwrap(), psi(0.3).unwrap());
        assert_eq!(cov_kernel(0.3, 1.0).unwrap(), 0.0);
        let c = cov_kernel(0.3, 0.6).unwrap();
        assert!((c - 8.97e-5).abs() < 1e-7, "{c}");
        assert!(cov_kernel(0.6, 0.3).is_err());
    }

    #[test]
    fn variance_increments_add_up() {
        let total = bridge_variance_increment(0.0, 0.7);
        let parts = bridge_variance_increment(0.0, 0.2) + bridge_variance_increment(0.2, 0.7);
        assert!((total - parts).abs() < 1e-12);
        assert!((total * 0.3 * 0.3 - psi(0.7).unwrap()).abs() < 1e-10);
    }
}
