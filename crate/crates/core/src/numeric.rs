//! Numeric plumbing shared by the exact and floating-point code paths.
//!
//! Exact computations run over [`BigRational`]; large-`N` tables run over
//! `f64` with compensated (Neumaier) summation. Both implement [`Scalar`],
//! so the moment formulas are written once.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for CompensatedSum {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Field-like scalar used by the moment formulas.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const MODE: NumericMode;

    fn from_i64(v: i64) -> Self;

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn zero() -> Self {
        Self::from_i64(0)
    }

    fn one() -> Self {
        Self::from_i64(1)
    }

    /// Sum of a sequence; compensated for floats, exact for rationals.
    fn sum<I: IntoIterator<Item = Self>>(iter: I) -> Self {
        iter.into_iter().fold(Self::zero(), |a, b| a + b)
    }

    /// Running sums `[0, a0, a0 + a1, ...]`, one longer than the input.
    fn prefix_sums<I: IntoIterator<Item = Self>>(iter: I) -> Vec<Self> {
        let mut acc = Self::zero();
        let mut out = vec![acc.clone()];
        for v in iter {
            acc = acc + v;
            out.push(acc.clone());
        }
        out
    }

    fn as_f64(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NumericMode {
    Rational,
    CompensatedFloat,
}

impl Scalar for f64 {
    const MODE: NumericMode = NumericMode::CompensatedFloat;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn sum<I: IntoIterator<Item = Self>>(iter: I) -> Self {
        iter.into_iter().collect::<CompensatedSum>().value()
    }

    fn prefix_sums<I: IntoIterator<Item = Self>>(iter: I) -> Vec<Self> {
        let mut acc = CompensatedSum::new();
        let mut out = vec![0.0];
        for v in iter {
            acc += v;
            out.push(acc.value());
        }
        out
    }

    fn as_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    const MODE: NumericMode = NumericMode::Rational;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }

    fn as_f64(&self) -> f64 {
        // numer/denom may individually overflow f64 for large tables
        match (self.numer().to_f64(), self.denom().to_f64()) {
            (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
            _ => {
                let shift = self.denom().bits().saturating_sub(900) as usize;
                let n = (self.numer() >> shift).to_f64().unwrap_or(f64::NAN);
                let d = (self.denom() >> shift).to_f64().unwrap_or(f64::NAN);
                n / d
            }
        }
    }
}

pub fn binom2(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Harmonic number `h_n = 1 + 1/2 + ... + 1/n`, summed from the small end.
pub fn harmonic(n: u64) -> f64 {
    (1..=n).rev().map(|k| 1.0 / k as f64).collect::<CompensatedSum>().value()
}
