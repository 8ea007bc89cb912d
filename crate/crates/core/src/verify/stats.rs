//! Estimators and goodness-of-fit tests used by the checks.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// JSON has no infinities; unbounded statistics are clamped to this.
pub const STATISTIC_CAP: f64 = 1e300;

/// Sample mean, unbiased variance and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
    pub reps: u64,
}

impl McEstimate {
    /// Two-pass estimate; `None` for fewer than two values.
    pub fn from_samples(xs: &[f64]) -> Option<Self> {
        let reps = xs.len();
        if reps < 2 {
            return None;
        }
        let mean = xs.iter().sum::<f64>() / reps as f64;
        let variance = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        Some(Self { mean, variance, stderr: (variance / reps as f64).sqrt(), reps: reps as u64 })
    }

    /// Normal-theory standard error of the sample variance.
    pub fn variance_stderr(&self) -> f64 {
        self.variance * (2.0 / (self.reps - 1) as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestKind {
    #[serde(rename = "KS")]
    Ks,
    #[serde(rename = "chi-square")]
    ChiSquare,
    #[serde(rename = "TV-vs-oracle")]
    TvVsOracle,
    /// Deviation from an exact value in standard errors.
    #[serde(rename = "z-score")]
    ZScore,
    /// Relative or absolute deviation against a fixed tolerance.
    #[serde(rename = "tolerance")]
    Tolerance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    StatisticBelow,
    PValueAbove,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Outcome of one distributional or moment check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub check: String,
    pub test: TestKind,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub sample_size: u64,
    pub rule: Rule,
    pub threshold: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl GofReport {
    pub fn new(check: impl Into<String>, test: TestKind, statistic: f64, p_value: Option<f64>, sample_size: u64) -> Self {
        let statistic = if statistic.is_nan() { STATISTIC_CAP } else { statistic.abs().min(STATISTIC_CAP) };
        Self {
            check: check.into(),
            test,
            statistic,
            p_value: p_value.map(|p| p.clamp(0.0, 1.0)),
            sample_size,
            rule: Rule::StatisticBelow,
            threshold: f64::INFINITY,
            verdict: Verdict::Pass,
            detail: None,
        }
    }

    pub fn with_rule(mut self, rule: Rule, threshold: f64) -> Self {
        self.rule = rule;
        self.threshold = threshold;
        let ok = match rule {
            Rule::StatisticBelow => self.statistic < threshold,
            Rule::PValueAbove => self.p_value.is_some_and(|p| p > threshold),
        };
        self.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// `|observed - expected| / stderr`, compared against `max_z`.
    pub fn z_score(check: impl Into<String>, observed: f64, expected: f64, stderr: f64, n: u64, max_z: f64) -> Self {
        let diff = (observed - expected).abs();
        let z = if diff == 0.0 { 0.0 } else if stderr > 0.0 { diff / stderr } else { STATISTIC_CAP };
        Self::new(check, TestKind::ZScore, z, None, n)
            .with_rule(Rule::StatisticBelow, max_z)
            .with_detail(format!("observed {observed:.6e}, expected {expected:.6e}, stderr {stderr:.3e}"))
    }

    /// `|observed - expected| / |expected|`, compared against `max_rel`.
    pub fn relative(check: impl Into<String>, observed: f64, expected: f64, n: u64, max_rel: f64) -> Self {
        let rel = (observed - expected).abs() / expected.abs();
        Self::new(check, TestKind::Tolerance, rel, None, n)
            .with_rule(Rule::StatisticBelow, max_rel)
            .with_detail(format!("observed {observed:.6e}, expected {expected:.6e}"))
    }

    /// A plain statistic held under a bound.
    pub fn bound(check: impl Into<String>, statistic: f64, n: u64, max: f64) -> Self {
        Self::new(check, TestKind::Tolerance, statistic, None, n).with_rule(Rule::StatisticBelow, max)
    }
}

/// Survival function of the Kolmogorov distribution, `P[K > λ]`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-theta form converges fast for small λ
        let y = (-std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
        let mut s = 0.0;
        let mut k = 1i32;
        loop {
            let term = y.powi(k * k);
            s += term;
            if term < 1e-17 * s || k > 50 {
                break;
            }
            k += 2;
        }
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        for k in 1..=100 {
            let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
            s += if k % 2 == 1 { term } else { -term };
            if term < 1e-17 {
                break;
            }
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// Sup distance between the empirical cdf of `sample` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// One-sample KS test with the asymptotic Kolmogorov p-value (with the
/// usual small-sample correction of the scaling). Default rule: `p > 0.001`.
pub fn ks_test<F: Fn(f64) -> f64>(check: impl Into<String>, sample: &[f64], cdf: F) -> GofReport {
    let d = ks_statistic(sample, cdf);
    let sn = (sample.len() as f64).sqrt();
    let p = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
    GofReport::new(check, TestKind::Ks, d, Some(p), sample.len() as u64).with_rule(Rule::PValueAbove, 1e-3)
}

/// Two-sample KS test.
pub fn ks_two_sample(check: impl Into<String>, a: &[f64], b: &[f64]) -> GofReport {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (na, nb) = (xs.len(), ys.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let v = xs[i].min(ys[j]);
        while i < na && xs[i] <= v {
            i += 1;
        }
        while j < nb && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = ((na * nb) as f64 / (na + nb) as f64).sqrt();
    let p = kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d);
    GofReport::new(check, TestKind::Ks, d, Some(p), (na + nb) as u64).with_rule(Rule::PValueAbove, 1e-3)
}

fn chi_square_p(stat: f64, df: usize) -> Option<f64> {
    if df == 0 {
        return Some(1.0);
    }
    ChiSquared::new(df as f64).ok().map(|d| d.sf(stat))
}

/// Groups consecutive categories until every group reaches `min_expected`
/// (under `expected`); a short tail is folded into the last full group.
fn pool_bins(expected: &[f64], min_expected: f64) -> Vec<(usize, usize)> {
    let mut groups = Vec::new();
    let mut start = 0;
    let mut acc = 0.0;
    for (i, &e) in expected.iter().enumerate() {
        acc += e;
        if acc >= min_expected {
            groups.push((start, i + 1));
            start = i + 1;
            acc = 0.0;
        }
    }
    if start < expected.len() {
        match groups.last_mut() {
            Some(last) => last.1 = expected.len(),
            None => groups.push((start, expected.len())),
        }
    }
    groups
}

/// Pearson goodness of fit of observed category counts against `pmf`, with
/// bins of expected count below 5 pooled. Default rule: `p > 0.001`.
pub fn chi_square(check: impl Into<String>, observed: &[u64], pmf: &[f64]) -> GofReport {
    assert_eq!(observed.len(), pmf.len(), "one count per category");
    let n: u64 = observed.iter().sum();
    let expected: Vec<f64> = pmf.iter().map(|p| p * n as f64).collect();
    let groups = pool_bins(&expected, 5.0);
    let mut stat = 0.0;
    for &(a, b) in &groups {
        let o: u64 = observed[a..b].iter().sum();
        let e: f64 = expected[a..b].iter().sum();
        if e > 0.0 {
            stat += (o as f64 - e).powi(2) / e;
        } else if o > 0 {
            stat = f64::INFINITY;
        }
    }
    let df = groups.len().saturating_sub(1);
    GofReport::new(check, TestKind::ChiSquare, stat, chi_square_p(stat, df), n)
        .with_rule(Rule::PValueAbove, 1e-3)
        .with_detail(format!("{} bins after pooling", groups.len()))
}

/// Chi-square test of a sample of category indices against `pmf`.
pub fn chi_square_sample(check: impl Into<String>, sample: &[usize], pmf: &[f64]) -> GofReport {
    let mut counts = vec![0u64; pmf.len()];
    for &s in sample {
        match counts.get_mut(s) {
            Some(c) => *c += 1,
            None => {
                return GofReport::new(check, TestKind::ChiSquare, STATISTIC_CAP, Some(0.0), sample.len() as u64)
                    .with_rule(Rule::PValueAbove, 1e-3)
                    .with_detail(format!("category {s} outside the support"))
            }
        }
    }
    chi_square(check, &counts, pmf)
}

/// Homogeneity test of two samples given as counts over shared categories.
pub fn chi_square_two_sample(check: impl Into<String>, a: &[u64], b: &[u64]) -> GofReport {
    assert_eq!(a.len(), b.len(), "samples share categories");
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let total = na + nb;
    // the smaller sample's expected count in each category decides pooling
    let weight = na.min(nb) / total;
    let expected: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x + y) as f64 * weight).collect();
    let groups = pool_bins(&expected, 5.0);
    let mut stat = 0.0;
    for &(lo, hi) in &groups {
        let oa: u64 = a[lo..hi].iter().sum();
        let ob: u64 = b[lo..hi].iter().sum();
        let col = (oa + ob) as f64;
        if col == 0.0 {
            continue;
        }
        let (ea, eb) = (col * na / total, col * nb / total);
        stat += (oa as f64 - ea).powi(2) / ea + (ob as f64 - eb).powi(2) / eb;
    }
    let df = groups.len().saturating_sub(1);
    GofReport::new(check, TestKind::ChiSquare, stat, chi_square_p(stat, df), total as u64)
        .with_rule(Rule::PValueAbove, 1e-3)
        .with_detail(format!("{} bins after pooling", groups.len()))
}

/// Total-variation distance between empirical counts and `pmf`.
pub fn tv_distance(observed: &[u64], pmf: &[f64]) -> f64 {
    let n: u64 = observed.iter().sum();
    0.5 * observed.iter().zip(pmf).map(|(&o, &p)| (o as f64 / n as f64 - p).abs()).sum::<f64>()
}

pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (n - 1.0)
}

pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let c = covariance(xs, ys);
    let vx = covariance(xs, xs);
    let vy = covariance(ys, ys);
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    c / (vx * vy).sqrt()
}
