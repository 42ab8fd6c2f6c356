//! Estimators and goodness-of-fit tests used by the verification suites.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub std_error: f64,
}

impl SummaryStats {
    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Sample mean, unbiased variance and standard error of the mean.
pub fn summarize(samples: &[f64]) -> Result<SummaryStats> {
    let count = samples.len();
    if count < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 samples, got {count}"
        )));
    }
    // Welford
    let (mut mean, mut m2) = (0.0, 0.0);
    for (i, &x) in samples.iter().enumerate() {
        let d = x - mean;
        mean += d / (i + 1) as f64;
        m2 += d * (x - mean);
    }
    let variance = (m2 / (count - 1) as f64).max(0.0);
    Ok(SummaryStats {
        count,
        mean,
        variance,
        std_error: (variance / count as f64).sqrt(),
    })
}

/// Standard normal CDF, `erfc(-z / sqrt 2) / 2`.
pub fn normal_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Upper `level` quantile of the chi-square law with `df` degrees of freedom.
pub fn chi_square_quantile(df: usize, level: f64) -> Result<f64> {
    let dist = ChiSquared::new(df as f64).map_err(|e| Error::OutOfRange(e.to_string()))?;
    Ok(dist.inverse_cdf(level))
}

/// Asymptotic Kolmogorov critical value `sqrt(-ln(alpha/2) / 2)`.
pub fn ks_critical_value(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// Empirical CDF over a sorted sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    values: Vec<f64>,
}

impl Ecdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData("empty sample".into()));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::OutOfRange("NaN in sample".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(Ecdf { values })
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Fraction of the sample `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.count() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: String,
    pub statistic: f64,
    pub threshold: f64,
    pub alpha: Option<f64>,
    pub pass: bool,
    pub n: Option<usize>,
    #[serde(rename = "R")]
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
}

impl TestReport {
    /// Report that passes iff `statistic < threshold`.
    pub fn below(test: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        TestReport {
            test: test.into(),
            statistic,
            threshold,
            alpha: None,
            pass: statistic < threshold,
            n: None,
            replicates: None,
            seed: None,
        }
    }

    /// Report for a boolean property: statistic 1 when it holds.
    pub fn holds(test: impl Into<String>, ok: bool) -> Self {
        TestReport {
            pass: ok,
            ..Self::below(test, if ok { 1.0 } else { 0.0 }, 1.0)
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_replicates(mut self, r: usize) -> Self {
        self.replicates = Some(r);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn named(mut self, test: impl Into<String>) -> Self {
        self.test = test.into();
        self
    }
}

/// Kolmogorov-Smirnov distance to `N(mean, variance)`, checked at both sides
/// of every sample point. Passes iff the distance is below `threshold`.
pub fn ks_one_sample(ecdf: &Ecdf, mean: f64, variance: f64, threshold: f64) -> Result<TestReport> {
    if variance.is_nan() || variance <= 0.0 {
        return Err(Error::OutOfRange(format!("variance must be positive, got {variance}")));
    }
    let sd = variance.sqrt();
    let m = ecdf.count() as f64;
    let d = ecdf
        .values()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf((x - mean) / sd);
            ((i + 1) as f64 / m - f).max(f - i as f64 / m)
        })
        .fold(0.0, f64::max);
    Ok(TestReport::below("ks_one_sample", d, threshold).with_replicates(ecdf.count()))
}

/// Two-sample Kolmogorov-Smirnov test at level `alpha` using the asymptotic
/// critical value `c(alpha) sqrt((m + n) / (m n))`.
pub fn ks_two_sample(a: &Ecdf, b: &Ecdf, alpha: f64) -> TestReport {
    let (xa, xb) = (a.values(), b.values());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let threshold = ks_critical_value(alpha) * ((na + nb) / (na * nb)).sqrt();
    TestReport::below("ks_two_sample", d, threshold)
        .with_alpha(alpha)
        .with_replicates(a.count().min(b.count()))
}

/// Pearson chi-square test of `observed` counts against `expected`
/// probabilities, with `cells - 1` degrees of freedom. Passes iff the
/// statistic is below the `level` quantile.
pub fn chi_square_gof(observed: &[u64], expected: &[f64], level: f64) -> Result<TestReport> {
    if observed.len() != expected.len() {
        return Err(Error::LengthMismatch {
            expected: expected.len(),
            actual: observed.len(),
        });
    }
    if observed.len() < 2 {
        return Err(Error::InsufficientData("chi-square needs at least 2 cells".into()));
    }
    let total_p: f64 = expected.iter().sum();
    if (total_p - 1.0).abs() > 1e-9 {
        return Err(Error::OutOfRange(format!("expected probabilities sum to {total_p}")));
    }
    let total = observed.iter().sum::<u64>() as f64;
    let mut stat = 0.0;
    for (&o, &p) in observed.iter().zip(expected) {
        let e = total * p;
        if e < 5.0 {
            return Err(Error::InsufficientData(format!(
                "expected count {e} below 5; merge cells"
            )));
        }
        stat += (o as f64 - e).powi(2) / e;
    }
    let threshold = chi_square_quantile(observed.len() - 1, level)?;
    Ok(TestReport::below("chi_square_gof", stat, threshold)
        .with_alpha(1.0 - level)
        .with_replicates(total as usize))
}
