//! Exact hitting-time laws and moments.
//!
//! Both chains decompose along LeadingOnes levels. From a uniform start each
//! level `i in 0..n` is visited independently with probability 1/2, and a
//! visit lasts a geometric number of generations with success probability
//! `p(n, i)`: `1/n` under one flip, `eps (1 - eps)^i` with `eps = c/n` under
//! the Bernoulli flip. The one-flip law is computed as a binomial mixture of
//! negative binomials, the Bernoulli law by convolving the per-level two-point
//! mixtures `1/2 δ_0 + 1/2 G(p(n, i))`.

mod brute;
mod laws;
mod pmf;

pub use brute::{brute_force_pmf, TransitionMatrix, BRUTE_FORCE_MAX_N};
pub use laws::{
    bernoulli_exact_pmf, bernoulli_level_probs, independent_levels_pmf, level_transition_law,
    oneflip_exact_pmf, oneflip_level_probs, suggested_t_max, LevelLaw, MIXTURE_MAX_N, T_MAX_LIMIT,
};
pub use pmf::Pmf;

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::chain::MutationKind;
use crate::error::{Error, Result};

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("probability must lie in (0, 1], got {p}")))
    }
}

/// `p (1 - p)^(t - 1)` for `t >= 1`, zero at `t = 0`.
pub fn geometric_pmf(p: f64, t: u64) -> Result<f64> {
    check_probability(p)?;
    if t == 0 {
        return Ok(0.0);
    }
    Ok(p * (1.0 - p).powf((t - 1) as f64))
}

/// Law of a sum of `k0` independent `G(p)` variables; `k0 = 0` is the point
/// mass at 0.
pub fn negbin_pmf(k0: u64, p: f64, t: u64) -> Result<f64> {
    check_probability(p)?;
    if k0 == 0 {
        return Ok(if t == 0 { 1.0 } else { 0.0 });
    }
    if t < k0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(if t == k0 { 1.0 } else { 0.0 });
    }
    let ln = ln_binomial(t - 1, t - k0) + k0 as f64 * p.ln() + (t - k0) as f64 * (-p).ln_1p();
    Ok(ln.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    pub n: usize,
    pub mutation: MutationKind,
}

/// Exact one-flip moments: mean `n^2/2`, variance `3n^3/4 - n^2/2`.
///
/// The variance follows from total variance over the zero count
/// `k ~ Bin(n, 1/2)` with `T | k ~ NB(k, 1/n)`.
pub fn oneflip_moments(n: usize) -> MomentSummary {
    let nf = n as f64;
    MomentSummary {
        mean: nf * nf / 2.0,
        variance: 0.75 * nf.powi(3) - 0.5 * nf * nf,
        n,
        mutation: MutationKind::OneFlip,
    }
}

fn check_bernoulli(n: usize, c: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidConfig("n must be at least 1".into()));
    }
    MutationKind::Bernoulli { c }.validate(n)
}

/// Exact Bernoulli-flip mean `1/2 * sum_i 1/p(n, i)`.
///
/// Evaluated in closed form `n^2 (1 - eps) ((1 - eps)^-n - 1) / (2 c^2)` for
/// `c < n`; at `c = n` the levels `i >= 1` can never be left, so the mean is
/// infinite unless `n = 1`.
pub fn bernoulli_exact_mean(n: usize, c: f64) -> Result<f64> {
    check_bernoulli(n, c)?;
    let nf = n as f64;
    let eps = c / nf;
    if eps >= 1.0 {
        return Ok(bernoulli_level_probs(n, c)?
            .iter()
            .map(|p| 0.5 / p)
            .sum());
    }
    // (1 - eps)^-n - 1 without cancellation
    let growth = (-nf * (-eps).ln_1p()).exp_m1();
    Ok(nf * nf * (1.0 - eps) * growth / (2.0 * c * c))
}

/// Exact Bernoulli-flip mean and variance. Each visited level contributes
/// `B G` with `B` a fair coin, whose variance is `(3 - 2p) / (4 p^2)`.
pub fn bernoulli_moments(n: usize, c: f64) -> Result<MomentSummary> {
    let probs = bernoulli_level_probs(n, c)?;
    let variance = probs.iter().map(|p| (3.0 - 2.0 * p) / (4.0 * p * p)).sum();
    Ok(MomentSummary {
        mean: bernoulli_exact_mean(n, c)?,
        variance,
        n,
        mutation: MutationKind::Bernoulli { c },
    })
}

pub fn exact_moments(n: usize, mutation: &MutationKind) -> Result<MomentSummary> {
    match *mutation {
        MutationKind::OneFlip if n >= 1 => Ok(oneflip_moments(n)),
        MutationKind::OneFlip => Err(Error::InvalidConfig("n must be at least 1".into())),
        MutationKind::Bernoulli { c } => bernoulli_moments(n, c),
    }
}

/// Asymptotic Bernoulli mean coefficient `m(c) = (e^c - 1) / (2 c^2)`.
pub fn m_of_c(c: f64) -> f64 {
    c.exp_m1() / (2.0 * c * c)
}

/// Asymptotic Bernoulli variance coefficient `3 (e^{2c} - 1) / (8 c^3)`.
pub fn sigma2_of_c(c: f64) -> f64 {
    3.0 * (2.0 * c).exp_m1() / (8.0 * c.powi(3))
}

/// Limit mean and variance coefficients `(E T / n^2, Var T / n^3)`.
pub fn asymptotic_coefficients(mutation: &MutationKind) -> (f64, f64) {
    match *mutation {
        MutationKind::OneFlip => (0.5, 0.75),
        MutationKind::Bernoulli { c } => (m_of_c(c), sigma2_of_c(c)),
    }
}

/// Centered and `n^{3/2}`-scaled hitting time.
pub fn theta_statistic(t: f64, n: usize, mutation: &MutationKind) -> f64 {
    let nf = n as f64;
    let (m, _) = asymptotic_coefficients(mutation);
    (t - m * nf * nf) / nf.powf(1.5)
}
