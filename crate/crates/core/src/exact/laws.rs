use statrs::function::factorial::ln_binomial;

use super::pmf::Pmf;
use crate::chain::MutationKind;
use crate::error::{Error, Result};

/// Largest `n` accepted by the binomial-mixture engine.
pub const MIXTURE_MAX_N: usize = 64;

/// Largest truncation point any exact engine will allocate.
pub const T_MAX_LIMIT: usize = 1 << 24;

/// Default bound on the truncated tail when `t_max` is chosen automatically.
const TAIL_TARGET: f64 = 1e-13;

/// Per-level jump probabilities `p(n, i) = 1/n` under one flip.
pub fn oneflip_level_probs(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// Per-level jump probabilities `p(n, i) = eps (1 - eps)^i`, `eps = c/n`.
pub fn bernoulli_level_probs(n: usize, c: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidConfig("n must be at least 1".into()));
    }
    let mutation = MutationKind::Bernoulli { c };
    mutation.validate(n)?;
    Ok((0..n).map(|i| mutation.jump_probability(n, i)).collect())
}

/// Smallest `t` for which the Chernoff bound on `P(T > t)` for
/// `T = sum_i B_i G(p_i)` (fair coins `B_i`) is below `tail`.
///
/// The bound is `min_λ exp(K(λ) - λ t)` with cumulant generating function
/// `K(λ) = sum_i ln(1/2 + 1/2 φ_i(λ))`, `φ_i(λ) = p e^λ / (1 - (1-p) e^λ)`.
/// `(K(λ) + ln(1/tail)) / λ` is unimodal in λ, so a golden-section search on
/// `ln λ` finds the minimum. Levels with `p = 0` are never left and carry
/// mass to infinity regardless of `t`; they are ignored here.
pub fn suggested_t_max(level_probs: &[f64], tail: f64) -> usize {
    let probs: Vec<f64> = level_probs.iter().copied().filter(|&p| p > 0.0).collect();
    if probs.iter().all(|&p| p >= 1.0) {
        return probs.len();
    }
    let lambda_max = probs
        .iter()
        .filter(|&&p| p < 1.0)
        .map(|&p| -(-p).ln_1p())
        .fold(f64::INFINITY, f64::min)
        .min(60.0);
    let a = -tail.ln();
    let objective = |log_lambda: f64| -> f64 {
        let lambda = log_lambda.exp();
        let el = lambda.exp();
        let mut k = 0.0;
        for &p in &probs {
            let denom = 1.0 - (1.0 - p) * el;
            if denom <= 0.0 {
                return f64::INFINITY;
            }
            k += (0.5 + 0.5 * p * el / denom).ln();
        }
        (k + a) / lambda
    };
    let (mut lo, mut hi) = ((lambda_max * 1e-9).ln(), (lambda_max * (1.0 - 1e-12)).ln());
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if objective(x1) < objective(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let best = objective(0.5 * (lo + hi));
    if best.is_finite() {
        best.ceil().max(0.0) as usize
    } else {
        usize::MAX
    }
}

fn resolve_t_max(t_max: Option<usize>, probs: &[f64], engine: &'static str) -> Result<usize> {
    let t = t_max.unwrap_or_else(|| suggested_t_max(probs, TAIL_TARGET));
    if t > T_MAX_LIMIT {
        return Err(Error::EngineLimit {
            engine,
            detail: format!("t_max = {t} exceeds {T_MAX_LIMIT}"),
        });
    }
    Ok(t)
}

/// Law of `sum_i B_i G(p_i)` with independent fair coins `B_i`, by
/// sequentially convolving `1/2 δ_0 + 1/2 G(p_i)` on `0..=t_max`.
///
/// Convolution with `G(p)` uses the recurrence
/// `A(t) = p f(t-1) + (1-p) A(t-1)`, so each level costs `O(t_max)`.
pub fn independent_levels_pmf(level_probs: &[f64], t_max: usize) -> Result<Pmf> {
    if let Some(p) = level_probs.iter().find(|p| !(**p >= 0.0 && **p <= 1.0)) {
        return Err(Error::OutOfRange(format!("level probability {p} outside [0, 1]")));
    }
    let mut f = vec![0.0; t_max + 1];
    f[0] = 1.0;
    let mut next = vec![0.0; t_max + 1];
    for &p in level_probs {
        let q = 1.0 - p;
        let mut acc = 0.0;
        next[0] = 0.5 * f[0];
        for t in 1..=t_max {
            acc = p * f[t - 1] + q * acc;
            next[t] = 0.5 * (f[t] + acc);
        }
        std::mem::swap(&mut f, &mut next);
    }
    Pmf::with_residual_tail(f)
}

/// One-flip hitting-time law from a uniform start:
/// `2^-n sum_k C(n, k) NB(k, 1/n)(t)`.
///
/// Each negative binomial is generated by the ratio recurrence
/// `NB(k, t+1) = NB(k, t) * t / (t - k + 1) * (1 - p)` from its first atom
/// `C(n, k) 2^-n p^k`, which is formed in log space.
pub fn oneflip_exact_pmf(n: usize, t_max: Option<usize>) -> Result<Pmf> {
    if n == 0 {
        return Err(Error::InvalidConfig("n must be at least 1".into()));
    }
    if n > MIXTURE_MAX_N {
        return Err(Error::EngineLimit {
            engine: "one-flip mixture",
            detail: format!("n = {n} exceeds {MIXTURE_MAX_N}"),
        });
    }
    let t_max = resolve_t_max(t_max, &oneflip_level_probs(n), "one-flip mixture")?;
    let p = 1.0 / n as f64;
    let q = 1.0 - p;
    let mut mass = vec![0.0; t_max + 1];
    let ln_half_n = -(n as f64) * std::f64::consts::LN_2;
    mass[0] = ln_half_n.exp();
    for k in 1..=n {
        if k > t_max {
            break;
        }
        let ln_first = ln_binomial(n as u64, k as u64) + ln_half_n + k as f64 * p.ln();
        let mut term = ln_first.exp();
        mass[k] += term;
        for t in k..t_max {
            term *= t as f64 / (t - k + 1) as f64 * q;
            mass[t + 1] += term;
        }
    }
    Pmf::with_residual_tail(mass)
}

/// Bernoulli-flip hitting-time law from a uniform start.
///
/// Every increasing level sequence corresponds to the subset of levels it
/// visits and each subset has probability `2^-n`, so the law is that of
/// independent per-level contributions `B_i G(p(n, i))`.
pub fn bernoulli_exact_pmf(n: usize, c: f64, t_max: Option<usize>) -> Result<Pmf> {
    let probs = bernoulli_level_probs(n, c)?;
    let t_max = resolve_t_max(t_max, &probs, "Bernoulli product")?;
    independent_levels_pmf(&probs, t_max)
}

/// Law of the next LeadingOnes level after a jump from level `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelLaw {
    n: usize,
    rows: Vec<Vec<f64>>,
}

impl LevelLaw {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `P(next = j | current = i)`; zero unless `i < j <= n`.
    pub fn prob(&self, i: usize, j: usize) -> f64 {
        if i >= self.n || j <= i || j > self.n {
            return 0.0;
        }
        self.rows[i][j - i - 1]
    }

    /// Probabilities of `j = i+1..=n`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }
}

/// `2^-(j-i)` for `i < j < n`, `2^-(n-i-1)` for `j = n`.
pub fn level_transition_law(n: usize) -> Result<LevelLaw> {
    if n == 0 {
        return Err(Error::InvalidConfig("n must be at least 1".into()));
    }
    let rows = (0..n)
        .map(|i| {
            (i + 1..=n)
                .map(|j| {
                    let exp = if j < n { j - i } else { n - i - 1 };
                    0.5f64.powi(exp as i32)
                })
                .collect()
        })
        .collect();
    Ok(LevelLaw { n, rows })
}
