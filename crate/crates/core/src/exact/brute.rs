//! Transition-matrix oracle over all `2^n` states.
//!
//! State `s` encodes position `k` (0-based, leftmost first) in bit `k`, so the
//! LeadingOnes value is `s.trailing_ones()` and the optimum is `2^n - 1`.

use super::pmf::Pmf;
use crate::chain::{ChainConfig, MutationKind};
use crate::error::{Error, Result};

pub const BRUTE_FORCE_MAX_N: usize = 12;

/// Sparse row-stochastic one-step matrix of a chain.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    n: usize,
    rows: Vec<Vec<(u32, f64)>>,
}

fn level(state: u32, n: usize) -> usize {
    (state.trailing_ones() as usize).min(n)
}

impl TransitionMatrix {
    pub fn build(config: &ChainConfig) -> Result<Self> {
        let n = config.n;
        if n == 0 || n > BRUTE_FORCE_MAX_N {
            return Err(Error::EngineLimit {
                engine: "transition matrix",
                detail: format!("n = {n} outside 1..={BRUTE_FORCE_MAX_N}"),
            });
        }
        config.mutation.validate(n)?;
        let states = 1usize << n;
        let masks = mutation_masks(n, &config.mutation);
        let mut dense = vec![0.0f64; states];
        let mut rows = Vec::with_capacity(states);
        for s in 0..states as u32 {
            let from = level(s, n);
            for &(mask, p) in &masks {
                let cand = s ^ mask;
                let target = if config.selection.accepts(from, level(cand, n)) {
                    cand
                } else {
                    s
                };
                dense[target as usize] += p;
            }
            let mut row = Vec::new();
            for (t, v) in dense.iter_mut().enumerate() {
                if *v != 0.0 {
                    row.push((t as u32, *v));
                    *v = 0.0;
                }
            }
            rows.push(row);
        }
        Ok(TransitionMatrix { n, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn states(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, state: usize) -> &[(u32, f64)] {
        &self.rows[state]
    }

    pub fn row_sum(&self, state: usize) -> f64 {
        self.rows[state].iter().map(|&(_, p)| p).sum()
    }

    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.rows[from]
            .iter()
            .find(|&&(t, _)| t as usize == to)
            .map_or(0.0, |&(_, p)| p)
    }

    /// Hitting-time law of the optimum from the uniform start. Mass reaching
    /// the optimum is recorded and removed each step; whatever remains after
    /// `t_max` steps is the tail.
    pub fn hitting_pmf(&self, t_max: usize) -> Result<Pmf> {
        let states = self.states();
        self.hitting_pmf_from(&vec![1.0 / states as f64; states], t_max)
    }

    /// Hitting-time law of the optimum from the start distribution `start`
    /// over state codes.
    pub fn hitting_pmf_from(&self, start: &[f64], t_max: usize) -> Result<Pmf> {
        let states = self.states();
        if start.len() != states {
            return Err(Error::LengthMismatch {
                expected: states,
                actual: start.len(),
            });
        }
        let target = states - 1;
        let mut dist = start.to_vec();
        let mut next = vec![0.0; states];
        let mut mass = Vec::with_capacity(t_max + 1);
        mass.push(dist[target]);
        dist[target] = 0.0;
        for _ in 0..t_max {
            next.iter_mut().for_each(|v| *v = 0.0);
            for (s, &w) in dist.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                for &(t, p) in &self.rows[s] {
                    next[t as usize] += w * p;
                }
            }
            mass.push(next[target]);
            next[target] = 0.0;
            std::mem::swap(&mut dist, &mut next);
        }
        let tail = dist.iter().sum::<f64>().max(0.0);
        Pmf::new(mass, tail)
    }
}

/// Every flip mask with positive probability.
fn mutation_masks(n: usize, mutation: &MutationKind) -> Vec<(u32, f64)> {
    match *mutation {
        MutationKind::OneFlip => (0..n).map(|j| (1u32 << j, 1.0 / n as f64)).collect(),
        MutationKind::Bernoulli { c } => {
            let eps = c / n as f64;
            (0..1u32 << n)
                .map(|m| {
                    let k = m.count_ones() as i32;
                    (m, eps.powi(k) * (1.0 - eps).powi(n as i32 - k))
                })
                .filter(|&(_, p)| p > 0.0)
                .collect()
        }
    }
}

/// Exact hitting-time law by evolving the full state distribution.
pub fn brute_force_pmf(config: &ChainConfig, t_max: usize) -> Result<Pmf> {
    TransitionMatrix::build(config)?.hitting_pmf(t_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::SelectionRule;

    fn cfg(n: usize, m: MutationKind, rule: SelectionRule) -> ChainConfig {
        ChainConfig::new(n, m, rule).unwrap()
    }

    #[test]
    fn single_bit_chain() {
        let p = brute_force_pmf(&cfg(1, MutationKind::OneFlip, SelectionRule::Strict), 5).unwrap();
        assert_eq!(p.mass(), &[0.5, 0.5, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(p.tail(), 0.0);
    }

    #[test]
    fn rows_are_stochastic() {
        for rule in [SelectionRule::Strict, SelectionRule::NonStrict] {
            for m in [MutationKind::OneFlip, MutationKind::Bernoulli { c: 1.0 }, MutationKind::Bernoulli { c: 3.0 }] {
                let tm = TransitionMatrix::build(&cfg(3, m, rule)).unwrap();
                for s in 0..tm.states() {
                    assert!((tm.row_sum(s) - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn strict_oneflip_only_moves_up_by_leftmost_zero() {
        let tm = TransitionMatrix::build(&cfg(3, MutationKind::OneFlip, SelectionRule::Strict)).unwrap();
        // state 0b010 = "010": flipping position 0 gives "110" = 0b011.
        assert!((tm.prob(0b010, 0b011) - 1.0 / 3.0).abs() < 1e-15);
        assert!((tm.prob(0b010, 0b010) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(tm.row(0b111), &[(0b111, 1.0)]);
    }

    #[test]
    fn strict_and_nonstrict_agree_small() {
        for m in [MutationKind::OneFlip, MutationKind::Bernoulli { c: 1.0 }] {
            let a = brute_force_pmf(&cfg(3, m, SelectionRule::Strict), 400).unwrap();
            let b = brute_force_pmf(&cfg(3, m, SelectionRule::NonStrict), 400).unwrap();
            assert!(a.total_variation(&b) < 1e-12);
        }
    }

    #[test]
    fn size_limit() {
        assert!(TransitionMatrix::build(&cfg(13, MutationKind::OneFlip, SelectionRule::Strict)).is_err());
    }
}
