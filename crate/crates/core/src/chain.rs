//! The (1+1)-EA and zero-temperature Metropolis chains on LeadingOnes.
//!
//! One generation is a mutation followed by a selection. Mutations are drawn
//! as a sorted set of flip positions, which lets a step decide acceptance from
//! the flip set and the cached level without rescanning the string, except
//! when the leftmost zero is flipped.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitstring::BitString;
use crate::error::{Error, Result};
use crate::exact::m_of_c;
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MutationKind {
    /// Flip exactly one uniformly chosen bit.
    OneFlip,
    /// Flip each bit independently with probability `c / n`.
    Bernoulli { c: f64 },
}

impl MutationKind {
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            MutationKind::OneFlip => Ok(()),
            MutationKind::Bernoulli { c } => {
                if !(c.is_finite() && c > 0.0) {
                    Err(Error::OutOfRange(format!("c must be positive, got {c}")))
                } else if c > n as f64 {
                    Err(Error::OutOfRange(format!(
                        "c = {c} exceeds n = {n}; c/n must be a probability"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Per-bit flip probability: `1/n` for one flip, `c/n` for Bernoulli.
    pub fn epsilon(&self, n: usize) -> f64 {
        match *self {
            MutationKind::OneFlip => 1.0 / n as f64,
            MutationKind::Bernoulli { c } => c / n as f64,
        }
    }

    /// Probability that a step from level `i < n` increases the level.
    pub fn jump_probability(&self, n: usize, level: usize) -> f64 {
        let eps = self.epsilon(n);
        match self {
            MutationKind::OneFlip => eps,
            MutationKind::Bernoulli { .. } => eps * (1.0 - eps).powi(level as i32),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MutationKind::OneFlip => "oneflip",
            MutationKind::Bernoulli { .. } => "bernoulli",
        }
    }

    pub fn c(&self) -> Option<f64> {
        match *self {
            MutationKind::OneFlip => None,
            MutationKind::Bernoulli { c } => Some(c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionRule {
    /// Accept only a strictly fitter candidate (the (1+1)-EA).
    Strict,
    /// Accept a candidate at least as fit (MCM at zero temperature).
    NonStrict,
}

impl SelectionRule {
    #[inline]
    pub fn accepts(self, parent_level: usize, candidate_level: usize) -> bool {
        match self {
            SelectionRule::Strict => candidate_level > parent_level,
            SelectionRule::NonStrict => candidate_level >= parent_level,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SelectionRule::Strict => "strict",
            SelectionRule::NonStrict => "nonstrict",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n: usize,
    pub mutation: MutationKind,
    pub selection: SelectionRule,
    pub max_iters: u64,
}

impl ChainConfig {
    /// Builds a validated config with the default iteration cap
    /// `ceil(100 * n^2 * max(1, m(c)))`.
    pub fn new(n: usize, mutation: MutationKind, selection: SelectionRule) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        mutation.validate(n)?;
        Ok(ChainConfig {
            n,
            mutation,
            selection,
            max_iters: default_max_iters(n, &mutation),
        })
    }

    pub fn with_max_iters(mut self, max_iters: u64) -> Result<Self> {
        if max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        self.max_iters = max_iters;
        Ok(self)
    }
}

pub fn default_max_iters(n: usize, mutation: &MutationKind) -> u64 {
    let scale = match *mutation {
        MutationKind::OneFlip => 1.0,
        MutationKind::Bernoulli { c } => m_of_c(c).max(1.0),
    };
    let cap = (100.0 * (n as f64).powi(2) * scale).ceil();
    if cap >= u64::MAX as f64 {
        u64::MAX
    } else {
        (cap as u64).max(1)
    }
}

/// Current individual, generation counter and cached LeadingOnes level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainState {
    x: BitString,
    t: u64,
    level: usize,
}

impl ChainState {
    pub fn new(x: BitString) -> Self {
        let level = x.leading_ones();
        ChainState { x, t: 0, level }
    }

    pub fn x(&self) -> &BitString {
        &self.x
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn is_optimal(&self) -> bool {
        self.level == self.x.len()
    }

    pub fn into_bits(self) -> BitString {
        self.x
    }
}

pub fn leading_ones(x: &BitString) -> usize {
    x.leading_ones()
}

/// Energy `-eps0 * L(x)`.
pub fn hamiltonian(x: &BitString, eps0: f64) -> f64 {
    -eps0 * x.leading_ones() as f64
}

/// Metropolis acceptance with probability `min(1, exp(-beta * delta_h))`.
///
/// Non-positive `delta_h` is accepted without consuming randomness; at
/// `beta = inf` a positive `delta_h` is rejected deterministically.
pub fn metropolis_accept<R: Rng + ?Sized>(delta_h: f64, beta: f64, rng: &mut R) -> bool {
    if delta_h <= 0.0 {
        return true;
    }
    if beta.is_infinite() {
        return false;
    }
    let p = (-beta * delta_h).exp();
    rng.random::<f64>() < p
}

/// Failures before the first success of probability `p`, by inversion:
/// `P(floor(ln U / ln(1 - p)) >= k) = (1 - p)^k` for `U` uniform on `(0, 1]`.
#[derive(Debug, Clone, Copy)]
struct GapSampler {
    ln_q: f64,
}

impl GapSampler {
    fn new(p: f64) -> Self {
        GapSampler { ln_q: (-p).ln_1p() }
    }

    #[inline]
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u = 1.0 - rng.random::<f64>();
        // saturating cast; u = 1 gives 0
        (u.ln() / self.ln_q) as u64
    }
}

/// Draws flip positions for one mutation.
#[derive(Debug, Clone)]
pub struct Mutator {
    n: usize,
    kind: Sampler,
}

#[derive(Debug, Clone)]
enum Sampler {
    One,
    All,
    Gaps(GapSampler),
}

impl Mutator {
    pub fn new(n: usize, mutation: &MutationKind) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        mutation.validate(n)?;
        let kind = match *mutation {
            MutationKind::OneFlip => Sampler::One,
            MutationKind::Bernoulli { c } => {
                let eps = c / n as f64;
                if eps >= 1.0 {
                    Sampler::All
                } else {
                    Sampler::Gaps(GapSampler::new(eps))
                }
            }
        };
        Ok(Mutator { n, kind })
    }

    /// Fills `flips` with the sorted positions flipped by one mutation.
    ///
    /// Bernoulli positions are generated by geometric gap skipping: the gap to
    /// the next flipped bit is the number of failures before a success of
    /// probability `c/n`, which draws the same law as `n` independent coins.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, flips: &mut Vec<usize>) {
        flips.clear();
        match &self.kind {
            Sampler::One => flips.push(rng.random_range(0..self.n)),
            Sampler::All => flips.extend(0..self.n),
            Sampler::Gaps(gap) => {
                let mut pos = gap.sample(rng);
                while pos < self.n as u64 {
                    flips.push(pos as usize);
                    pos = pos.saturating_add(1).saturating_add(gap.sample(rng));
                }
            }
        }
    }
}

fn apply_flips(x: &BitString, flips: &[usize]) -> BitString {
    let mut y = x.clone();
    for &i in flips {
        y.flip(i);
    }
    y
}

pub fn mutate_one_flip<R: Rng + ?Sized>(x: &BitString, rng: &mut R) -> BitString {
    let mutator = Mutator::new(x.len(), &MutationKind::OneFlip).expect("non-empty string");
    let mut flips = Vec::with_capacity(1);
    mutator.sample(rng, &mut flips);
    apply_flips(x, &flips)
}

pub fn mutate_bernoulli<R: Rng + ?Sized>(x: &BitString, c: f64, rng: &mut R) -> Result<BitString> {
    let mutator = Mutator::new(x.len(), &MutationKind::Bernoulli { c })?;
    let mut flips = Vec::new();
    mutator.sample(rng, &mut flips);
    Ok(apply_flips(x, &flips))
}

/// Returns the individual kept by `rule`: the candidate if accepted, else the parent.
pub fn select(parent: &ChainState, candidate: &BitString, rule: SelectionRule) -> BitString {
    assert_eq!(
        parent.x.len(),
        candidate.len(),
        "candidate length differs from parent"
    );
    if rule.accepts(parent.level, candidate.leading_ones()) {
        candidate.clone()
    } else {
        parent.x.clone()
    }
}

/// Level of `x` with `flips` (sorted, deduplicated) applied, given that `x`
/// has LeadingOnes value `level`. Leaves `x` with the flips applied iff the
/// returned level was computed by rescanning; callers undo via `flips`.
#[inline]
fn candidate_level(x: &mut BitString, level: usize, flips: &[usize]) -> (usize, bool) {
    match flips.first() {
        None => (level, false),
        Some(&first) if first < level => (first, false),
        Some(&first) if first > level => (level, false),
        Some(_) => {
            for &i in flips {
                x.flip(i);
            }
            (x.leading_ones(), true)
        }
    }
}

#[derive(Debug, Default)]
pub(crate) struct StepScratch {
    flips: Vec<usize>,
}

/// One mutation and one selection, mutating `state` in place.
#[inline]
pub(crate) fn step_in_place<R: Rng + ?Sized>(
    state: &mut ChainState,
    mutator: &Mutator,
    rule: SelectionRule,
    rng: &mut R,
    scratch: &mut StepScratch,
) {
    if let (SelectionRule::Strict, Sampler::Gaps(gap)) = (rule, &mutator.kind) {
        // Only a first flip exactly at the level can be accepted, and it always
        // is; otherwise the later gaps never matter.
        let mut pos = gap.sample(rng);
        if pos == state.level as u64 {
            while pos < mutator.n as u64 {
                state.x.flip(pos as usize);
                pos = pos.saturating_add(1).saturating_add(gap.sample(rng));
            }
            state.level += state.x.ones_run_from(state.level);
        }
        state.t += 1;
        debug_assert_eq!(state.level, state.x.leading_ones());
        return;
    }
    mutator.sample(rng, &mut scratch.flips);
    let (new_level, applied) = candidate_level(&mut state.x, state.level, &scratch.flips);
    let accept = rule.accepts(state.level, new_level);
    match (accept, applied) {
        (true, true) => state.level = new_level,
        (true, false) => {
            for &i in &scratch.flips {
                state.x.flip(i);
            }
            state.level = new_level;
        }
        (false, true) => {
            for &i in &scratch.flips {
                state.x.flip(i);
            }
        }
        (false, false) => {}
    }
    state.t += 1;
    debug_assert_eq!(state.level, state.x.leading_ones());
}

/// Applies the configured mutation then selection.
pub fn step<R: Rng + ?Sized>(mut state: ChainState, config: &ChainConfig, rng: &mut R) -> ChainState {
    let mutator = Mutator::new(config.n, &config.mutation).expect("validated config");
    let mut scratch = StepScratch::default();
    step_in_place(&mut state, &mutator, config.selection, rng, &mut scratch);
    state
}

/// Starting point of a run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Initial {
    /// Uniform draw from `{0,1}^n` using the run's stream.
    #[default]
    Uniform,
    Fixed(BitString),
}

impl Initial {
    pub fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<BitString> {
        match self {
            Initial::Uniform => Ok(BitString::random(n, rng)),
            Initial::Fixed(x) if x.len() == n => Ok(x.clone()),
            Initial::Fixed(x) => Err(Error::LengthMismatch {
                expected: n,
                actual: x.len(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HittingTime {
    Hit(u64),
    /// The optimum was not reached within `max_iters` generations.
    Capped,
}

impl HittingTime {
    pub fn value(self) -> Option<u64> {
        match self {
            HittingTime::Hit(t) => Some(t),
            HittingTime::Capped => None,
        }
    }

    pub fn is_capped(self) -> bool {
        matches!(self, HittingTime::Capped)
    }
}

/// Result of one run from `X_0` to the all-ones string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub hitting_time: HittingTime,
    /// LeadingOnes value of `X_0`.
    pub initial_level: usize,
    /// Number of zeros in `X_0`.
    pub initial_zeros: usize,
    pub seed: u64,
}

/// Runs until `L(X_k) = n`, counting generations from `X_0` at time 0.
pub fn run_to_optimum(config: &ChainConfig, seed: u64, initial: &Initial) -> Result<RunRecord> {
    let mut rng = rng_from_seed(seed);
    let (hitting_time, x0) = run_with_rng(config, &mut rng, initial)?;
    Ok(RunRecord {
        hitting_time,
        initial_level: x0.leading_ones(),
        initial_zeros: x0.count_zeros(),
        seed,
    })
}

/// Same as [`run_to_optimum`] on a caller-owned stream; also returns `X_0`.
pub fn run_with_rng<R: Rng + ?Sized>(
    config: &ChainConfig,
    rng: &mut R,
    initial: &Initial,
) -> Result<(HittingTime, BitString)> {
    let mutator = Mutator::new(config.n, &config.mutation)?;
    let x0 = initial.draw(config.n, rng)?;
    let mut state = ChainState::new(x0.clone());
    let mut scratch = StepScratch::default();
    while !state.is_optimal() {
        if state.t >= config.max_iters {
            return Ok((HittingTime::Capped, x0));
        }
        step_in_place(&mut state, &mutator, config.selection, rng, &mut scratch);
    }
    Ok((HittingTime::Hit(state.t), x0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn strict(n: usize, m: MutationKind) -> ChainConfig {
        ChainConfig::new(n, m, SelectionRule::Strict).unwrap()
    }

    #[test]
    fn gap_sampler_law() {
        let p = 0.2;
        let g = GapSampler::new(p);
        let mut rng = rng_from_seed(5);
        let draws = 200_000u64;
        let mut counts = [0u64; 8];
        for _ in 0..draws {
            counts[(g.sample(&mut rng) as usize).min(7)] += 1;
        }
        let mut expected: Vec<f64> = (0..7).map(|k| p * (1.0 - p).powi(k)).collect();
        expected.push((1.0 - p).powi(7));
        let rep = crate::stats::chi_square_gof(&counts, &expected, 0.999).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn hamiltonian_examples() {
        assert_eq!(hamiltonian(&bs("1101"), 1.0), -2.0);
        assert_eq!(hamiltonian(&BitString::ones(7), 2.0), -14.0);
        assert_eq!(hamiltonian(&BitString::zeros(7), 3.5), 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(ChainConfig::new(0, MutationKind::OneFlip, SelectionRule::Strict).is_err());
        assert!(ChainConfig::new(4, MutationKind::Bernoulli { c: 5.0 }, SelectionRule::Strict).is_err());
        assert!(ChainConfig::new(4, MutationKind::Bernoulli { c: 0.0 }, SelectionRule::Strict).is_err());
        assert!(ChainConfig::new(4, MutationKind::Bernoulli { c: f64::NAN }, SelectionRule::Strict).is_err());
        assert!(ChainConfig::new(4, MutationKind::Bernoulli { c: 4.0 }, SelectionRule::Strict).is_ok());
        let cfg = strict(10, MutationKind::OneFlip);
        assert_eq!(cfg.max_iters, 10_000);
        assert!(cfg.with_max_iters(0).is_err());
        // m(4) = (e^4 - 1)/32 > 1 scales the cap.
        let cfg = strict(10, MutationKind::Bernoulli { c: 4.0 });
        assert_eq!(cfg.max_iters, (10_000.0 * m_of_c(4.0)).ceil() as u64);
    }

    #[test]
    fn one_flip_single_bit() {
        let mut rng = rng_from_seed(1);
        for _ in 0..10 {
            assert_eq!(mutate_one_flip(&bs("0"), &mut rng), bs("1"));
        }
    }

    #[test]
    fn one_flip_position_frequencies() {
        let mut rng = rng_from_seed(2);
        let x = BitString::zeros(8);
        let mut counts = [0u64; 8];
        let draws = 100_000;
        for _ in 0..draws {
            let y = mutate_one_flip(&x, &mut rng);
            let pos = (0..8).find(|&i| y.get(i)).unwrap();
            counts[pos] += 1;
        }
        assert_eq!(x, BitString::zeros(8));
        let expected = vec![1.0 / 8.0; 8];
        let rep = crate::stats::chi_square_gof(&counts, &expected, 0.999).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn bernoulli_full_rate_complements() {
        let mut rng = rng_from_seed(3);
        let x = bs("1100101");
        for _ in 0..20 {
            assert_eq!(mutate_bernoulli(&x, 7.0, &mut rng).unwrap(), x.complement());
        }
        assert!(mutate_bernoulli(&x, 7.5, &mut rng).is_err());
    }

    #[test]
    fn bernoulli_identity_frequency() {
        // P(no flip) = (1 - 2/4)^4 = 1/16.
        let mut rng = rng_from_seed(4);
        let x = bs("0110");
        let draws = 100_000u64;
        let same = (0..draws)
            .filter(|_| mutate_bernoulli(&x, 2.0, &mut rng).unwrap() == x)
            .count() as f64;
        let p = 1.0 / 16.0;
        let sd = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((same / draws as f64 - p).abs() < 4.0 * sd);
    }

    #[test]
    fn bernoulli_per_bit_frequency() {
        let mut rng = rng_from_seed(5);
        let n = 10;
        let x = BitString::zeros(n);
        let draws = 100_000u64;
        let mut counts = vec![0u64; n];
        for _ in 0..draws {
            let y = mutate_bernoulli(&x, 1.0, &mut rng).unwrap();
            for (i, c) in counts.iter_mut().enumerate() {
                *c += y.get(i) as u64;
            }
        }
        let p = 0.1;
        let sd = (p * (1.0 - p) / draws as f64).sqrt();
        for c in counts {
            assert!((c as f64 / draws as f64 - p).abs() < 4.0 * sd, "count {c}");
        }
    }

    #[test]
    fn metropolis_examples() {
        let mut rng = rng_from_seed(6);
        for beta in [0.0, 0.5, 3.0, f64::INFINITY] {
            assert!(metropolis_accept(-1.0, beta, &mut rng));
            assert!(metropolis_accept(0.0, beta, &mut rng));
        }
        assert!(!metropolis_accept(1.0, f64::INFINITY, &mut rng));
        assert!(metropolis_accept(1.0, 0.0, &mut rng));
    }

    #[test]
    fn metropolis_finite_beta_rate() {
        let mut rng = rng_from_seed(7);
        let draws = 100_000;
        let hits = (0..draws).filter(|_| metropolis_accept(1.0, 1.0, &mut rng)).count() as f64;
        let p = (-1.0f64).exp();
        assert!((hits / draws as f64 - p).abs() < 4.0 * (p * (1.0 - p) / draws as f64).sqrt());
    }

    #[test]
    fn select_examples() {
        let parent = ChainState::new(bs("11010"));
        assert_eq!(parent.level(), 2);
        let up = bs("11101");
        let same = bs("11011");
        let down = bs("10010");
        for rule in [SelectionRule::Strict, SelectionRule::NonStrict] {
            assert_eq!(select(&parent, &up, rule), up);
            assert_eq!(select(&parent, &down, rule), parent.x().clone());
        }
        assert_eq!(select(&parent, &same, SelectionRule::Strict), parent.x().clone());
        assert_eq!(select(&parent, &same, SelectionRule::NonStrict), same);
    }

    #[test]
    fn nonstrict_is_zero_temperature_metropolis() {
        let mut rng = rng_from_seed(8);
        for parent in 0..6 {
            for cand in 0..6 {
                let dh = -(cand as f64) + parent as f64;
                assert_eq!(
                    SelectionRule::NonStrict.accepts(parent, cand),
                    metropolis_accept(dh, f64::INFINITY, &mut rng)
                );
            }
        }
    }

    #[test]
    fn optimum_is_absorbing() {
        for rule in [SelectionRule::Strict, SelectionRule::NonStrict] {
            for m in [MutationKind::OneFlip, MutationKind::Bernoulli { c: 2.0 }] {
                let cfg = ChainConfig::new(6, m, rule).unwrap();
                let mut rng = rng_from_seed(9);
                let mut s = ChainState::new(BitString::ones(6));
                for _ in 0..200 {
                    s = step(s, &cfg, &mut rng);
                    assert_eq!(s.level(), 6);
                }
                assert_eq!(s.t(), 200);
            }
        }
    }

    fn jump_frequency(m: MutationKind, rule: SelectionRule, n: usize, level: usize, seed: u64) -> f64 {
        let cfg = ChainConfig::new(n, m, rule).unwrap();
        let mut rng = rng_from_seed(seed);
        let draws = 100_000;
        let mut jumps = 0;
        for _ in 0..draws {
            let mut x = BitString::random(n, &mut rng);
            for i in 0..level {
                x.set(i, true);
            }
            x.set(level, false);
            let s = step(ChainState::new(x), &cfg, &mut rng);
            jumps += (s.level() > level) as u32;
        }
        jumps as f64 / draws as f64
    }

    #[test]
    fn jump_probability_law() {
        for rule in [SelectionRule::Strict, SelectionRule::NonStrict] {
            let f = jump_frequency(MutationKind::OneFlip, rule, 10, 4, 10);
            assert!((f - 0.1).abs() < 4.0 * (0.09f64 / 1e5).sqrt(), "oneflip {f}");
            let p = 0.2 * 0.8f64.powi(3);
            let f = jump_frequency(MutationKind::Bernoulli { c: 2.0 }, rule, 10, 3, 11);
            assert!((f - p).abs() < 4.0 * (p * (1.0 - p) / 1e5).sqrt(), "bernoulli {f} vs {p}");
        }
    }

    #[test]
    fn run_examples() {
        let cfg = strict(5, MutationKind::OneFlip);
        let rec = run_to_optimum(&cfg, 3, &Initial::Fixed(BitString::ones(5))).unwrap();
        assert_eq!(rec.hitting_time, HittingTime::Hit(0));
        assert_eq!(rec.initial_level, 5);

        let cfg = strict(1, MutationKind::OneFlip);
        for seed in 0..20 {
            let rec = run_to_optimum(&cfg, seed, &Initial::Fixed(bs("0"))).unwrap();
            assert_eq!(rec.hitting_time, HittingTime::Hit(1));
        }

        let wrong = Initial::Fixed(bs("01"));
        assert!(run_to_optimum(&cfg, 0, &wrong).is_err());
    }

    #[test]
    fn cap_is_reported() {
        // c = n = 3: every bit flips, so level 1 or 2 can never improve.
        let cfg = strict(3, MutationKind::Bernoulli { c: 3.0 })
            .with_max_iters(50)
            .unwrap();
        let rec = run_to_optimum(&cfg, 0, &Initial::Fixed(bs("100"))).unwrap();
        assert_eq!(rec.hitting_time, HittingTime::Capped);
    }

    #[test]
    fn oneflip_mean_at_n10() {
        let cfg = strict(10, MutationKind::OneFlip);
        let r = 100_000u64;
        let times: Vec<f64> = (0..r)
            .map(|i| {
                run_to_optimum(&cfg, crate::rng::substream_seed(77, i), &Initial::Uniform)
                    .unwrap()
                    .hitting_time
                    .value()
                    .unwrap() as f64
            })
            .collect();
        let s = crate::stats::summarize(&times).unwrap();
        assert!((s.mean - 50.0).abs() < 3.0 * s.std_error, "{s:?}");
    }

    proptest! {
        #[test]
        fn one_flip_hamming_one(bits in proptest::collection::vec(any::<bool>(), 1..100), seed: u64) {
            let x = BitString::from_bits(&bits);
            let mut rng = rng_from_seed(seed);
            let y = mutate_one_flip(&x, &mut rng);
            prop_assert_eq!(x.hamming_distance(&y), 1);
        }

        #[test]
        fn step_agrees_with_mutate_then_select(
            bits in proptest::collection::vec(any::<bool>(), 1..80),
            seed: u64,
            bern in any::<bool>(),
            nonstrict in any::<bool>(),
        ) {
            let n = bits.len();
            let m = if bern { MutationKind::Bernoulli { c: (n as f64).min(1.5) } } else { MutationKind::OneFlip };
            let rule = if nonstrict { SelectionRule::NonStrict } else { SelectionRule::Strict };
            let cfg = ChainConfig::new(n, m, rule).unwrap();
            let state = ChainState::new(BitString::from_bits(&bits));

            let mut a = rng_from_seed(seed);
            let candidate = match m {
                MutationKind::OneFlip => mutate_one_flip(state.x(), &mut a),
                MutationKind::Bernoulli { c } => mutate_bernoulli(state.x(), c, &mut a).unwrap(),
            };
            let expected = select(&state, &candidate, rule);

            let mut b = rng_from_seed(seed);
            let next = step(state, &cfg, &mut b);
            prop_assert_eq!(next.x(), &expected);
            prop_assert_eq!(next.level(), expected.leading_ones());
            prop_assert_eq!(next.t(), 1);
        }

        #[test]
        fn trajectories_are_monotone(seed: u64, n in 1usize..40, bern in any::<bool>(), nonstrict in any::<bool>()) {
            let m = if bern { MutationKind::Bernoulli { c: (n as f64).min(1.0) } } else { MutationKind::OneFlip };
            let rule = if nonstrict { SelectionRule::NonStrict } else { SelectionRule::Strict };
            let cfg = ChainConfig::new(n, m, rule).unwrap();
            let mut rng = rng_from_seed(seed);
            let mut s = ChainState::new(BitString::random(n, &mut rng));
            for _ in 0..300 {
                let prev = s.clone();
                s = step(s, &cfg, &mut rng);
                prop_assert!(s.level() >= prev.level());
                prop_assert_eq!(s.level(), s.x().leading_ones());
                for i in 0..prev.level() {
                    prop_assert!(s.x().get(i));
                }
                if rule == SelectionRule::Strict && s.x() != prev.x() {
                    prop_assert!(s.level() > prev.level());
                }
            }
        }

        #[test]
        fn runs_are_deterministic(seed: u64, n in 1usize..30) {
            let cfg = strict(n, MutationKind::Bernoulli { c: 1.0 });
            let a = run_to_optimum(&cfg, seed, &Initial::Uniform).unwrap();
            let b = run_to_optimum(&cfg, seed, &Initial::Uniform).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
