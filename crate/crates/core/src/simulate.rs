//! Reproducible Monte Carlo harness.
//!
//! Replicate `i` of a plan runs on the substream derived from
//! `(master_seed, i)` (see [`crate::rng`]); results are collected in index
//! order, so a [`SampleSet`] does not depend on the worker count.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitstring::BitString;
use crate::chain::{
    run_with_rng, step_in_place, ChainConfig, ChainState, HittingTime, Initial, MutationKind,
    Mutator, RunRecord, SelectionRule, StepScratch,
};
use crate::error::{Error, Result};
use crate::rng::{substream, substream_seed};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub config: ChainConfig,
    pub replicates: usize,
    pub master_seed: u64,
    pub initial: Initial,
}

impl ExperimentPlan {
    pub fn new(config: ChainConfig, replicates: usize, master_seed: u64) -> Self {
        ExperimentPlan {
            config,
            replicates,
            master_seed,
            initial: Initial::Uniform,
        }
    }

    pub fn with_initial(mut self, initial: Initial) -> Self {
        self.initial = initial;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        if self.config.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        self.config.mutation.validate(self.config.n)?;
        if let Initial::Fixed(x) = &self.initial {
            if x.len() != self.config.n {
                return Err(Error::LengthMismatch {
                    expected: self.config.n,
                    actual: x.len(),
                });
            }
        }
        Ok(())
    }
}

/// Provenance sidecar written next to a sample CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanManifest {
    pub n: usize,
    pub mutation: String,
    pub c: Option<f64>,
    pub rule: String,
    #[serde(rename = "R")]
    pub replicates: usize,
    pub master_seed: u64,
    pub max_iters: u64,
    pub initial: String,
}

impl From<&ExperimentPlan> for PlanManifest {
    fn from(plan: &ExperimentPlan) -> Self {
        PlanManifest {
            n: plan.config.n,
            mutation: plan.config.mutation.name().to_string(),
            c: plan.config.mutation.c(),
            rule: plan.config.selection.name().to_string(),
            replicates: plan.replicates,
            master_seed: plan.master_seed,
            max_iters: plan.config.max_iters,
            initial: match &plan.initial {
                Initial::Uniform => "uniform".to_string(),
                Initial::Fixed(x) => x.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub replicate_index: u64,
    pub run: RunRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub plan: ExperimentPlan,
    pub records: Vec<ReplicateRecord>,
}

impl SampleSet {
    /// Hitting times of the runs that reached the optimum, in replicate order.
    pub fn hitting_times(&self) -> Vec<u64> {
        self.records
            .iter()
            .filter_map(|r| r.run.hitting_time.value())
            .collect()
    }

    pub fn hitting_times_f64(&self) -> Vec<f64> {
        self.hitting_times().into_iter().map(|t| t as f64).collect()
    }

    pub fn capped_count(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.run.hitting_time.is_capped())
            .count()
    }

    /// CSV `replicate,hitting_time,initial_level,capped`; capped rows leave
    /// the hitting time empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.records.len() * 24 + 48);
        out.push_str("replicate,hitting_time,initial_level,capped\n");
        for r in &self.records {
            let (t, capped) = match r.run.hitting_time {
                HittingTime::Hit(t) => (t.to_string(), false),
                HittingTime::Capped => (String::new(), true),
            };
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.replicate_index, t, r.run.initial_level, capped
            );
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    pub fn manifest(&self) -> PlanManifest {
        PlanManifest::from(&self.plan)
    }

    pub fn write_manifest<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, &self.manifest())?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn records_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.records)?)
    }
}

fn run_replicate(plan: &ExperimentPlan, index: u64) -> Result<ReplicateRecord> {
    let seed = substream_seed(plan.master_seed, index);
    let mut rng = crate::rng::rng_from_seed(seed);
    let (hitting_time, x0) = run_with_rng(&plan.config, &mut rng, &plan.initial)?;
    Ok(ReplicateRecord {
        replicate_index: index,
        run: RunRecord {
            hitting_time,
            initial_level: x0.leading_ones(),
            initial_zeros: x0.count_zeros(),
            seed,
        },
    })
}

/// Runs every replicate of `plan` on a pool of `workers` threads.
pub fn run_experiment(plan: &ExperimentPlan, workers: usize) -> Result<SampleSet> {
    plan.validate()?;
    let workers = workers.max(1);
    let records = if workers == 1 {
        (0..plan.replicates as u64)
            .map(|i| run_replicate(plan, i))
            .collect::<Result<Vec<_>>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..plan.replicates as u64)
                .into_par_iter()
                .map(|i| run_replicate(plan, i))
                .collect::<Result<Vec<_>>>()
        })?
    };
    Ok(SampleSet {
        plan: plan.clone(),
        records,
    })
}

/// How conditioned starts `X_0` with `L(X_0) = i` are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conditioning {
    /// Draw uniform starts and keep those at level `i`.
    Rejection,
    /// Build `X_0 = (1^i, 0, Y)` with uniform `Y` directly.
    Direct,
}

/// Samples the first jump out of level `i` from a uniform start conditioned
/// on `L(X_0) = i`.
#[derive(Debug, Clone)]
pub struct FirstJumpSampler {
    n: usize,
    level: usize,
    mutation: MutationKind,
    rule: SelectionRule,
    conditioning: Conditioning,
    budget: u64,
}

/// Outcome of sampling first jumps: suffix cell counts and landing levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstJumpCounts {
    /// `suffix_counts[w]` counts the suffix `W_1` (positions `i+2..n`, read
    /// as a binary number leftmost first).
    pub suffix_counts: Vec<u64>,
    /// `level_counts[j]` counts landings at level `j`; zero for `j <= i`.
    pub level_counts: Vec<u64>,
    pub draws: u64,
    /// Uniform starts drawn, including rejected ones.
    pub attempts: u64,
}

impl FirstJumpSampler {
    pub fn new(n: usize, level: usize, mutation: MutationKind, rule: SelectionRule) -> Result<Self> {
        if level >= n {
            return Err(Error::OutOfRange(format!("level {level} must be below n = {n}")));
        }
        if n - level - 1 > 12 {
            return Err(Error::EngineLimit {
                engine: "suffix table",
                detail: format!("suffix length {} exceeds 12", n - level - 1),
            });
        }
        mutation.validate(n)?;
        if mutation.jump_probability(n, level) <= 0.0 {
            return Err(Error::OutOfRange(format!("level {level} can never be left")));
        }
        Ok(FirstJumpSampler {
            n,
            level,
            mutation,
            rule,
            conditioning: Conditioning::Rejection,
            budget: 0,
        })
    }

    pub fn conditioning(mut self, conditioning: Conditioning) -> Self {
        self.conditioning = conditioning;
        self
    }

    /// Caps the number of uniform starts; 0 picks `64 * 2^(i+1) * draws + 1024`.
    pub fn budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn sample(&self, draws: u64, master_seed: u64) -> Result<FirstJumpCounts> {
        let width = self.n - self.level - 1;
        let mut suffix_counts = vec![0u64; 1 << width];
        let mut level_counts = vec![0u64; self.n + 1];
        let mutator = Mutator::new(self.n, &self.mutation)?;
        let mut scratch = StepScratch::default();
        let budget = if self.budget > 0 {
            self.budget
        } else {
            (64u64 << (self.level + 1)).saturating_mul(draws).saturating_add(1024)
        };
        let mut got = 0u64;
        let mut attempts = 0u64;
        while got < draws {
            if attempts >= budget {
                return Err(Error::InsufficientData(format!(
                    "only {got} of {draws} conditioned draws within {budget} attempts"
                )));
            }
            let mut rng = substream(master_seed, attempts);
            attempts += 1;
            let x0 = match self.conditioning {
                Conditioning::Rejection => {
                    let x = BitString::random(self.n, &mut rng);
                    if x.leading_ones() != self.level {
                        continue;
                    }
                    x
                }
                Conditioning::Direct => {
                    let mut x = BitString::random(self.n, &mut rng);
                    for i in 0..self.level {
                        x.set(i, true);
                    }
                    x.set(self.level, false);
                    x
                }
            };
            let mut state = ChainState::new(x0);
            while state.level() == self.level {
                step_in_place(&mut state, &mutator, self.rule, &mut rng, &mut scratch);
            }
            suffix_counts[state.x().suffix_index(self.level + 1)] += 1;
            level_counts[state.level()] += 1;
            got += 1;
        }
        Ok(FirstJumpCounts {
            suffix_counts,
            level_counts,
            draws,
            attempts,
        })
    }
}

/// Counts of the suffix `W_1` after the first jump from level `i` under the
/// strict Bernoulli-flip chain, by rejection on uniform starts.
pub fn collect_suffix_samples(
    n: usize,
    c: f64,
    conditioned_level: usize,
    draws: u64,
    master_seed: u64,
) -> Result<Vec<u64>> {
    let sampler = FirstJumpSampler::new(
        n,
        conditioned_level,
        MutationKind::Bernoulli { c },
        SelectionRule::Strict,
    )?;
    Ok(sampler.sample(draws, master_seed)?.suffix_counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::level_transition_law;
    use crate::stats::chi_square_gof;

    fn plan(n: usize, m: MutationKind, rule: SelectionRule, r: usize, seed: u64) -> ExperimentPlan {
        ExperimentPlan::new(ChainConfig::new(n, m, rule).unwrap(), r, seed)
    }

    #[test]
    fn optimal_start_single_record() {
        let p = plan(4, MutationKind::OneFlip, SelectionRule::Strict, 1, 0)
            .with_initial(Initial::Fixed(BitString::ones(4)));
        let s = run_experiment(&p, 1).unwrap();
        assert_eq!(s.records.len(), 1);
        assert_eq!(s.records[0].run.hitting_time, HittingTime::Hit(0));
        assert_eq!(s.to_csv(), "replicate,hitting_time,initial_level,capped\n0,0,4,false\n");
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let p = plan(12, MutationKind::Bernoulli { c: 1.5 }, SelectionRule::NonStrict, 500, 99);
        let a = run_experiment(&p, 1).unwrap();
        let b = run_experiment(&p, 8).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
        for (i, r) in a.records.iter().enumerate() {
            assert_eq!(r.replicate_index, i as u64);
        }
    }

    #[test]
    fn invalid_plans_rejected() {
        assert!(run_experiment(&plan(4, MutationKind::OneFlip, SelectionRule::Strict, 0, 0), 1).is_err());
        let p = plan(4, MutationKind::OneFlip, SelectionRule::Strict, 3, 0)
            .with_initial(Initial::Fixed(BitString::ones(5)));
        assert!(run_experiment(&p, 2).is_err());
    }

    #[test]
    fn capped_runs_are_kept() {
        let cfg = ChainConfig::new(3, MutationKind::Bernoulli { c: 3.0 }, SelectionRule::Strict)
            .unwrap()
            .with_max_iters(20)
            .unwrap();
        let s = run_experiment(&ExperimentPlan::new(cfg, 200, 1), 2).unwrap();
        assert_eq!(s.records.len(), 200);
        assert!(s.capped_count() > 100);
        assert!(s.to_csv().contains(",,"));
        assert_eq!(s.hitting_times().len(), 200 - s.capped_count());
    }

    #[test]
    fn manifest_fields() {
        let s = run_experiment(&plan(5, MutationKind::Bernoulli { c: 1.0 }, SelectionRule::Strict, 3, 7), 1).unwrap();
        let mut buf = Vec::new();
        s.write_manifest(&mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["n"], 5);
        assert_eq!(v["mutation"], "bernoulli");
        assert_eq!(v["c"], 1.0);
        assert_eq!(v["rule"], "strict");
        assert_eq!(v["R"], 3);
        assert_eq!(v["master_seed"], 7);
        assert!(v["max_iters"].as_u64().unwrap() > 0);
    }

    #[test]
    fn initial_level_law() {
        // P(L(X_0) = i) = 2^-(i+1) for i < n.
        let n = 8;
        let s = run_experiment(&plan(n, MutationKind::OneFlip, SelectionRule::Strict, 40_000, 5), 4).unwrap();
        let mut counts = vec![0u64; n + 1];
        for r in &s.records {
            counts[r.run.initial_level] += 1;
        }
        let total = s.records.len() as f64;
        for (i, &c) in counts.iter().enumerate().take(n) {
            let p = 0.5f64.powi(i as i32 + 1);
            let sd = (p * (1.0 - p) / total).sqrt();
            assert!((c as f64 / total - p).abs() < 4.0 * sd, "level {i}");
        }
    }

    #[test]
    fn degenerate_suffix_table() {
        let counts = collect_suffix_samples(4, 1.0, 3, 500, 1).unwrap();
        assert_eq!(counts, vec![500]);
    }

    #[test]
    fn suffix_counts_sum_to_draws() {
        let counts = collect_suffix_samples(5, 1.0, 1, 2_000, 2).unwrap();
        assert_eq!(counts.len(), 8);
        assert_eq!(counts.iter().sum::<u64>(), 2_000);
    }

    #[test]
    fn budget_exhaustion_reported() {
        let s = FirstJumpSampler::new(6, 4, MutationKind::OneFlip, SelectionRule::Strict)
            .unwrap()
            .budget(10);
        assert!(matches!(s.sample(1000, 0), Err(Error::InsufficientData(_))));
        assert!(FirstJumpSampler::new(6, 6, MutationKind::OneFlip, SelectionRule::Strict).is_err());
    }

    #[test]
    fn direct_construction_agrees_with_rejection() {
        let base = FirstJumpSampler::new(6, 1, MutationKind::Bernoulli { c: 1.0 }, SelectionRule::Strict).unwrap();
        let a = base.clone().sample(20_000, 3).unwrap();
        let b = base.conditioning(Conditioning::Direct).sample(20_000, 4).unwrap();
        assert_eq!(b.attempts, 20_000);
        assert!(a.attempts > b.attempts);
        let law = level_transition_law(6).unwrap();
        for counts in [&a.level_counts, &b.level_counts] {
            let rep = chi_square_gof(&counts[2..], law.row(1), 0.999).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
    }
}
