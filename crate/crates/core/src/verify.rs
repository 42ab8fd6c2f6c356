//! Verification suites: exact engines against the matrix oracle, laws of
//! large numbers, Gaussian limits, strict/non-strict equivalence and the
//! first-jump laws. Each check yields one [`TestReport`].

use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::chain::{ChainConfig, MutationKind, SelectionRule};
use crate::error::{Error, Result};
use crate::exact::{
    bernoulli_exact_mean, bernoulli_exact_pmf, bernoulli_level_probs, brute_force_pmf,
    exact_moments, level_transition_law, m_of_c, negbin_pmf, oneflip_exact_pmf,
    oneflip_level_probs, sigma2_of_c, suggested_t_max, theta_statistic,
};
use crate::simulate::{run_experiment, ExperimentPlan, FirstJumpSampler, SampleSet};
use crate::stats::{chi_square_gof, ks_one_sample, ks_two_sample, summarize, Ecdf, TestReport};

pub const TV_TOLERANCE: f64 = 1e-10;
pub const TAIL_TOLERANCE: f64 = 1e-12;
pub const ONEFLIP_KS_THRESHOLD: f64 = 0.05;
pub const BERNOULLI_KS_THRESHOLD: f64 = 0.06;
pub const ONEFLIP_VARIANCE_TOLERANCE: f64 = 0.10;
pub const BERNOULLI_VARIANCE_TOLERANCE: f64 = 0.15;
pub const CHI_SQUARE_LEVEL: f64 = 0.999;
pub const KS_TWO_SAMPLE_ALPHA: f64 = 0.01;
pub const BERNOULLI_ORACLE_C: [f64; 3] = [0.5, 1.0, 2.0];
pub const COMPARE_DEFAULT_C: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
pub const COMPARE_DEFAULT_N0: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Oracle,
    Lln,
    Clt,
    Equivalence,
    Lemmas,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Oracle => "oracle",
            Suite::Lln => "lln",
            Suite::Clt => "clt",
            Suite::Equivalence => "equivalence",
            Suite::Lemmas => "lemmas",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(Suite::Oracle),
            "lln" => Ok(Suite::Lln),
            "clt" => Ok(Suite::Clt),
            "equivalence" => Ok(Suite::Equivalence),
            "lemmas" => Ok(Suite::Lemmas),
            "all" => Ok(Suite::All),
            _ => Err(Error::InvalidConfig(format!("unknown suite {s:?}"))),
        }
    }
}

/// Scale overrides. `n` and `replicates` replace each suite's headline
/// defaults; `None` keeps them.
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub n: Option<usize>,
    pub replicates: Option<usize>,
    pub seed: u64,
    pub workers: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            n: None,
            replicates: None,
            seed: 7,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteBundle {
    pub suite: String,
    pub pass: bool,
    pub runtime_ms: u128,
    pub reports: Vec<TestReport>,
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<SuiteBundle> {
    let start = Instant::now();
    let reports = match suite {
        Suite::Oracle => oracle_suite(opts)?,
        Suite::Lln => lln_suite(opts)?,
        Suite::Clt => clt_suite(opts)?,
        Suite::Equivalence => equivalence_suite(opts)?,
        Suite::Lemmas => lemmas_suite(opts)?,
        Suite::All => {
            let mut all = Vec::new();
            for s in [Suite::Oracle, Suite::Equivalence, Suite::Lln, Suite::Lemmas, Suite::Clt] {
                all.extend(run_suite(s, opts)?.reports);
            }
            all
        }
    };
    Ok(SuiteBundle {
        suite: suite.name().to_string(),
        pass: reports.iter().all(|r| r.pass),
        runtime_ms: start.elapsed().as_millis(),
        reports,
    })
}

fn config(n: usize, m: MutationKind, rule: SelectionRule) -> Result<ChainConfig> {
    ChainConfig::new(n, m, rule)
}

fn seed_for(base: u64, salt: u64) -> u64 {
    crate::rng::substream_seed(base, salt.wrapping_add(1 << 32))
}

/// Exact engine vs transition-matrix oracle, with the tail check folded in.
pub fn oracle_report(n: usize, mutation: MutationKind) -> Result<TestReport> {
    let exact = match mutation {
        MutationKind::OneFlip => oneflip_exact_pmf(n, None)?,
        MutationKind::Bernoulli { c } => bernoulli_exact_pmf(n, c, None)?,
    };
    let brute = brute_force_pmf(&config(n, mutation, SelectionRule::Strict)?, exact.t_max())?;
    let tv = exact.total_variation(&brute);
    // with c = n >= 2 the law is defective and both engines must carry the same tail
    let proper = n == 1 || mutation.c().is_none_or(|c| c < n as f64);
    let tails_ok = !proper || (exact.tail() < TAIL_TOLERANCE && brute.tail() < TAIL_TOLERANCE);
    let label = match mutation.c() {
        None => format!("oracle_tv oneflip n={n}"),
        Some(c) => format!("oracle_tv bernoulli n={n} c={c}"),
    };
    let mut rep = TestReport::below(label, tv, TV_TOLERANCE).with_n(n);
    rep.pass &= tails_ok;
    Ok(rep)
}

/// Closed-form mean and variance against the oracle pmf's moments.
pub fn moment_oracle_report(n: usize, mutation: MutationKind) -> Result<TestReport> {
    let probs = match mutation {
        MutationKind::OneFlip => oneflip_level_probs(n),
        MutationKind::Bernoulli { c } => bernoulli_level_probs(n, c)?,
    };
    let brute = brute_force_pmf(
        &config(n, mutation, SelectionRule::Strict)?,
        suggested_t_max(&probs, 1e-15),
    )?;
    let exact = exact_moments(n, &mutation)?;
    let err = ((brute.mean() - exact.mean).abs() / exact.mean.max(1.0))
        .max((brute.variance() - exact.variance).abs() / exact.variance.max(1.0));
    let label = match mutation.c() {
        None => format!("moments_vs_oracle oneflip n={n}"),
        Some(c) => format!("moments_vs_oracle bernoulli n={n} c={c}"),
    };
    Ok(TestReport::below(label, err, 1e-9).with_n(n))
}

fn oracle_suite(opts: &VerifyOptions) -> Result<Vec<TestReport>> {
    let max_n = opts.n.unwrap_or(8);
    let mut reports = Vec::new();
    for n in 1..=max_n {
        reports.push(oracle_report(n, MutationKind::OneFlip)?);
        reports.push(moment_oracle_report(n, MutationKind::OneFlip)?);
    }
    for n in 2..=max_n {
        for c in BERNOULLI_ORACLE_C.into_iter().filter(|&c| c <= n as f64) {
            reports.push(oracle_report(n, MutationKind::Bernoulli { c })?);
            if c < n as f64 {
                reports.push(moment_oracle_report(n, MutationKind::Bernoulli { c })?);
            }
        }
    }
    Ok(reports)
}

/// Exact strict vs non-strict laws from the matrix oracle.
pub fn exact_equivalence_report(n: usize, mutation: MutationKind) -> Result<TestReport> {
    let probs = match mutation {
        MutationKind::OneFlip => oneflip_level_probs(n),
        MutationKind::Bernoulli { c } => bernoulli_level_probs(n, c)?,
    };
    let t_max = suggested_t_max(&probs, 1e-13);
    let strict = brute_force_pmf(&config(n, mutation, SelectionRule::Strict)?, t_max)?;
    let nonstrict = brute_force_pmf(&config(n, mutation, SelectionRule::NonStrict)?, t_max)?;
    let tv = strict.total_variation(&nonstrict);
    Ok(TestReport::below(format!("equivalence_exact {} n={n}", mutation.name()), tv, TV_TOLERANCE).with_n(n))
}

fn sample(config: ChainConfig, replicates: usize, seed: u64, workers: usize) -> Result<SampleSet> {
    run_experiment(&ExperimentPlan::new(config, replicates, seed), workers)
}

/// Two-sample KS between strict and non-strict hitting times.
pub fn statistical_equivalence_report(
    n: usize,
    mutation: MutationKind,
    replicates: usize,
    seed: u64,
    workers: usize,
) -> Result<TestReport> {
    let a = sample(config(n, mutation, SelectionRule::Strict)?, replicates, seed, workers)?;
    let b = sample(
        config(n, mutation, SelectionRule::NonStrict)?,
        replicates,
        seed_for(seed, 1),
        workers,
    )?;
    let capped = a.capped_count() + b.capped_count();
    let mut rep = ks_two_sample(
        &Ecdf::new(a.hitting_times_f64())?,
        &Ecdf::new(b.hitting_times_f64())?,
        KS_TWO_SAMPLE_ALPHA,
    )
    .named(format!("equivalence_ks {} n={n}", mutation.name()))
    .with_n(n)
    .with_replicates(replicates)
    .with_seed(seed);
    rep.pass &= capped == 0;
    Ok(rep)
}

fn equivalence_suite(opts: &VerifyOptions) -> Result<Vec<TestReport>> {
    let max_n = opts.n.unwrap_or(6);
    let mut reports = Vec::new();
    for n in 1..=max_n {
        for m in [MutationKind::OneFlip, MutationKind::Bernoulli { c: 1.0 }] {
            reports.push(exact_equivalence_report(n, m)?);
        }
    }
    let r = opts.replicates.unwrap_or(10_000);
    for (k, m) in [MutationKind::OneFlip, MutationKind::Bernoulli { c: 1.0 }].into_iter().enumerate() {
        reports.push(statistical_equivalence_report(50, m, r, seed_for(opts.seed, 10 + k as u64), opts.workers)?);
    }
    Ok(reports)
}

/// `|mean - target| < 3 SE` for a simulated sample.
pub fn mean_within_3se(
    label: &str,
    set: &SampleSet,
    target: f64,
) -> Result<TestReport> {
    let s = summarize(&set.hitting_times_f64())?;
    let mut rep = TestReport::below(label, (s.mean - target).abs(), 3.0 * s.std_error)
        .with_n(set.plan.config.n)
        .with_replicates(set.plan.replicates)
        .with_seed(set.plan.master_seed);
    rep.pass &= set.capped_count() == 0;
    Ok(rep)
}

/// Exact means of the one-flip chain and the Bernoulli chain over a `c` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub n: usize,
    pub mutation: &'static str,
    pub c: Option<f64>,
    pub exact_mean: f64,
    pub ratio_to_oneflip: f64,
    pub m_of_c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareTable {
    pub rows: Vec<CompareRow>,
    pub n0: usize,
    /// `(n, c)` grid points at `n >= n0` where the Bernoulli mean does not
    /// exceed the one-flip mean.
    pub violations: Vec<(usize, f64)>,
}

impl CompareTable {
    pub fn ordering_holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,mutation,c,exact_mean,ratio_to_oneflip,m_of_c\n");
        for r in &self.rows {
            let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{:.16e},{:.16e},{}\n",
                r.n,
                r.mutation,
                r.c.map(|c| c.to_string()).unwrap_or_default(),
                r.exact_mean,
                r.ratio_to_oneflip,
                opt(r.m_of_c)
            ));
        }
        out
    }
}

pub fn comparison_table(ns: &[usize], cs: &[f64], n0: usize) -> Result<CompareTable> {
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    for &n in ns {
        let oneflip = exact_moments(n, &MutationKind::OneFlip)?.mean;
        rows.push(CompareRow {
            n,
            mutation: "oneflip",
            c: None,
            exact_mean: oneflip,
            ratio_to_oneflip: 1.0,
            m_of_c: None,
        });
        // rates above n have no flip probability and are left out
        for &c in cs.iter().filter(|&&c| c <= n as f64) {
            let mean = bernoulli_exact_mean(n, c)?;
            if n >= n0 && (mean.is_nan() || mean <= oneflip) {
                violations.push((n, c));
            }
            rows.push(CompareRow {
                n,
                mutation: "bernoulli",
                c: Some(c),
                exact_mean: mean,
                ratio_to_oneflip: mean / oneflip,
                m_of_c: Some(m_of_c(c)),
            });
        }
    }
    Ok(CompareTable { rows, n0, violations })
}

fn lln_suite(opts: &VerifyOptions) -> Result<Vec<TestReport>> {
    let mut reports = Vec::new();
    let worst = (1..=50)
        .map(|n| {
            let p = oneflip_exact_pmf(n, None)?;
            let target = (n * n) as f64 / 2.0;
            Ok((p.mean() - target).abs() / target)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    reports.push(TestReport::below("oneflip_exact_mean n=1..50", worst, 1e-9));

    let n = opts.n.unwrap_or(100);
    let r = opts.replicates.unwrap_or(10_000);
    let set = sample(config(n, MutationKind::OneFlip, SelectionRule::Strict)?, r, seed_for(opts.seed, 20), opts.workers)?;
    reports.push(mean_within_3se("oneflip_mc_mean", &set, (n * n) as f64 / 2.0)?);

    for (nn, tol) in [(100usize, 0.05), (1000, 0.005)] {
        let ratio = bernoulli_exact_mean(nn, 1.0)? / (nn * nn) as f64;
        let err = (ratio / m_of_c(1.0) - 1.0).abs();
        reports.push(TestReport::below(format!("bernoulli_mean_over_n2 n={nn}"), err, tol).with_n(nn));
    }
    let bern = MutationKind::Bernoulli { c: 1.0 };
    let set = sample(config(n, bern, SelectionRule::Strict)?, r, seed_for(opts.seed, 21), opts.workers)?;
    reports.push(mean_within_3se("bernoulli_mc_mean c=1", &set, bernoulli_exact_mean(n, 1.0)?)?);

    let m_min = (1..=1000).map(|k| m_of_c(0.01 * k as f64)).fold(f64::INFINITY, f64::min);
    reports.push(TestReport::holds("m_of_c_above_half", m_min > 0.5));
    let table = comparison_table(&[100], &COMPARE_DEFAULT_C, COMPARE_DEFAULT_N0)?;
    reports.push(TestReport::holds("bernoulli_slower_than_oneflip n=100", table.ordering_holds()).with_n(100));
    Ok(reports)
}

/// Variance and KS checks of the scaled hitting time against its Gaussian limit.
pub fn clt_reports(
    n: usize,
    mutation: MutationKind,
    replicates: usize,
    seed: u64,
    workers: usize,
) -> Result<(TestReport, TestReport)> {
    let set = sample(config(n, mutation, SelectionRule::Strict)?, replicates, seed, workers)?;
    let theta: Vec<f64> = set
        .hitting_times()
        .into_iter()
        .map(|t| theta_statistic(t as f64, n, &mutation))
        .collect();
    let (limit_var, var_tol, ks_tol) = match mutation {
        MutationKind::OneFlip => (0.75, ONEFLIP_VARIANCE_TOLERANCE, ONEFLIP_KS_THRESHOLD),
        MutationKind::Bernoulli { c } => (sigma2_of_c(c), BERNOULLI_VARIANCE_TOLERANCE, BERNOULLI_KS_THRESHOLD),
    };
    let s = summarize(&theta)?;
    let capped = set.capped_count();
    let mut var = TestReport::below(
        format!("theta_variance {}", mutation.name()),
        (s.variance / limit_var - 1.0).abs(),
        var_tol,
    )
    .with_n(n)
    .with_replicates(replicates)
    .with_seed(seed);
    var.pass &= capped == 0;
    let mut ks = ks_one_sample(&Ecdf::new(theta)?, 0.0, limit_var, ks_tol)?
        .named(format!("theta_ks {}", mutation.name()))
        .with_n(n)
        .with_seed(seed);
    ks.pass &= capped == 0;
    Ok((var, ks))
}

fn clt_suite(opts: &VerifyOptions) -> Result<Vec<TestReport>> {
    let n = opts.n.unwrap_or(200);
    let r = opts.replicates.unwrap_or(20_000);
    let mut reports = Vec::new();
    let (v, k) = clt_reports(n, MutationKind::OneFlip, r, seed_for(opts.seed, 30), opts.workers)?;
    reports.extend([v, k]);
    let (v, k) = clt_reports(n, MutationKind::Bernoulli { c: 1.0 }, r, seed_for(opts.seed, 31), opts.workers)?;
    reports.extend([v, k]);

    let (_, small) = clt_reports(100, MutationKind::OneFlip, r, seed_for(opts.seed, 32), opts.workers)?;
    let (_, large) = clt_reports(400, MutationKind::OneFlip, r, seed_for(opts.seed, 33), opts.workers)?;
    let mut trend = TestReport::below("theta_ks_trend n=400 vs n=100", large.statistic, small.statistic)
        .with_replicates(r);
    trend.pass = large.statistic <= small.statistic;
    reports.push(trend);
    Ok(reports)
}

/// Chi-square goodness of fit of hitting times against a discrete law on
/// `0, 1, ...`, merging consecutive atoms into cells of probability at least
/// `1/cells` and a final cell for the rest.
pub fn binned_gof(
    samples: &[u64],
    law: impl Fn(u64) -> f64,
    cells: usize,
    level: f64,
) -> Result<TestReport> {
    let target = 1.0 / cells as f64;
    let mut edges = Vec::new();
    let mut probs = Vec::new();
    let (mut acc, mut cum, mut t) = (0.0, 0.0, 0u64);
    while cum + acc < 1.0 - target && (t as usize) < 1 << 24 {
        acc += law(t);
        if acc >= target {
            edges.push(t);
            probs.push(acc);
            cum += acc;
            acc = 0.0;
        }
        t += 1;
    }
    probs.push((1.0 - cum).max(0.0));
    let mut observed = vec![0u64; probs.len()];
    for &x in samples {
        let cell = edges.partition_point(|&e| e < x);
        observed[cell] += 1;
    }
    chi_square_gof(&observed, &probs, level)
}

fn lemmas_suite(opts: &VerifyOptions) -> Result<Vec<TestReport>> {
    let draws = opts.replicates.unwrap_or(100_000) as u64;
    let mut reports = Vec::new();

    let bern = MutationKind::Bernoulli { c: 1.0 };
    let suffix = FirstJumpSampler::new(5, 1, bern, SelectionRule::Strict)?.sample(draws, seed_for(opts.seed, 40))?;
    reports.push(
        chi_square_gof(&suffix.suffix_counts, &[0.125; 8], CHI_SQUARE_LEVEL)?
            .named("suffix_uniform n=5 c=1 level=1")
            .with_n(5)
            .with_seed(opts.seed),
    );

    let jumps = FirstJumpSampler::new(5, 0, bern, SelectionRule::Strict)?.sample(draws, seed_for(opts.seed, 41))?;
    let law = level_transition_law(5)?;
    reports.push(
        chi_square_gof(&jumps.level_counts[1..], law.row(0), CHI_SQUARE_LEVEL)?
            .named("level_transition n=5 level=0")
            .with_n(5)
            .with_seed(opts.seed),
    );
    let merged = [
        jumps.level_counts[1],
        jumps.level_counts[2],
        jumps.level_counts[3..].iter().sum(),
    ];
    reports.push(
        chi_square_gof(&merged, &[0.5, 0.25, 0.25], CHI_SQUARE_LEVEL)?
            .named("level_transition_merged n=5 level=0")
            .with_n(5)
            .with_seed(opts.seed),
    );

    let n = 6;
    let set = sample(config(n, MutationKind::OneFlip, SelectionRule::Strict)?, 40_000, seed_for(opts.seed, 42), opts.workers)?;
    let mut level_counts = vec![0u64; n + 1];
    for r in &set.records {
        level_counts[r.run.initial_level] += 1;
    }
    let mut p: Vec<f64> = (0..n).map(|i| 0.5f64.powi(i as i32 + 1)).collect();
    p.push(0.5f64.powi(n as i32));
    // the all-ones start has probability 2^-6 * 40000 = 625 expected draws
    reports.push(
        chi_square_gof(&level_counts, &p, CHI_SQUARE_LEVEL)?
            .named("initial_level_law n=6")
            .with_n(n),
    );
    for k0 in 1..n {
        let times: Vec<u64> = set
            .records
            .iter()
            .filter(|r| r.run.initial_zeros == k0)
            .filter_map(|r| r.run.hitting_time.value())
            .collect();
        let p = 1.0 / n as f64;
        reports.push(
            binned_gof(&times, |t| negbin_pmf(k0 as u64, p, t).unwrap_or(0.0), 10, CHI_SQUARE_LEVEL)?
                .named(format!("oneflip_negbin n={n} k0={k0}"))
                .with_n(n),
        );
    }
    Ok(reports)
}
