use leadingones::exact::{
    bernoulli_exact_pmf, bernoulli_level_probs, exact_moments, negbin_pmf, oneflip_exact_pmf,
    oneflip_level_probs, suggested_t_max, Pmf, TransitionMatrix,
};
use leadingones::verify::{run_suite, Suite, VerifyOptions};
use leadingones::{ChainConfig, MutationKind, SelectionRule};

fn strict(n: usize, m: MutationKind) -> ChainConfig {
    ChainConfig::new(n, m, SelectionRule::Strict).unwrap()
}

#[test]
fn oneflip_given_zero_count_is_negative_binomial() {
    for n in 1..=7usize {
        let tm = TransitionMatrix::build(&strict(n, MutationKind::OneFlip)).unwrap();
        let t_max = suggested_t_max(&oneflip_level_probs(n), 1e-16);
        let p = 1.0 / n as f64;
        for k0 in 0..=n as u32 {
            let states: Vec<usize> = (0..1usize << n)
                .filter(|s| n as u32 - s.count_ones() == k0)
                .collect();
            let mut start = vec![0.0; 1 << n];
            for &s in &states {
                start[s] = 1.0 / states.len() as f64;
            }
            let law = tm.hitting_pmf_from(&start, t_max).unwrap();
            let mut gap = 0.0;
            let mut nb_total = 0.0;
            for t in 0..=t_max {
                let nb = negbin_pmf(k0 as u64, p, t as u64).unwrap();
                nb_total += nb;
                gap += (law.at(t) - nb).abs();
            }
            gap += (law.tail() - (1.0 - nb_total)).abs();
            assert!(gap / 2.0 < 1e-10, "n={n} k0={k0} tv={}", gap / 2.0);
        }
    }
}

#[test]
fn bernoulli_oracle_wider_grid() {
    for n in 1..=7usize {
        for c in [0.25, 0.75, 1.5, 3.0, n as f64] {
            if c > n as f64 {
                continue;
            }
            let exact = bernoulli_exact_pmf(n, c, None).unwrap();
            let tm = TransitionMatrix::build(&strict(n, MutationKind::Bernoulli { c })).unwrap();
            let brute = tm.hitting_pmf(exact.t_max()).unwrap();
            let tv = exact.total_variation(&brute);
            assert!(tv < 1e-10, "n={n} c={c} tv={tv:e}");
        }
    }
}

#[test]
fn full_flip_rate_leaves_mass_at_infinity() {
    // c = n: every bit flips, so only the all-zero start (one step) and the
    // optimum itself ever finish.
    for n in 2..=6usize {
        let exact = bernoulli_exact_pmf(n, n as f64, Some(30)).unwrap();
        let expected_tail = 1.0 - 2.0 / (1u64 << n) as f64;
        assert!((exact.tail() - expected_tail).abs() < 1e-14, "n={n}");
        let tm = TransitionMatrix::build(&strict(n, MutationKind::Bernoulli { c: n as f64 })).unwrap();
        assert!(exact.total_variation(&tm.hitting_pmf(30).unwrap()) < 1e-14);
        assert!(exact_moments(n, &MutationKind::Bernoulli { c: n as f64 }).unwrap().mean.is_infinite());
    }
}

#[test]
fn nonstrict_one_flip_matrix_differs_but_law_agrees() {
    let n = 5;
    let a = TransitionMatrix::build(&strict(n, MutationKind::OneFlip)).unwrap();
    let b = TransitionMatrix::build(
        &ChainConfig::new(n, MutationKind::OneFlip, SelectionRule::NonStrict).unwrap(),
    )
    .unwrap();
    // "01000" (code 0b00010) moves to "01001" only under the non-strict rule
    assert_eq!(a.prob(0b00010, 0b10010), 0.0);
    assert!((b.prob(0b00010, 0b10010) - 0.2).abs() < 1e-15);
    let t = suggested_t_max(&oneflip_level_probs(n), 1e-14);
    assert!(a.hitting_pmf(t).unwrap().total_variation(&b.hitting_pmf(t).unwrap()) < 1e-12);
}

#[test]
fn moments_match_oracle_pmf() {
    for n in 1..=8usize {
        let pmf = oneflip_exact_pmf(n, Some(suggested_t_max(&oneflip_level_probs(n), 1e-16))).unwrap();
        let m = exact_moments(n, &MutationKind::OneFlip).unwrap();
        assert!((pmf.mean() - m.mean).abs() < 1e-9 * m.mean.max(1.0));
        assert!((pmf.variance() - m.variance).abs() < 1e-8 * m.variance.max(1.0));
    }
    let probs = bernoulli_level_probs(6, 2.0).unwrap();
    let pmf = bernoulli_exact_pmf(6, 2.0, Some(suggested_t_max(&probs, 1e-16))).unwrap();
    let m = exact_moments(6, &MutationKind::Bernoulli { c: 2.0 }).unwrap();
    assert!((pmf.mean() / m.mean - 1.0).abs() < 1e-10);
    assert!((pmf.variance() / m.variance - 1.0).abs() < 1e-9);
}

#[test]
fn pmf_csv_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pmf.csv");
    let pmf = bernoulli_exact_pmf(9, 1.0, None).unwrap();
    pmf.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
    let back = Pmf::read_csv(std::io::BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(back, pmf);
}

#[test]
fn fast_suites_pass_with_defaults() {
    let opts = VerifyOptions::default();
    for suite in [Suite::Oracle, Suite::Lemmas] {
        let bundle = run_suite(suite, &opts).unwrap();
        assert!(bundle.pass, "{:#?}", bundle.reports.iter().filter(|r| !r.pass).collect::<Vec<_>>());
    }
}

#[test]
fn equivalence_suite_small_scale() {
    let opts = VerifyOptions {
        n: Some(5),
        replicates: Some(2000),
        workers: 2,
        ..Default::default()
    };
    let bundle = run_suite(Suite::Equivalence, &opts).unwrap();
    assert!(bundle.pass, "{:#?}", bundle.reports);
    assert_eq!(bundle.reports.len(), 2 * 5 + 2);
}
