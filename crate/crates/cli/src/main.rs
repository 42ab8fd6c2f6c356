use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use leadingones::exact::{asymptotic_coefficients, bernoulli_exact_pmf, exact_moments, oneflip_exact_pmf, theta_statistic, Pmf};
use leadingones::simulate::{run_experiment, ExperimentPlan};
use leadingones::stats::summarize;
use leadingones::verify::{comparison_table, run_suite, Suite, VerifyOptions, COMPARE_DEFAULT_C, COMPARE_DEFAULT_N0};
use leadingones::{BitString, ChainConfig, Error, Initial, MutationKind, SelectionRule};

#[derive(Parser)]
#[command(name = "leadingones", version, about = "LeadingOnes hitting times: simulation, exact laws and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run replicates of a chain and write the hitting-time sample.
    Simulate(SimulateArgs),
    /// Compute the exact hitting-time law.
    Exact(ExactArgs),
    /// Run a verification suite and write a JSON report bundle.
    Verify(VerifyArgs),
    /// Tabulate exact means of one-flip and Bernoulli mutation.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MutationArg {
    Oneflip,
    Bernoulli,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Strict,
    Nonstrict,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct ChainArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "oneflip")]
    mutation: MutationArg,
    /// Bernoulli rate: each bit flips with probability c/n.
    #[arg(long)]
    c: Option<f64>,
}

impl ChainArgs {
    fn mutation(&self) -> Result<MutationKind, Error> {
        match (self.mutation, self.c) {
            (MutationArg::Oneflip, None) => Ok(MutationKind::OneFlip),
            (MutationArg::Oneflip, Some(_)) => Err(Error::InvalidConfig("--c only applies to --mutation bernoulli".into())),
            (MutationArg::Bernoulli, Some(c)) => Ok(MutationKind::Bernoulli { c }),
            (MutationArg::Bernoulli, None) => Err(Error::InvalidConfig("--mutation bernoulli requires --c".into())),
        }
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long, value_enum, default_value = "strict")]
    rule: RuleArg,
    #[arg(long, default_value_t = 1000)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Start state as a bit string such as 0110, or "uniform".
    #[arg(long, default_value = "uniform")]
    initial: String,
    #[arg(long)]
    max_iters: Option<u64>,
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
    /// Sample file; a JSON manifest is written next to it.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    chain: ChainArgs,
    /// Truncation point; chosen automatically when omitted.
    #[arg(long)]
    t_max: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_parser = parse_suite, default_value = "all")]
    suite: Suite,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, value_delimiter = ',', default_value = "100")]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    c: Option<Vec<f64>>,
    /// Smallest n at which the ordering is asserted.
    #[arg(long, default_value_t = COMPARE_DEFAULT_N0)]
    n0: usize,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

/// Six significant digits for human-facing lines.
fn sig6(x: f64) -> String {
    if !x.is_finite() || x == 0.0 {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..15).contains(&mag) {
        return format!("{x:.5e}");
    }
    format!("{:.*}", (5 - mag).max(0) as usize, x)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(contents.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<ExitCode, Error> {
    let mut config = ChainConfig::new(args.chain.n, args.chain.mutation()?, match args.rule {
        RuleArg::Strict => SelectionRule::Strict,
        RuleArg::Nonstrict => SelectionRule::NonStrict,
    })?;
    if let Some(m) = args.max_iters {
        config = config.with_max_iters(m)?;
    }
    let initial = match args.initial.as_str() {
        "uniform" => Initial::Uniform,
        s => Initial::Fixed(s.parse::<BitString>()?),
    };
    let plan = ExperimentPlan::new(config, args.replicates, args.seed).with_initial(initial);
    let set = run_experiment(&plan, args.workers.max(1))?;

    if let Some(path) = &args.output {
        let data = match args.format {
            Format::Csv => set.to_csv(),
            Format::Json => set.records_json()?,
        };
        write_file(path, &data)?;
        let manifest = serde_json::to_string_pretty(&set.manifest())?;
        write_file(&path.with_extension(sidecar_extension(path)), &manifest)?;
    }

    let mutation = config.mutation;
    let times = set.hitting_times();
    let capped = set.capped_count();
    println!("replicates   {}", set.records.len());
    println!("capped       {capped}");
    if times.len() >= 2 {
        let tf: Vec<f64> = times.iter().map(|&t| t as f64).collect();
        let s = summarize(&tf)?;
        let theta: Vec<f64> = tf.iter().map(|&t| theta_statistic(t, config.n, &mutation)).collect();
        let th = summarize(&theta)?;
        println!("mean         {}", sig6(s.mean));
        println!("variance     {}", sig6(s.variance));
        println!("std_error    {}", sig6(s.std_error));
        println!("theta_mean   {}", sig6(th.mean));
        println!("theta_var    {}", sig6(th.variance));
    } else if let Some(&t) = times.first() {
        println!("mean         {}", sig6(t as f64));
    }
    if capped > 0 {
        eprintln!("warning: {capped} replicate(s) hit the iteration cap");
    }
    Ok(ExitCode::SUCCESS)
}

/// `out.csv` gets `out.json`; a file already ending in `.json` gets `out.manifest.json`.
fn sidecar_extension(path: &Path) -> &'static str {
    if path.extension().is_some_and(|e| e == "json") {
        "manifest.json"
    } else {
        "json"
    }
}

fn pmf_json(pmf: &Pmf) -> serde_json::Value {
    serde_json::json!({
        "t_max": pmf.t_max(),
        "mass": pmf.mass(),
        "tail": pmf.tail(),
    })
}

fn exact(args: ExactArgs) -> Result<ExitCode, Error> {
    let n = args.chain.n;
    let mutation = args.chain.mutation()?;
    let pmf = match mutation {
        MutationKind::OneFlip => oneflip_exact_pmf(n, args.t_max)?,
        MutationKind::Bernoulli { c } => bernoulli_exact_pmf(n, c, args.t_max)?,
    };
    if let Some(path) = &args.output {
        let data = match args.format {
            Format::Csv => pmf.to_csv(),
            Format::Json => serde_json::to_string_pretty(&pmf_json(&pmf))?,
        };
        write_file(path, &data)?;
    }
    let moments = exact_moments(n, &mutation)?;
    let (m, s2) = asymptotic_coefficients(&mutation);
    let nf = n as f64;
    println!("n            {n}");
    println!("mutation     {}", mutation.name());
    if let Some(c) = mutation.c() {
        println!("c            {c}");
    }
    println!("mean         {}", sig6(moments.mean));
    println!("mean_ref     {}", sig6(m * nf * nf));
    println!("variance     {}", sig6(moments.variance));
    println!("variance_ref {}", sig6(s2 * nf.powi(3)));
    println!("t_max        {}", pmf.t_max());
    println!("tail         {}", sig6(pmf.tail()));
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs) -> Result<ExitCode, Error> {
    let opts = VerifyOptions {
        n: args.n,
        replicates: args.replicates,
        seed: args.seed,
        workers: args.workers.max(1),
    };
    let bundle = run_suite(args.suite, &opts)?;
    for r in &bundle.reports {
        println!(
            "{} {}  statistic={} threshold={}",
            if r.pass { "PASS" } else { "FAIL" },
            r.test,
            sig6(r.statistic),
            sig6(r.threshold)
        );
    }
    println!("suite {} {} in {} ms", bundle.suite, if bundle.pass { "passed" } else { "failed" }, bundle.runtime_ms);
    if let Some(path) = &args.output {
        write_file(path, &serde_json::to_string_pretty(&bundle)?)?;
    }
    Ok(if bundle.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn compare(args: CompareArgs) -> Result<ExitCode, Error> {
    let cs = args.c.unwrap_or_else(|| COMPARE_DEFAULT_C.to_vec());
    let table = comparison_table(&args.n, &cs, args.n0)?;
    let data = match args.format {
        Format::Csv => table.to_csv(),
        Format::Json => serde_json::to_string_pretty(&table.rows)?,
    };
    match &args.output {
        Some(path) => write_file(path, &data)?,
        None => print!("{data}"),
    }
    for (n, c) in &table.violations {
        eprintln!("ordering fails at n={n} c={c}");
    }
    Ok(if table.ordering_holds() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Exact(a) => exact(a),
        Command::Verify(a) => verify(a),
        Command::Compare(a) => compare(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
