use clap::{Args, Parser, Subcommand};
use gofmult_cli::{config::ExperimentConfig, gradcheck, io, runner, timing};
use gofmult_core::estimation::FitConfig;
use gofmult_core::gof::{self, Method, MultiplierKind, Statistic, TestConfig};
use gofmult_core::{Error, Family, RngStream};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_USAGE: u8 = 1;
const EXIT_FIT: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "gofmult",
    about = "Multiplier and parametric-bootstrap goodness-of-fit tests for parametric families",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test one dataset against a hypothesized family.
    Test(TestArgs),
    /// Run a factorial Monte Carlo level/power study from a config file.
    Study(StudyArgs),
    /// Compare analytic and numerically differentiated t gradients.
    Gradcheck(GradcheckArgs),
    /// Time the multiplier procedure against the parametric bootstrap.
    Bench(BenchArgs),
}

#[derive(Args)]
struct TestArgs {
    /// Family identifier: norm, t<nu>, logis, gamma, weibull, mvnorm,
    /// mvt<nu>, nc, gn, t<nu>n.
    #[arg(long)]
    family: String,
    /// Statistic: sn, tn, snstar, tnstar.
    #[arg(long, default_value = "snstar")]
    stat: String,
    /// Resampler: mp or pb.
    #[arg(long, default_value = "mp")]
    method: String,
    /// Resampling replicates.
    #[arg(long, default_value_t = 1000)]
    nrep: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Grid size for sn/tn (univariate only).
    #[arg(long, default_value_t = 1000)]
    grid_m: usize,
    /// Gradient path: auto, numeric or analytic.
    #[arg(long, default_value = "auto")]
    grad: String,
    /// Multiplier law: normal or rademacher.
    #[arg(long, default_value = "normal")]
    multiplier: String,
    /// Use the (k+1)/(N+1) p-value convention.
    #[arg(long, default_value_t = false)]
    pvalue_plus_one: bool,
    /// Write a JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Input CSV (one observation per row).
    data: PathBuf,
}

#[derive(Args)]
struct StudyArgs {
    /// TOML or JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report.csv and manifest.json.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct GradcheckArgs {
    /// Multivariate t family identifier, e.g. mvt5.
    #[arg(long)]
    family: String,
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    dim: usize,
    /// Sample size when simulating (ignored with --data).
    #[arg(long, default_value_t = 1262)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    nrep: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Optional real dataset; otherwise data is simulated from the family.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Simulation parameters (comma separated, family order); defaults to a
    /// standardized configuration.
    #[arg(long)]
    params: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidInput(_) => EXIT_USAGE,
        _ => EXIT_FIT,
    }
}

fn default_params(family: &Family) -> Vec<f64> {
    let d = family.dim();
    match family {
        Family::Univariate(_) => vec![
            if family.name() == "gamma" || family.name() == "weibull" { 10.0 } else { 0.0 },
            1.0,
        ],
        Family::Sklar(s) => {
            let mut v = Vec::new();
            for m in &s.margins {
                v.extend(match m {
                    gofmult_core::distributions::univariate::UnivariateFamily::Gamma
                    | gofmult_core::distributions::univariate::UnivariateFamily::Weibull => {
                        [10.0, 1.0]
                    }
                    _ => [0.0, 1.0],
                });
            }
            match s.copula.kind {
                gofmult_core::sklar::CopulaKind::Clayton => v.push(0.5),
                _ => v.extend(vec![0.5; d * (d - 1) / 2]),
            }
            v
        }
        _ => {
            let mut v = vec![0.0; d];
            v.extend(vec![1.0; d]);
            v.extend(vec![0.5; d * (d - 1) / 2]);
            v
        }
    }
}

fn cmd_test(args: &TestArgs) -> Result<(), u8> {
    let data = match io::read_csv(&args.data) {
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.data.display());
            return Err(EXIT_IO);
        }
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            return Err(EXIT_USAGE);
        }
        Ok(Ok(d)) => d,
    };
    let fail = |e: Error| {
        eprintln!("error: {e}");
        Err(exit_code_for(&e))
    };
    let family = match Family::from_id(&args.family, data.dim()) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    let statistic = match Statistic::parse(&args.stat) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let method = match Method::parse(&args.method) {
        Ok(m) => m,
        Err(e) => return fail(e),
    };
    let analytic = match args.grad.as_str() {
        "auto" => family.supports_analytic_gradients(),
        "analytic" => true,
        "numeric" => false,
        other => {
            eprintln!("error: unknown gradient path `{other}`");
            return Err(EXIT_USAGE);
        }
    };
    let multiplier = match args.multiplier.as_str() {
        "normal" => MultiplierKind::StandardNormal,
        "rademacher" => MultiplierKind::Rademacher,
        other => {
            eprintln!("error: unknown multiplier law `{other}`");
            return Err(EXIT_USAGE);
        }
    };
    let config = TestConfig {
        fit: FitConfig { use_analytic_grads: analytic, ..FitConfig::default() },
        grid_m: args.grid_m,
        multiplier,
        pvalue_plus_one: args.pvalue_plus_one,
    };
    let result = match gof::run_test(
        &family,
        &data,
        statistic,
        method,
        args.nrep,
        RngStream::new(args.seed),
        &config,
    ) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    println!(
        "family {}  n {}  dim {}  statistic {}  method {}",
        result.family, result.n, result.dim, result.statistic.label(), result.method.label()
    );
    println!(
        "observed {:.6}  p-value {:.4}  replicates {}  failures {}  time {:.3}s",
        result.observed,
        result.pvalue,
        result.replicates.len(),
        result.failures,
        result.wall_time
    );
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&result).expect("serializable result");
        if let Err(e) = std::fs::write(out, json) {
            eprintln!("error: cannot write {}: {e}", out.display());
            return Err(EXIT_IO);
        }
    }
    Ok(())
}

fn cmd_study(args: &StudyArgs) -> Result<(), u8> {
    let config: ExperimentConfig = match ExperimentConfig::from_path(&args.config) {
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return Err(EXIT_IO);
        }
        Ok(Err(msg)) => {
            eprintln!("error: bad config: {msg}");
            return Err(EXIT_USAGE);
        }
        Ok(Ok(c)) => c,
    };
    let report = match runner::run_experiment(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return Err(exit_code_for(&e));
        }
    };
    for c in &report.cells {
        println!(
            "true {} n {:5} hyp {:8} {:4} {:2}: reject {:6.1}% (se {:.1}%, reps {}, failures {})",
            config.true_model.family,
            c.n,
            c.hypothesis,
            c.statistic.label(),
            c.method.label(),
            100.0 * c.rate,
            100.0 * c.se,
            c.reps_used,
            c.failures
        );
    }
    if let Err(e) = std::fs::create_dir_all(&args.out_dir) {
        eprintln!("error: cannot create {}: {e}", args.out_dir.display());
        return Err(EXIT_IO);
    }
    let csv_path = args.out_dir.join("report.csv");
    let json_path = args.out_dir.join("manifest.json");
    if let Err(e) = io::write_report_csv(&csv_path, &report) {
        eprintln!("error: cannot write {}: {e}", csv_path.display());
        return Err(EXIT_IO);
    }
    if let Err(e) = io::write_manifest_json(&json_path, &report) {
        eprintln!("error: cannot write {}: {e}", json_path.display());
        return Err(EXIT_IO);
    }
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

fn cmd_gradcheck(args: &GradcheckArgs) -> Result<(), u8> {
    let family = match Family::from_id(&args.family, args.dim) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return Err(exit_code_for(&e));
        }
    };
    let report = match gradcheck::run_gradient_check(&family, args.trials, args.seed) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return Err(exit_code_for(&e));
        }
    };
    println!(
        "{} (d={}): {} trials, max rel error cdf {:.2e}, logpdf {:.2e}, tolerance {:.0e} -> {}",
        report.family,
        report.dim,
        report.trials,
        report.max_rel_error_cdf,
        report.max_rel_error_logpdf,
        report.tolerance,
        if report.pass { "PASS" } else { "FAIL" }
    );
    if report.pass {
        Ok(())
    } else {
        Err(EXIT_FIT)
    }
}

fn cmd_bench(args: &BenchArgs) -> Result<(), u8> {
    let family = match Family::from_id(&args.family, args.dim) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return Err(exit_code_for(&e));
        }
    };
    let data = if let Some(path) = &args.data {
        match io::read_csv(path) {
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return Err(EXIT_IO);
            }
            Ok(Err(e)) => {
                eprintln!("error: {e}");
                return Err(EXIT_USAGE);
            }
            Ok(Ok(d)) => d,
        }
    } else {
        let params = match &args.params {
            Some(list) => {
                let parsed: Result<Vec<f64>, _> =
                    list.split(',').map(|v| v.trim().parse::<f64>()).collect();
                match parsed {
                    Ok(p) => p,
                    Err(e) => {
                        eprintln!("error: bad --params: {e}");
                        return Err(EXIT_USAGE);
                    }
                }
            }
            None => default_params(&family),
        };
        let mut rng = RngStream::new(args.seed).child(0).rng();
        match family.sample(&params, args.n, &mut rng) {
            Ok(d) => d,
            Err(e) => {
                eprintln!("error: {e}");
                return Err(exit_code_for(&e));
            }
        }
    };
    let report = match timing::run_timing(&family, &data, args.nrep, args.seed) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return Err(exit_code_for(&e));
        }
    };
    println!(
        "{} (d={}, n={}, N={})",
        report.family, report.dim, report.n, report.n_rep
    );
    println!(
        "  MP numeric  : {:8.2}s  p-value {:.4}",
        report.mp_numeric_s, report.mp_numeric_pvalue
    );
    if let (Some(t), Some(p)) = (report.mp_analytic_s, report.mp_analytic_pvalue) {
        println!("  MP analytic : {t:8.2}s  p-value {p:.4}");
    }
    println!("  PB          : {:8.2}s  p-value {:.4}", report.pb_s, report.pb_pvalue);
    println!("  PB / MP speedup: {:.1}x", report.speedup_pb_over_mp());
    if let Some(s) = report.speedup_analytic_over_numeric() {
        println!("  MP numeric / analytic: {s:.1}x");
    }
    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&report).expect("serializable report");
        if let Err(e) = std::fs::write(out, json) {
            eprintln!("error: cannot write {}: {e}", out.display());
            return Err(EXIT_IO);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap prints help/version through the error display
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match &cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Study(args) => cmd_study(args),
        Command::Gradcheck(args) => cmd_gradcheck(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}
