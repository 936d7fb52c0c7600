use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use anderson_landscape::harness::verify::{run_suite, Suite};
use anderson_landscape::harness::{
    run_experiment, write_outputs, yn_record, ExperimentConfig, ExperimentKind, ExperimentOutput,
    DEFAULT_BINS, MAX_SITES_1D, MAX_SITES_ND,
};
use anderson_landscape::landscape::{compute_landscape, write_csv};
use anderson_landscape::lattice::{make_box, LatticePoint};
use anderson_landscape::operator::{DEFAULT_EIG_TOL, DEFAULT_SOLVE_TOL};
use anderson_landscape::output::to_json_string;
use anderson_landscape::potential::sample_potential;
use anderson_landscape::scales::constants_report;
use anderson_landscape::{DistributionSpec, Error, Result, SchrodingerOperator};

#[derive(Parser)]
#[command(name = "anderson", version, about = "Discrete Anderson operator numerics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Sample {
    /// Potential law: bernoulli:P, uniform01 or pointmass:V
    #[arg(long)]
    spec: DistributionSpec,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Box radius; the domain is [-n, n]^d
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    trial: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Principal eigenvalue of one sampled box
    Eig {
        #[command(flatten)]
        sample: Sample,
        #[arg(long, default_value_t = DEFAULT_EIG_TOL)]
        tol: f64,
    },
    /// Landscape function of one sampled box
    Landscape {
        #[command(flatten)]
        sample: Sample,
        /// Write site values here as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Largest clear ball of one sampled box
    Yn {
        #[command(flatten)]
        sample: Sample,
    },
    /// Seeded Monte Carlo experiment over several box sizes
    Experiment {
        #[arg(long)]
        kind: ExperimentKind,
        #[arg(long)]
        spec: DistributionSpec,
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Comma-separated box radii
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
        #[arg(long, default_value_t = DEFAULT_EIG_TOL)]
        tol: f64,
        /// Worker threads (0 = all cores)
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Comma-separated evaluation points for ids
        #[arg(long, value_delimiter = ',')]
        t_grid: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Scale constants for a law, dimension and box radius
    Constants {
        #[arg(long)]
        spec: DistributionSpec,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long)]
        n: u64,
    },
    /// Randomized identity and inequality checks
    Verify {
        #[arg(long)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn sampled_operator(s: &Sample) -> Result<SchrodingerOperator> {
    let side = s.n.checked_mul(2).and_then(|x| x.checked_add(1));
    let size = side.and_then(|x| x.checked_pow(s.d as u32)).unwrap_or(u64::MAX);
    let cap = if s.d == 1 { MAX_SITES_1D } else { MAX_SITES_ND };
    if size > cap as u64 {
        return Err(Error::SizeCap {
            size: usize::try_from(size).unwrap_or(usize::MAX),
            cap,
        });
    }
    let dom = Arc::new(make_box(s.n as usize, s.d)?);
    let field = sample_potential(s.spec, &dom, s.seed, s.trial);
    Ok(SchrodingerOperator::from_field(&field))
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", to_json_string(value));
}

#[derive(Serialize)]
struct LandscapeSummary {
    sup_norm: f64,
    argmax: LatticePoint,
    lambda: f64,
    product: f64,
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Eig { sample, tol } => {
            let op = sampled_operator(&sample)?;
            let r = op.principal_eigpair(tol, 10 * op.size().max(10))?;
            print_json(&json!({
                "lambda": r.lambda,
                "residual": r.residual,
                "iterations": r.iterations,
            }));
        }
        Command::Landscape { sample, csv } => {
            let op = sampled_operator(&sample)?;
            let l = compute_landscape(&op, DEFAULT_SOLVE_TOL)?;
            let lambda = op.principal()?.lambda;
            if let Some(path) = csv {
                let mut w = BufWriter::new(File::create(path)?);
                write_csv(op.domain(), &l.values, &mut w)?;
                w.flush()?;
            }
            print_json(&LandscapeSummary {
                sup_norm: l.sup_norm,
                argmax: l.argmax,
                lambda,
                product: lambda * l.sup_norm,
            });
        }
        Command::Yn { sample } => {
            print_json(&yn_record(sample.spec, sample.d, sample.n, sample.seed, sample.trial)?);
        }
        Command::Experiment {
            kind,
            spec,
            d,
            n,
            trials,
            seed,
            bins,
            tol,
            workers,
            t_grid,
            out,
        } => {
            let mut cfg = ExperimentConfig::new(kind, spec, d, n, trials, seed);
            cfg.bins = bins;
            cfg.tol = tol;
            cfg.workers = workers;
            cfg.t_grid = t_grid;
            let output = run_experiment(&cfg)?;
            let files = write_outputs(&out, kind, &output)?;
            let files: Vec<String> = files.iter().map(|p| p.display().to_string()).collect();
            match &output {
                ExperimentOutput::Trials(reports) => {
                    print_json(&json!({"kind": kind, "files": files, "summaries": reports}))
                }
                ExperimentOutput::Ids(curves) => {
                    print_json(&json!({"kind": kind, "files": files, "curves": curves}))
                }
            }
        }
        Command::Constants { spec, d, n } => print_json(&constants_report(spec, d, n)?),
        Command::Verify { suite, seed } => {
            let report = run_suite(suite, seed)?;
            print_json(&report);
            if !report.pass {
                return Err(Error::Degenerate(format!("suite {suite} failed")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = json!({"error": "usage", "message": e.to_string()});
            eprintln!("{}", to_json_string(&msg));
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = json!({"error": e.kind(), "message": e.to_string()});
            let _ = writeln!(io::stderr(), "{}", to_json_string(&msg));
            ExitCode::FAILURE
        }
    }
}
