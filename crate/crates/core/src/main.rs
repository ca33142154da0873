use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use finsler_gap::config::{CaseConfig, ModelGrid, SuiteConfig};
use finsler_gap::domain::{analytic_diameter, build_domain, curvature_certificate, diameter};
use finsler_gap::eigensolver::minimize_rayleigh;
use finsler_gap::harness::{run_suite, verify_case, write_eigenfunction_csv};
use finsler_gap::model1d::{lambda1_model, Dimension};
use finsler_gap::Result;

#[derive(Parser)]
#[command(name = "finsler-gap", version, about = "Spectral-gap bounds for Finsler-Laplacians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sharp bound λ₁(K,N,d) of the one-dimensional model.
    ModelEig {
        #[arg(long = "K", allow_hyphen_values = true)]
        k: f64,
        #[arg(long = "N")]
        n: Dimension,
        #[arg(long)]
        d: f64,
    },
    /// CSV of λ₁(K,N,d) over the grid in a TOML file with arrays k, n, d.
    ModelTable {
        #[arg(long)]
        config: PathBuf,
    },
    /// Node count, measure and diameters of the finest domain of a case.
    Geom {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Eigensolve a case at its finest resolution.
    Solve {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        dump_u: Option<PathBuf>,
    },
    /// Verify the bound and comparison checks on one case.
    Verify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every case of a suite config.
    Suite {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::ModelEig { k, n, d } => {
            println!("{}", lambda1_model(k, n, d)?);
        }
        Command::ModelTable { config } => {
            let grid = ModelGrid::load(&config)?;
            println!("K,N,d,lambda");
            for &k in &grid.k {
                for &n in &grid.n {
                    for &d in &grid.d {
                        match lambda1_model(k, n, d) {
                            Ok(l) => println!("{k},{n},{d},{l}"),
                            Err(_) => println!("{k},{n},{d},"),
                        }
                    }
                }
            }
        }
        Command::Geom { spec } => {
            let spec = CaseConfig::load(&spec)?.finest()?;
            let domain = build_domain(&spec)?;
            println!("nodes: {}", domain.len());
            println!("total measure: {}", domain.total_measure());
            match analytic_diameter(&spec) {
                Ok(d) => println!("analytic diameter: {d}"),
                Err(e) => println!("analytic diameter: unavailable ({e})"),
            }
            println!("graph diameter: {}", diameter(&domain, &spec.norm)?);
            match curvature_certificate(&spec) {
                Ok(c) => println!("certificate: K = {}, N = {}", c.k, c.n),
                Err(e) => println!("certificate: {e}"),
            }
        }
        Command::Solve { spec, seed, dump_u } => {
            let case = CaseConfig::load(&spec)?;
            let spec = case.finest()?;
            let domain = build_domain(&spec)?;
            let res = minimize_rayleigh(&domain, &spec.norm, seed.unwrap_or(case.seed))?;
            println!("lambda: {}", res.lambda);
            println!("residual: {:e}", res.residual);
            println!("iterations: {}", res.iterations);
            println!("converged: {}", res.converged);
            if let Some(path) = dump_u {
                write_eigenfunction_csv(&path, &domain, &res.u)?;
            }
        }
        Command::Verify { spec, out } => {
            let case = CaseConfig::load(&spec)?;
            let report = verify_case(&case, &out)?;
            print_case(&report);
            return Ok(!report.violated());
        }
        Command::Suite { config, out, jobs } => {
            let cfg = SuiteConfig::load(&config)?;
            let report = run_suite(&cfg, &out, jobs)?;
            for case in &report.cases {
                print_case(case);
            }
            return Ok(!report.any_violated());
        }
    }
    Ok(true)
}

fn print_case(case: &finsler_gap::harness::CaseReport) {
    match (&case.bound, &case.error) {
        (Some(b), _) => println!(
            "{}: lambda {:.8} bound {:.8} margin {:+.3e} tol {:.1e} {:?}",
            case.id, b.lambda_numeric, b.bound, b.margin, b.discretization_tolerance, b.verdict
        ),
        (None, Some(e)) => println!("{}: error: {e}", case.id),
        (None, None) => println!("{}: no result", case.id),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
