//! Command-line front end: figure CSVs, headline scalars, the
//! self-check suite and synthetic-data weight fits.
//!
//! Exit codes: 0 success, 1 validation or fit-quality failure, 2 I/O or
//! configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fermipulse::estimation::{fit_p1, sample_clicks};
use fermipulse::figures::{write_figure, write_scalars};
use fermipulse::runconfig::RunConfig;
use fermipulse::validate::{self, ValidateOptions};
use fermipulse::Error;

#[derive(Parser)]
#[command(name = "fermipulse", version, about = "Degeneracy, interference and Coulomb estimates for pulsed nanotip electron sources")]
struct Cli {
    /// Run configuration file (key = value lines); defaults reproduce
    /// the reference figures.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (falls back to $FERMIPULSE_OUT, then `.`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the CSV for one reference figure (1-6).
    Fig {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=6))]
        n: u8,
        /// Also emit a gnuplot script next to the CSV.
        #[arg(long)]
        plot_script: bool,
    },
    /// Compute the headline scalars with pass/fail flags.
    Scalars,
    /// Run the closed-form vs quadrature self-check suite.
    Validate {
        /// Tighten (or loosen) every tolerance by this factor.
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
        /// Samples per sweep.
        #[arg(long, default_value_t = 11)]
        samples: usize,
    },
    /// Draw synthetic click data and fit the source weights.
    Fit {
        #[arg(long, default_value_t = 100_000)]
        pulses: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write the raw click sample as clicks.csv.
        #[arg(long)]
        write_clicks: bool,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig, Error> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn out_dir(cli_out: &Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    cli_out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os("FERMIPULSE_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let mut cfg = load_config(&cli.config)?;
    let dir = out_dir(&cli.out, &cfg);
    match cli.command {
        Command::Fig { n, plot_script } => {
            cfg.emit_plot_script |= plot_script;
            let path = write_figure(n, &cfg, &dir)?;
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Scalars => {
            let (path, scalars) = write_scalars(&cfg, &dir)?;
            let mut all_pass = true;
            for s in &scalars {
                let status = if s.passes() { "PASS" } else { "FAIL" };
                all_pass &= s.passes();
                println!("{status}  {:<24} {:>14.6e}  (target {:.6e})", s.name, s.value, s.target);
            }
            println!("wrote {}", path.display());
            Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Validate { tol_scale, samples } => {
            let opts = ValidateOptions {
                interference_scale: 1.0,
                tol_scale,
                n_samples: samples,
            };
            let report = validate::run(&cfg, &opts)?;
            println!("{}", report.to_json());
            if report.pass {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("validation failed: {}", report.failures().join(", "));
                Ok(ExitCode::from(1))
            }
        }
        Command::Fit { pulses, seed, write_clicks } => {
            let ens = cfg.ensemble()?;
            let sample = sample_clicks(&ens, pulses, seed)?;
            if write_clicks {
                std::fs::create_dir_all(&dir)?;
                let f = std::fs::File::create(dir.join("clicks.csv"))?;
                sample.write_csv(std::io::BufWriter::new(f))?;
            }
            let fit = fit_p1(&sample, &ens)?;
            println!(
                "pulses = {pulses}  seed = {seed}  nulls = {}\n\
                 p1_hat = {:.6}  p2_hat = {:.6}  sse = {:.6e}  evals = {}",
                sample.n_null(),
                fit.p1_hat,
                fit.p2_hat,
                fit.sse,
                fit.n_evals
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
