//! Command-line front end: sharp-constant tables, direction profiles,
//! Poisson-integral verification runs, and inequality scans, as CSV or
//! JSON.
//!
//! Exit codes: 0 success, 2 usage error, 3 numerical non-convergence
//! (partial output emitted and flagged on stderr), 4 bound or inequality
//! violation.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NONCONVERGENCE: u8 = 3;
pub const EXIT_VIOLATION: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyMode {
    /// Near-extremal boundary data for the chosen (n, p).
    Extremal,
    /// Seeded random boundary data and evaluation points.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanTarget {
    All,
    Lemma,
    Corollary1,
    Corollary2,
}

#[derive(Parser)]
#[command(
    name = "hs-sharp",
    version,
    about = "Sharp constants in gradient estimates for harmonic functions in the half-space"
)]
struct Cli {
    /// Flat key=value file overriding the quadrature defaults
    /// (keys: base_order, max_refinements, abs_tol, rel_tol).
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sharp constants C_p with closed forms and gaps where available.
    Constants {
        /// Dimensions, comma separated (each >= 2).
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u32>,
        /// Exponents, comma separated: "1", "inf", or a decimal > 1.
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Direction profile beta -> C_p(beta) on [0, pi/2].
    Profile {
        /// Dimension (>= 2).
        #[arg(long)]
        n: u32,
        /// Exponent: "1", "inf", or a decimal > 1.
        #[arg(long)]
        p: String,
        #[arg(long, default_value_t = 33)]
        beta_count: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Sharpness / bound verification through the Poisson integral.
    Verify {
        /// Dimension (>= 2).
        #[arg(long)]
        n: u32,
        /// Exponent: "1", "inf", or a decimal > 1.
        #[arg(long)]
        p: String,
        #[arg(long, value_enum, default_value_t = VerifyMode::Extremal)]
        mode: VerifyMode,
        #[arg(long, default_value_t = 1)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Support radius of the extremal data, in units of x_n.
        #[arg(long, default_value_t = 1e3)]
        truncation: f64,
        /// Height of the evaluation point (extremal mode).
        #[arg(long, default_value_t = 1.0)]
        xn: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Grid scans of the algebraic inequality and its corollaries.
    ScanInequalities {
        #[arg(long, value_enum, default_value_t = ScanTarget::All)]
        target: ScanTarget,
        /// Override the number of x (or y) grid points.
        #[arg(long)]
        x_count: Option<usize>,
        /// Override the violation tolerance.
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("HS_SHARP_THREADS") {
        match threads.parse::<usize>() {
            Ok(k) if k >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
            _ => {
                eprintln!("hs-sharp: HS_SHARP_THREADS must be a positive integer, got {threads:?}");
                return ExitCode::from(EXIT_USAGE);
            }
        }
    }
    let cli = Cli::parse();
    let spec = match config::quadrature_spec(cli.config.as_deref()) {
        Ok(spec) => spec,
        Err(msg) => {
            eprintln!("hs-sharp: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let code = match cli.command {
        Command::Constants { n, p, format } => commands::constants(&n, &p, format, &spec),
        Command::Profile {
            n,
            p,
            beta_count,
            format,
        } => commands::profile(n, &p, beta_count, format, &spec),
        Command::Verify {
            n,
            p,
            mode,
            samples,
            seed,
            truncation,
            xn,
            format,
        } => commands::verify(n, &p, mode, samples, seed, truncation, xn, format, &spec),
        Command::ScanInequalities {
            target,
            x_count,
            tolerance,
            format,
        } => commands::scan_inequalities(target, x_count, tolerance, format),
    };
    ExitCode::from(code)
}
