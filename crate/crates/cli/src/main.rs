use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use xyness::{Error, ModelParams, QuadratureSpec, ThermalConfig};

mod commands;
mod output;
mod sweep;

use output::Output;
use sweep::Sweep;

const EXIT_INVALID: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_ORACLE: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "xyness",
    version,
    about = "Steady-state transport through a magnetic impurity in the XY chain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    beta_l: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    beta_r: f64,
    /// Sample half-width.
    #[arg(long, default_value_t = 0)]
    nu: u32,
    /// Absolute quadrature tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Magnetic correction over the Brillouin zone.
    Correction {
        #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
        lambda: f64,
        /// Number of momenta in [-pi, pi].
        #[arg(long, default_value_t = 1001)]
        points: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Heat flux with entropy production and derivatives.
    Flux {
        /// Value or min:max:step.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        lambda: Sweep,
        #[command(flatten)]
        common: Common,
    },
    /// Heat flux and entropy production over a field sweep.
    FluxScan {
        #[arg(long, default_value = "-2:2:0.01", allow_hyphen_values = true)]
        lambda: Sweep,
        #[command(flatten)]
        common: Common,
    },
    /// First and second field derivatives of the heat flux.
    Dflux {
        #[arg(long, default_value = "-2:2:0.01", allow_hyphen_values = true)]
        lambda: Sweep,
        #[command(flatten)]
        common: Common,
    },
    /// Steady-state two-point function on a window of sites.
    NessMatrix {
        #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
        lambda: f64,
        /// Inclusive site range a:b.
        #[arg(long, default_value = "-10:10", allow_hyphen_values = true)]
        window: String,
        #[command(flatten)]
        common: Common,
    },
    /// Bound state, checked against the truncated lattice.
    Spectrum {
        #[arg(long, default_value_t = 0.75, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, default_value_t = 1000)]
        oracle_m: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Commutator with the shift, by both routes.
    TiCheck {
        #[arg(long, default_value = "0.2", allow_hyphen_values = true)]
        lambda: Sweep,
        #[command(flatten)]
        common: Common,
    },
    /// Compares analytic results with the finite-lattice evolution.
    OracleVerify {
        #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, default_value_t = 1000)]
        oracle_m: usize,
        #[arg(long, default_value_t = 700.0)]
        t_star: f64,
        /// Allowed deviation of each matrix element and of the fluxes.
        #[arg(long, default_value_t = 1e-3)]
        max_deviation: f64,
        /// Truncation used for the flux checks.
        #[arg(long, default_value_t = 1500)]
        flux_m: usize,
        #[arg(long, default_value_t = 900.0)]
        flux_t_star: f64,
        /// Allowed net energy gain of the sample.
        #[arg(long, default_value_t = 1e-6)]
        first_law_tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Fits the logarithmic singularity of the flux derivative.
    TransitionFit {
        #[arg(long, default_value_t = 1e-5)]
        lambda_min: f64,
        #[arg(long, default_value_t = 1e-3)]
        lambda_max: f64,
        #[arg(long, default_value_t = 9)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
}

/// Failure of a run, with the process exit status it maps to.
pub enum Failure {
    Model(Error),
    Config(String),
    Oracle(String),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Model(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Model(e) => match e {
                Error::NonConvergence { .. }
                | Error::RouteMismatch { .. }
                | Error::IllConditioned(_) => EXIT_NUMERICAL,
                _ => EXIT_INVALID,
            },
            Failure::Config(_) | Failure::Io(_) => EXIT_INVALID,
            Failure::Oracle(_) => EXIT_ORACLE,
        }
    }

    fn record(&self) -> serde_json::Value {
        let (kind, message) = match self {
            Failure::Model(e) => (e.kind(), e.to_string()),
            Failure::Config(m) => ("invalid_config", m.clone()),
            Failure::Oracle(m) => ("oracle_failure", m.clone()),
            Failure::Io(e) => ("io", e.to_string()),
        };
        json!({ "error": kind, "message": message, "exit_code": self.exit_code() })
    }
}

impl Common {
    fn thermal(&self) -> Result<ThermalConfig, Failure> {
        Ok(ThermalConfig::new(self.beta_l, self.beta_r)?)
    }

    fn spec(&self) -> Result<QuadratureSpec, Failure> {
        let spec = QuadratureSpec::with_tolerance(self.tol, QuadratureSpec::default().rel_tol);
        spec.validate()?;
        Ok(spec)
    }

    fn params(&self, lambda: f64) -> Result<ModelParams, Failure> {
        Ok(ModelParams::new(lambda, self.nu)?)
    }
}

fn run(command: &Command) -> Result<Output, Failure> {
    use commands::*;
    match command {
        Command::Correction {
            lambda,
            points,
            common,
        } => correction(*lambda, *points, common),
        Command::Flux { lambda, common } => flux(lambda, common),
        Command::FluxScan { lambda, common } => flux_scan(lambda, common),
        Command::Dflux { lambda, common } => dflux(lambda, common),
        Command::NessMatrix {
            lambda,
            window,
            common,
        } => ness_matrix(*lambda, window, common),
        Command::Spectrum {
            lambda,
            oracle_m,
            common,
        } => spectrum(*lambda, *oracle_m, common),
        Command::TiCheck { lambda, common } => ti_check(lambda, common),
        Command::OracleVerify {
            lambda,
            oracle_m,
            t_star,
            max_deviation,
            flux_m,
            flux_t_star,
            first_law_tol,
            common,
        } => oracle_verify(
            &OracleOptions {
                lambda: *lambda,
                oracle_m: *oracle_m,
                t_star: *t_star,
                max_deviation: *max_deviation,
                flux_m: *flux_m,
                flux_t_star: *flux_t_star,
                first_law_tol: *first_law_tol,
            },
            common,
        ),
        Command::TransitionFit {
            lambda_min,
            lambda_max,
            samples,
            common,
        } => transition_fit(*lambda_min, *lambda_max, *samples, common),
    }
}

fn common(command: &Command) -> &Common {
    match command {
        Command::Correction { common, .. }
        | Command::Flux { common, .. }
        | Command::FluxScan { common, .. }
        | Command::Dflux { common, .. }
        | Command::NessMatrix { common, .. }
        | Command::Spectrum { common, .. }
        | Command::TiCheck { common, .. }
        | Command::OracleVerify { common, .. }
        | Command::TransitionFit { common, .. } => common,
    }
}

fn emit(text: &str, path: Option<&PathBuf>) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(Failure::Io),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(Failure::Io),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // help and version requests
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let f = Failure::Config(e.to_string().trim().to_owned());
            eprintln!("{}", f.record());
            return ExitCode::from(f.exit_code());
        }
    };
    let common = common(&cli.command);
    let result = run(&cli.command).and_then(|out| {
        // a failed oracle check still writes its report
        let text = out.render(common.format == Format::Json);
        emit(&text, common.output.as_ref())?;
        commands::verdict(&out)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.record());
            ExitCode::from(f.exit_code())
        }
    }
}
