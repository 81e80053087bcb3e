//! Command-line front end: parse map descriptions from JSON files, dispatch
//! norm computations, and emit machine-readable results.

pub mod commands;
pub mod document;
pub mod error;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{CommonOpts, Format, Rendered};
use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "cbnorm",
    about = "Completely bounded and diamond norms of linear maps between matrix algebras",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Completely bounded norm of a map
    Cb {
        /// Map description file (JSON)
        map: PathBuf,
        #[command(flatten)]
        opts: FlagOpts,
    },
    /// Diamond norm of a map (CB norm of the dual)
    Diamond {
        map: PathBuf,
        #[command(flatten)]
        opts: FlagOpts,
    },
    /// Choi-positivity verdict and the minimum Choi eigenvalue
    IsCp {
        map: PathBuf,
        #[command(flatten)]
        opts: FlagOpts,
    },
    /// Exact norm of a unitary-difference map (requires a unitary_diff file)
    ClosedForm {
        map: PathBuf,
        #[command(flatten)]
        opts: FlagOpts,
    },
    /// Upper and lower bounds for the CB norm of a map
    Bounds {
        map: PathBuf,
        #[command(flatten)]
        opts: FlagOpts,
    },
    /// Diamond-norm distance between two maps
    Distance {
        map_a: PathBuf,
        map_b: PathBuf,
        #[command(flatten)]
        opts: FlagOpts,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

#[derive(Debug, Args)]
struct FlagOpts {
    /// Random draws for the minimization and for lower-bound probes
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
    /// Base seed; all randomness is derived from it deterministically
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tolerance for consistency checks (and the is-cp verdict)
    #[arg(long)]
    tol: Option<f64>,
    /// Run derivative-free refinement from the best random draw
    #[arg(long)]
    refine: bool,
    /// Smallest eigenvalue drawn for random mixing matrices
    #[arg(long, default_value_t = 1e-3)]
    eigen_floor: f64,
    /// Write the best-so-far sequence to this file
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
}

impl FlagOpts {
    fn common(&self) -> Result<CommonOpts, CliError> {
        if self.iterations == 0 {
            return Err(CliError::Usage("--iterations must be positive".into()));
        }
        if !(self.eigen_floor > 0.0 && self.eigen_floor < 1.0) {
            return Err(CliError::Usage("--eigen-floor must lie in (0, 1)".into()));
        }
        if let Some(tol) = self.tol {
            if !tol.is_finite() || tol < 0.0 {
                return Err(CliError::Usage("--tol must be nonnegative".into()));
            }
        }
        Ok(CommonOpts {
            iterations: self.iterations,
            seed: self.seed,
            tol: self.tol,
            refine: self.refine,
            eigen_floor: self.eigen_floor,
            trace: self.trace.clone(),
            format: match self.format {
                FormatArg::Json => Format::Json,
                FormatArg::Text => Format::Text,
            },
        })
    }
}

fn dispatch(cli: Cli) -> Result<(Rendered, Format), CliError> {
    match &cli.command {
        Command::Cb { map, opts } => {
            let common = opts.common()?;
            Ok((commands::cmd_cb(map, &common)?, common.format))
        }
        Command::Diamond { map, opts } => {
            let common = opts.common()?;
            Ok((commands::cmd_diamond(map, &common)?, common.format))
        }
        Command::IsCp { map, opts } => {
            let common = opts.common()?;
            Ok((commands::cmd_is_cp(map, &common)?, common.format))
        }
        Command::ClosedForm { map, opts } => {
            let common = opts.common()?;
            Ok((commands::cmd_closed_form(map, &common)?, common.format))
        }
        Command::Bounds { map, opts } => {
            let common = opts.common()?;
            Ok((commands::cmd_bounds(map, &common)?, common.format))
        }
        Command::Distance { map_a, map_b, opts } => {
            let common = opts.common()?;
            Ok((
                commands::cmd_distance(map_a, map_b, &common)?,
                common.format,
            ))
        }
    }
}

/// Run the CLI against explicit arguments, returning the process exit code.
/// Output goes to stdout, errors to stderr as `{"error": .., "message": ..}`.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let kind = err.kind();
            if kind == ErrorKind::DisplayHelp || kind == ErrorKind::DisplayVersion {
                print!("{err}");
                return 0;
            }
            eprint!("{err}");
            return 1;
        }
    };
    match dispatch(cli) {
        Ok((rendered, format)) => {
            println!("{}", rendered.for_format(format));
            0
        }
        Err(err) => {
            let payload = serde_json::json!({
                "error": err.code(),
                "message": err.message(),
            });
            eprintln!("{payload}");
            err.exit_code()
        }
    }
}
