//! Command-line front end. `main` parses [`Cli`] and hands it to [`run`];
//! everything else is here so the commands can be driven from tests.

mod commands;
pub mod controller_file;
pub mod json;
pub mod plant_file;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::ddp::TripleKind;
use crate::linalg::Tolerances;

pub use controller_file::ControllerFile;
pub use plant_file::{parse_poles, FileError, PlantFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_UNSOLVABLE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "geodec",
    version,
    about = "Disturbance decoupling by dynamic output feedback"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Write the machine-readable report to this path.
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Relative rank cutoff.
    #[arg(long, global = true, env = "GEODEC_TOL_RANK", value_name = "X")]
    pub tol_rank: Option<f64>,
    /// Eigenvalue matching radius.
    #[arg(long, global = true, env = "GEODEC_TOL_EIG", value_name = "X")]
    pub tol_eig: Option<f64>,
    /// Bound on inclusion, invariance and decoupling residuals.
    #[arg(long, global = true, env = "GEODEC_TOL_RESIDUAL", value_name = "X")]
    pub tol_residual: Option<f64>,
    /// Seed for the gain search and for `gen`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TripleArg {
    Supremal,
    Vm,
    Sm,
}

impl From<TripleArg> for TripleKind {
    fn from(t: TripleArg) -> Self {
        match t {
            TripleArg::Supremal => TripleKind::Supremal,
            TripleArg::Vm => TripleKind::Vm,
            TripleArg::Sm => TripleKind::Sm,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Canonical subspaces, invariant zeros and the solvability verdict.
    Analyze { plant: PathBuf },
    /// Fixed poles of the canonical triples and the plant-wide bounds.
    FixedPoles { plant: PathBuf },
    /// Synthesize and verify a decoupling compensator.
    Synth {
        plant: PathBuf,
        #[arg(long, value_enum, default_value = "supremal")]
        triple: TripleArg,
        /// Assignable closed-loop poles, e.g. `-1.5,-2,-1+2i,-1-2i`.
        #[arg(long, allow_hyphen_values = true)]
        poles: Option<String>,
        /// Where to write the controller.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Close the loop and check that the disturbance no longer reaches z.
    Verify { plant: PathBuf, controller: PathBuf },
    /// Emit a seeded random plant file.
    Gen {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        p: usize,
        #[arg(long, default_value_t = 1)]
        q: usize,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        solvable: bool,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

/// Result of one command: exit code, human text for stdout, an optional
/// machine report and an optional message for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub text: String,
    pub report: Option<Value>,
    pub error: Option<String>,
}

impl Outcome {
    fn input_error(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            text: String::new(),
            report: None,
            error: Some(msg.into()),
        }
    }

    /// The report as canonical JSON text.
    pub fn report_text(&self) -> Option<String> {
        self.report
            .as_ref()
            .map(|r| json::to_canonical(r, json::FloatStyle::Sci17))
    }
}

/// Tolerances by precedence: flag (or its environment variable), then the
/// plant file, then the defaults.
pub fn resolve_tolerances(
    opts: &GlobalOpts,
    file: Option<&plant_file::ToleranceOverrides>,
) -> Tolerances {
    let base = file.map_or(Tolerances::default(), |f| f.apply(Tolerances::default()));
    Tolerances {
        rank_rel: opts.tol_rank.unwrap_or(base.rank_rel),
        eig_match: opts.tol_eig.unwrap_or(base.eig_match),
        residual: opts.tol_residual.unwrap_or(base.residual),
    }
}

pub fn run(cli: &Cli) -> Outcome {
    let res = match &cli.command {
        Command::Analyze { plant } => commands::analyze(&cli.global, plant),
        Command::FixedPoles { plant } => commands::fixed_poles(&cli.global, plant),
        Command::Synth {
            plant,
            triple,
            poles,
            out,
        } => commands::synth(
            &cli.global,
            plant,
            (*triple).into(),
            poles.as_deref(),
            out.as_deref(),
        ),
        Command::Verify { plant, controller } => commands::verify(&cli.global, plant, controller),
        Command::Gen {
            n,
            m,
            p,
            q,
            r,
            solvable,
            out,
        } => commands::gen(
            &cli.global,
            crate::ddp::generate::Dims {
                n: *n,
                m: *m,
                p: *p,
                q: *q,
                r: *r,
            },
            *solvable,
            out.as_deref(),
        ),
    };
    let outcome = res.unwrap_or_else(Outcome::input_error);
    if let (Some(path), Some(text)) = (&cli.global.json, outcome.report_text()) {
        if let Err(e) = std::fs::write(path, text) {
            return Outcome::input_error(format!("cannot write {}: {e}", path.display()));
        }
    }
    outcome
}
