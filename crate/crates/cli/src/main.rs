//! `spatial-alex`: regions, rotation numbers, state sums and the normalized
//! Alexander polynomial of transverse spatial graph diagrams.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{Failure, Report};

#[derive(Parser, Debug)]
#[command(
    name = "spatial-alex",
    version,
    about = "Invariants of transverse spatial graph diagrams"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// print the report as JSON
    #[arg(long, global = true)]
    pub json: bool,
    /// edges whose meridians form the basis, e.g. `t,s`
    #[arg(long, global = true, value_delimiter = ',')]
    pub basis: Option<Vec<String>>,
    /// run the determinant oracle where a command supports it
    #[arg(long, global = true, value_enum, default_value_t = OnOff::On)]
    pub oracle: OnOff,
    /// include wall-clock timings (makes output run dependent)
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Regions of the diagram with their winding numbers
    Regions { input: String },
    /// Rotation number and the chi of every node
    Rot { input: String },
    /// State sum with the base point on an arc or free loop
    Statesum {
        input: String,
        #[arg(long)]
        base: Option<String>,
    },
    /// Normalized Alexander polynomial
    Alexander { input: String },
    /// Single-variable specialization under an edge coloring
    Specialize {
        input: String,
        /// `e=2,f=3` or `auto`
        #[arg(long, default_value = "auto")]
        coloring: String,
    },
    /// Consistency checks: base point sweep, and with --all the
    /// determinant oracle, tree count and crossing relations
    Check {
        input: String,
        #[arg(long)]
        all: bool,
    },
    /// Seeded random walk through diagram moves with per-step checks
    Fuzz {
        input: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        moves: usize,
        #[arg(long)]
        framed: bool,
        /// also write the move script here
        #[arg(long)]
        script: Option<PathBuf>,
    },
    /// Apply a move script and check every step
    Replay {
        input: String,
        script: PathBuf,
        /// hold the normalized value fixed along the way
        #[arg(long)]
        framed: bool,
        /// write the final diagram here
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Regions { .. } => "regions",
            Command::Rot { .. } => "rot",
            Command::Statesum { .. } => "statesum",
            Command::Alexander { .. } => "alexander",
            Command::Specialize { .. } => "specialize",
            Command::Check { .. } => "check",
            Command::Fuzz { .. } => "fuzz",
            Command::Replay { .. } => "replay",
        }
    }

    fn input(&self) -> &str {
        match self {
            Command::Regions { input }
            | Command::Rot { input }
            | Command::Statesum { input, .. }
            | Command::Alexander { input }
            | Command::Specialize { input, .. }
            | Command::Check { input, .. }
            | Command::Fuzz { input, .. }
            | Command::Replay { input, .. } => input,
        }
    }
}

fn run(cmd: &Command, g: &Global, rep: &mut Report) -> Result<(), Failure> {
    let src = commands::load(cmd.input())?;
    rep.set_input(&src);
    let d = &src.diagram;
    match cmd {
        Command::Regions { .. } => commands::regions(d, g, rep),
        Command::Rot { .. } => commands::rot(d, g, rep),
        Command::Statesum { base, .. } => commands::statesum(d, base.as_deref(), g, rep),
        Command::Alexander { .. } => commands::alexander(d, g, rep),
        Command::Specialize { coloring, .. } => commands::specialize(d, coloring, g, rep),
        Command::Check { all, .. } => commands::check(d, *all, g, rep),
        Command::Fuzz {
            seed,
            moves,
            framed,
            script,
            ..
        } => commands::fuzz(d, *seed, *moves, *framed, script.as_deref(), g, rep),
        Command::Replay {
            script, framed, out, ..
        } => commands::replay(d, script, *framed, out.as_deref(), g, rep),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut rep = Report::new(cli.command.name());
    let outcome = run(&cli.command, &cli.global, &mut rep);
    if cli.global.timing {
        rep.set_elapsed(start.elapsed());
    }
    if let Err(f) = &outcome {
        rep.set_error(f);
    }
    rep.print(cli.global.json);
    match outcome {
        Err(_) => ExitCode::from(2),
        Ok(()) if rep.ok() => ExitCode::SUCCESS,
        Ok(()) => ExitCode::from(1),
    }
}
