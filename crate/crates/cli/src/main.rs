use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shapelab::experiments::{run_experiment, verify, ExperimentSpec};
use shapelab::Error;

#[derive(Parser)]
#[command(name = "shapelab", version, about = "Seeded first-passage percolation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[command(rename_all = "kebab-case")]
enum Command {
    /// Poisson point samples
    Sample(RunArgs),
    /// Random geometric graphs and structural constants
    Build(RunArgs),
    /// Reached-region roundness over time
    FppShape(RunArgs),
    /// Time constant along a direction
    TimeConstant(RunArgs),
    /// Geodesic fluctuations
    Geodesics(RunArgs),
    /// Straightness violations of the geodesic tree
    Straightness(RunArgs),
    /// Moderate deviations and variance
    Deviations(RunArgs),
    /// Augmented-graph coupling frequencies
    Coupling(RunArgs),
    /// Two-species competition
    Compete(RunArgs),
    /// Heisenberg group growth and cocycles
    Cayley(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment spec (TOML)
    #[arg(long, value_name = "PATH", required_unless_present = "verify")]
    spec: Option<PathBuf>,
    /// Override the master seed
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Override the replica count
    #[arg(long, value_name = "N")]
    replicas: Option<usize>,
    /// Output directory (default: $SHAPELAB_OUT/<kind>-<hash>)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (default: machine parallelism)
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    /// Run the module's oracle checks instead of an experiment
    #[arg(long)]
    verify: bool,
}

impl Command {
    fn split(&self) -> (&'static str, &RunArgs) {
        match self {
            Command::Sample(a) => ("sample", a),
            Command::Build(a) => ("build", a),
            Command::FppShape(a) => ("fpp-shape", a),
            Command::TimeConstant(a) => ("time-constant", a),
            Command::Geodesics(a) => ("geodesics", a),
            Command::Straightness(a) => ("straightness", a),
            Command::Deviations(a) => ("deviations", a),
            Command::Coupling(a) => ("coupling", a),
            Command::Compete(a) => ("compete", a),
            Command::Cayley(a) => ("cayley", a),
        }
    }
}

fn run(kind: &str, args: &RunArgs) -> Result<ExitCode, Error> {
    if args.verify {
        let checks = verify(kind, args.seed.unwrap_or(0))?;
        let mut ok = true;
        for c in &checks {
            println!("{} {} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            ok &= c.passed;
        }
        return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE });
    }
    let path = args.spec.as_ref().expect("clap enforces --spec");
    let mut spec = ExperimentSpec::load(path)?;
    if spec.experiment.kind() != kind {
        return Err(Error::SpecInvalid(format!("spec describes a {} experiment, not {kind}", spec.experiment.kind())));
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(r) = args.replicas {
        spec.replicas = r;
    }
    if args.workers == Some(0) {
        return Err(Error::SpecInvalid("--workers must be positive".into()));
    }
    let root = std::env::var_os("SHAPELAB_OUT").map(PathBuf::from);
    let out = args.out.clone().unwrap_or_else(|| spec.resolve_output(root.as_deref()));
    let summary = run_experiment(&spec, &out, args.workers)?;
    println!("{}", summary.output_dir.display());
    for f in &summary.manifest.files {
        println!("  {f}");
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    match run(kind, args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
