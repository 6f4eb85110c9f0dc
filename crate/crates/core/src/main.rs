use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cubelab::harness::{run, ExperimentConfig, ExperimentKind};
use cubelab::Error;

#[derive(Parser)]
#[command(name = "cubelab", version, about = "Random walks on CAT(0) cube complexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in the config.
    Run(Common),
    /// Cross-check the geometry engine against brute force on an explicit ball.
    Validate(Common),
    /// Classify the listed elements and print their certificates.
    Classify(Common),
    /// Relations, separation verdicts and bridges for pairs of half-spaces.
    Bridge(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Base seed, replacing the one in the config.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output directory; defaults to the config's `output_dir`, then `out`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Lift ball-radius and trials x steps caps.
    #[arg(long)]
    override_caps: bool,
}

fn execute(cli: Cli) -> Result<bool, Error> {
    let (common, kind) = match cli.command {
        Command::Run(c) => (c, None),
        Command::Validate(c) => (c, Some(ExperimentKind::Validate)),
        Command::Classify(c) => (c, Some(ExperimentKind::Classify)),
        Command::Bridge(c) => (c, Some(ExperimentKind::Bridge)),
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Usage(format!("--threads: {e}")))?;
    }
    let mut config = ExperimentConfig::load(&common.config)?;
    if let Some(k) = kind {
        config.experiment = k;
    }
    if let Some(s) = common.seed {
        config.seed = s;
    }
    let out = common
        .out
        .or_else(|| config.output_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let report = run(&config, common.override_caps)?;
    report.write(&out)?;
    if kind == Some(ExperimentKind::Classify) || kind == Some(ExperimentKind::Bridge) {
        println!("{}", serde_json::to_string_pretty(&report.summary["result"]).expect("json values serialize"));
    } else {
        println!("wrote {}", out.join("summary.json").display());
    }
    if !report.passed {
        eprintln!("cubelab: checks failed; see {}", out.join("summary.json").display());
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("cubelab: {e}");
            match e {
                Error::Config { .. } | Error::Usage(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
