use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fama_lab::channel::{ReferenceMode, Scheme};
use fama_lab::config::{parse_config, ConfigOverrides};
use fama_lab::error::Result;
use fama_lab::experiments::{run_command, Command};
use fama_lab::montecarlo::ExecOptions;

#[derive(Debug, Parser)]
#[command(name = "fama-lab", version, about = "Fluid-antenna multiple-access SIR experiments")]
struct Cli {
    /// fig2, fig3, fig4, fig5, validate or sweep
    command: String,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    realizations: Option<u64>,
    /// MRT or ZF
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long = "U")]
    u: Option<usize>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long = "W")]
    w: Option<f64>,
    /// member or external
    #[arg(long)]
    reference_mode: Option<ReferenceMode>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn run(cli: Cli) -> Result<()> {
    let command: Command = cli.command.parse()?;
    let overrides = ConfigOverrides {
        seed: cli.seed,
        realizations: cli.realizations,
        scheme: cli.scheme,
        m: cli.m,
        u: cli.u,
        n: cli.n,
        w: cli.w,
        reference_mode: cli.reference_mode,
    };
    let parsed = parse_config(cli.config.as_deref(), &overrides)?;
    let opts = ExecOptions::from_env();
    let summary = run_command(command, &parsed.system, &parsed.sweep, &cli.out, &opts)?;
    print!("{}", summary.summary);
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    summary.status()
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fama-lab: {e}");
            ExitCode::FAILURE
        }
    }
}
