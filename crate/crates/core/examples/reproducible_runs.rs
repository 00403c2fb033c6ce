//! Figure runs are fixed by their configuration: the same CSV bytes come out
//! for any worker count, and a run can be replayed from its manifest.
//!
//! ```text
//! cargo run --release --example reproducible_runs
//! ```

use fama_lab::channel::{Scheme, SystemConfig};
use fama_lab::config::{parse_config_str, render_config, ConfigOverrides, SweepGrid};
use fama_lab::experiments::{render_command, run_command, Command};
use fama_lab::montecarlo::ExecOptions;

fn main() -> fama_lab::error::Result<()> {
    let mut cfg = SystemConfig::new(Scheme::Mrt, 6, 3, 4, 1.5)?;
    cfg.realizations = 20_000;
    cfg.seed = 99;
    let grid = SweepGrid::default();

    let (one, _) = render_command(Command::Fig4, &cfg, &grid, &ExecOptions::with_workers(1))?;
    let (four, _) = render_command(Command::Fig4, &cfg, &grid, &ExecOptions::with_workers(4))?;
    println!("1 vs 4 workers identical: {}", one.files == four.files);

    let replayed = parse_config_str(&render_config(&cfg), &ConfigOverrides::default())?.system;
    println!("config round-trips through text: {}", replayed == cfg);

    let dir = std::env::temp_dir().join("fama-lab-example");
    let summary = run_command(Command::Fig4, &cfg, &grid, &dir, &ExecOptions::from_env())?;
    print!("{}", summary.summary);
    for f in summary.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
