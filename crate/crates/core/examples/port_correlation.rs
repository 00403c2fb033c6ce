//! Cross-port SIR correlation: physical simulation against the closed-form
//! approximation, and the shared-component surrogate at μ = 1.
//!
//! ```text
//! cargo run --release --example port_correlation
//! ```

use fama_lab::analytic::BetaPrimeParams;
use fama_lab::channel::{Scheme, SystemConfig};
use fama_lab::montecarlo::{run_correlation_experiment, run_surrogate_correlation, CorrOptions, ExecOptions};

fn main() -> fama_lab::error::Result<()> {
    let opts = ExecOptions::from_env();
    let mut cfg = SystemConfig::new(Scheme::Mrt, 8, 4, 8, 4.0)?;
    cfg.realizations = 100_000;
    let report = run_correlation_experiment(&cfg, CorrOptions::default(), &opts)?;
    println!("MRT, W = 4, n = {}", report.estimate.n);
    println!(" k  l   empirical  approximation");
    for (k, l, emp, approx) in report.pairs().into_iter().take(8) {
        println!("{:2} {:2}  {emp:+.5}    {approx:+.5}", k + 1, l + 1);
    }
    println!("max |deviation| over all pairs: {:.4}", report.max_abs_deviation);

    let p = BetaPrimeParams::new(8, 3)?;
    let s = run_surrogate_correlation(&[1.0, 1.0], p, 1_000_000, 7, &opts)?;
    println!("\nsurrogate gain correlation at μ = 1: {:.5} (8/11 = {:.5})", s.matrix[0][1], 8.0 / 11.0);
    Ok(())
}
