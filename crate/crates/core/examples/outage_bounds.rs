//! Selection outage for correlated ports next to the analytic envelope and the
//! independent-port benchmark.
//!
//! ```text
//! cargo run --release --example outage_bounds
//! ```

use fama_lab::channel::{Scheme, SystemConfig};
use fama_lab::experiments::outage_grid;
use fama_lab::montecarlo::{run_outage_experiment, ExecOptions};

fn main() -> fama_lab::error::Result<()> {
    let opts = ExecOptions::from_env();
    for w in [0.25, 4.0] {
        let mut cfg = SystemConfig::new(Scheme::Mrt, 8, 4, 8, w)?;
        cfg.realizations = 50_000;
        let r = run_outage_experiment(&cfg, &outage_grid(), &opts)?;
        println!("MRT M=8 U=4 N=8 W={w}  ({} selectable ports, {} mode)", r.ports, r.reference_mode);
        println!("  γ dB   correlated    iid MC      F^N     lower     upper");
        for row in r.rows.iter().step_by(5) {
            let e = &row.envelope;
            println!(
                "  {:5.1}  {:.4}±{:.4}  {:.4}  {:.4}  {:.4}  {:.4}",
                10.0 * row.gamma.log10(),
                row.correlated,
                row.correlated_ci,
                row.iid,
                e.iid_benchmark,
                e.lower,
                e.upper
            );
        }
    }
    Ok(())
}
