//! Physical reference-location SIR against the Beta-prime law, for both
//! precoders.
//!
//! ```text
//! cargo run --release --example per_port_cdf
//! ```

use fama_lab::channel::{Scheme, SystemConfig};
use fama_lab::montecarlo::{run_cdf_experiment, CdfMode, ExecOptions};

fn main() -> fama_lab::error::Result<()> {
    let opts = ExecOptions::from_env();
    for scheme in [Scheme::Mrt, Scheme::Zf] {
        let mut cfg = SystemConfig::new(scheme, 8, 4, 1, 0.0)?;
        cfg.realizations = 100_000;
        let r = run_cdf_experiment(&cfg, CdfMode::PhysicalReference, &opts)?;
        println!("{scheme}  KS vs Beta-prime({}, {}) = {:.4}", r.params.a(), r.params.b(), r.ks);
        let values = r.empirical.values();
        for (i, g) in r.empirical.grid().iter().enumerate().step_by(25) {
            println!("  γ = {g:9.4}  empirical {:.4}  analytic {:.4}", values[i], r.analytic[i]);
        }
    }
    Ok(())
}
