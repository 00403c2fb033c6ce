//! Small-SIR power law and large-SIR tail of the per-port law, with the
//! sampler's tail estimate.
//!
//! ```text
//! cargo run --release --example asymptotics
//! ```

use fama_lab::analytic::{asymptote_small_gamma, asymptote_tail, betaprime_cdf, betaprime_sf, BetaPrimeParams};
use fama_lab::channel::Scheme;
use fama_lab::montecarlo::{marginal_tail_estimate, ExecOptions};

fn main() -> fama_lab::error::Result<()> {
    for scheme in [Scheme::Mrt, Scheme::Zf] {
        let p = BetaPrimeParams::for_scheme(scheme, 8, 4)?;
        println!("{scheme}: small γ, F / asymptote");
        for g in [0.02, 0.01, 0.005, 0.0025] {
            println!("  γ = {g:<7} {:.5}", betaprime_cdf(g, p)? / asymptote_small_gamma(g, scheme, 8, 4)?);
        }
        println!("{scheme}: large γ, (1 - F) / asymptote");
        for g in [10.0, 100.0, 1000.0] {
            println!("  γ = {g:<7} {:.5}", betaprime_sf(g, p)? / asymptote_tail(g, p)?);
        }
    }
    let p = BetaPrimeParams::new(8, 3)?;
    let gammas = [10.0, 30.0, 100.0];
    let est = marginal_tail_estimate(p, &gammas, 5_000_000, 1, &ExecOptions::from_env())?;
    for (g, e) in gammas.iter().zip(est) {
        println!("sampler 1 - F({g}) = {e:.4e}  exact {:.4e}", betaprime_sf(*g, p)?);
    }
    Ok(())
}
