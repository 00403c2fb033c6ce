//! Special functions behind the SIR law: log-gamma, the regularized
//! incomplete Beta function and the Bessel function J0.
//!
//! ```text
//! cargo run --example special_functions
//! ```

use fama_lab::specialfn::{bessel_j0, ln_gamma, reg_inc_beta, RealInterval};

fn main() -> fama_lab::error::Result<()> {
    println!("ln Γ(11) = {:.12}  (ln 10! = {:.12})", ln_gamma(11.0)?, 3_628_800f64.ln());
    println!("I_0.5(8, 3) = {:.12}", reg_inc_beta(0.5, 8.0, 3.0)?);

    println!("\n   x        J0(x)");
    for x in RealInterval::new(0.0, 30.0)?.linear_grid(7)? {
        println!("{x:6.2}  {:+.12}", bessel_j0(x)?);
    }
    Ok(())
}
