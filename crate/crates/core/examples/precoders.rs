//! MRT and ZF beams from reference-location CSI: unit norm, alignment and
//! nulling residuals for one random draw.
//!
//! ```text
//! cargo run --example precoders
//! ```

use fama_lab::channel::Scheme;
use fama_lab::precoding::precoders;
use fama_lab::randlin::{hermitian_inner, sample_cgauss_vec, ComplexMatrix, RngStream};

fn main() -> fama_lab::error::Result<()> {
    let (m, u) = (8, 4);
    let mut stream = RngStream::new(2024, 0);
    let cols = (0..u)
        .map(|_| sample_cgauss_vec(&mut stream, m))
        .collect::<Result<Vec<_>, _>>()?;
    let h1 = ComplexMatrix::from_columns(&cols)?;
    for scheme in [Scheme::Mrt, Scheme::Zf] {
        let p = precoders(scheme, &h1)?;
        println!("{scheme}");
        for (k, h) in cols.iter().enumerate() {
            let w = p.vector(k);
            let own = hermitian_inner(h, &w)?.norm_sqr();
            let leak = cols
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != k)
                .map(|(_, hi)| Ok(hermitian_inner(hi, &w)?.norm() / hi.norm()))
                .collect::<fama_lab::error::Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            println!("  user {k}: |w| = {:.15}  |hᴴw|² = {own:7.4}  max leakage = {leak:.2e}", w.norm());
        }
    }
    Ok(())
}
