//! MRT and ZF beamformers built from reference-location CSI.

use num_complex::Complex64;

use crate::channel::Scheme;
use crate::error::{FamaError, Result};
use crate::randlin::{solve_gram, ComplexMatrix, ComplexVector, DEFAULT_GRAM_TOLERANCE};

/// One unit-norm beamformer per user, stored as the columns of an `M × U` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSet {
    scheme: Scheme,
    vectors: ComplexMatrix,
}

impl PrecoderSet {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn users(&self) -> usize {
        self.vectors.cols()
    }

    pub fn antennas(&self) -> usize {
        self.vectors.rows()
    }

    /// `w_u` as a slice.
    pub fn beam(&self, user: usize) -> &[Complex64] {
        self.vectors.column(user)
    }

    pub fn vector(&self, user: usize) -> ComplexVector {
        self.vectors.column_vector(user)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.vectors
    }
}

fn normalized_columns(scheme: Scheme, m: &ComplexMatrix, op: &'static str) -> Result<PrecoderSet> {
    let mut cols = Vec::with_capacity(m.cols());
    for (u, col) in m.columns().enumerate() {
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(FamaError::domain(op, format!("column {u} has zero or invalid norm")));
        }
        cols.push(ComplexVector::new(col.iter().map(|z| z / norm).collect())?);
    }
    Ok(PrecoderSet {
        scheme,
        vectors: ComplexMatrix::from_columns(&cols)?,
    })
}

/// `w_u = h_{u,1} / ‖h_{u,1}‖`.
pub fn mrt_precoders(h1: &ComplexMatrix) -> Result<PrecoderSet> {
    normalized_columns(Scheme::Mrt, h1, "mrt_precoders")
}

/// Unit-normalized columns of `H_1 (H_1ᴴ H_1)^{-1}`.
pub fn zf_precoders(h1: &ComplexMatrix) -> Result<PrecoderSet> {
    zf_precoders_with_tolerance(h1, DEFAULT_GRAM_TOLERANCE)
}

pub fn zf_precoders_with_tolerance(h1: &ComplexMatrix, tolerance: f64) -> Result<PrecoderSet> {
    let raw = solve_gram(h1, tolerance)?;
    normalized_columns(Scheme::Zf, &raw, "zf_precoders")
}

pub fn precoders(scheme: Scheme, h1: &ComplexMatrix) -> Result<PrecoderSet> {
    match scheme {
        Scheme::Mrt => mrt_precoders(h1),
        Scheme::Zf => zf_precoders(h1),
    }
}
