//! Reproducible random streams and the small dense complex linear algebra
//! used by the precoders.
//!
//! Streams are ChaCha8 keyed by a 64-bit seed with a 64-bit stream id, so a
//! Monte-Carlo chunk can be regenerated from `(seed, chunk index)` alone,
//! independent of how many workers ran the job.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

use crate::error::{FamaError, Result};

/// Shapes up to this value are drawn as sums of unit exponentials.
pub const GAMMA_SUM_MAX_SHAPE: u32 = 32;

/// Default relative pivot tolerance for [`solve_gram`].
pub const DEFAULT_GRAM_TOLERANCE: f64 = 1e-12;

/// A single-owner random stream identified by `(seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// One draw of `CN(0, 1)`: real and imaginary parts each `N(0, 1/2)`.
    pub fn complex_gaussian(&mut self) -> Complex64 {
        let re: f64 = StandardNormal.sample(&mut self.rng);
        let im: f64 = StandardNormal.sample(&mut self.rng);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn exponential(&mut self) -> f64 {
        Exp1.sample(&mut self.rng)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

/// Non-empty vector of finite complex entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(FamaError::domain("ComplexVector::new", "length must be positive"));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(FamaError::domain("ComplexVector::new", "entries must be finite"));
        }
        Ok(ComplexVector(entries))
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Standard basis vector `e_{index}` (zero-based) of length `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(FamaError::domain("ComplexVector::basis", "index out of range"));
        }
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[index] = Complex64::new(1.0, 0.0);
        Self::new(v)
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<Complex64>) -> Self {
        debug_assert!(!entries.is_empty());
        ComplexVector(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> ComplexVector {
        ComplexVector(self.0.iter().map(|z| z * factor).collect())
    }
}

impl std::ops::Index<usize> for ComplexVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

/// `xᴴy` on raw slices of equal length.
#[inline]
pub(crate) fn dot_h(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        acc += a.conj() * b;
    }
    acc
}

/// Hermitian inner product `xᴴy`, conjugate-linear in `x`.
pub fn hermitian_inner(x: &ComplexVector, y: &ComplexVector) -> Result<Complex64> {
    if x.len() != y.len() {
        return Err(FamaError::domain(
            "hermitian_inner",
            format!("length mismatch: {} vs {}", x.len(), y.len()),
        ));
    }
    Ok(dot_h(x.as_slice(), y.as_slice()))
}

/// Vector of i.i.d. `CN(0, 1)` entries.
pub fn sample_cgauss_vec(stream: &mut RngStream, dim: usize) -> Result<ComplexVector> {
    if dim == 0 {
        return Err(FamaError::domain("sample_cgauss_vec", "dimension must be positive"));
    }
    Ok(ComplexVector(
        (0..dim).map(|_| stream.complex_gaussian()).collect(),
    ))
}

/// Unit vector uniformly distributed on the complex sphere in `C^dim`.
pub fn sample_isotropic_unit(stream: &mut RngStream, dim: usize) -> Result<ComplexVector> {
    loop {
        let v = sample_cgauss_vec(stream, dim)?;
        let n = v.norm();
        if n > 0.0 {
            return Ok(v.scaled(1.0 / n));
        }
    }
}

/// `Γ(shape, 1)` variate for integer shape.
pub fn sample_gamma_int(stream: &mut RngStream, shape: u32) -> Result<f64> {
    if shape == 0 {
        return Err(FamaError::domain("sample_gamma_int", "shape must be at least 1"));
    }
    if shape <= GAMMA_SUM_MAX_SHAPE {
        Ok((0..shape).map(|_| stream.exponential()).sum())
    } else {
        let g = Gamma::new(shape as f64, 1.0)
            .map_err(|e| FamaError::domain("sample_gamma_int", e.to_string()))?;
        Ok(g.sample(&mut stream.rng))
    }
}

/// Dense complex matrix stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn from_columns(columns: &[ComplexVector]) -> Result<Self> {
        let Some(first) = columns.first() else {
            return Err(FamaError::domain("ComplexMatrix::from_columns", "no columns"));
        };
        let rows = first.len();
        if columns.iter().any(|c| c.len() != rows) {
            return Err(FamaError::domain(
                "ComplexMatrix::from_columns",
                "columns differ in length",
            ));
        }
        let data = columns.iter().flat_map(|c| c.as_slice().iter().copied()).collect();
        Ok(ComplexMatrix {
            rows,
            cols: columns.len(),
            data,
        })
    }

    /// Builds a matrix from row-major real entries; convenient for small fixtures.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        if n_rows == 0 || n_cols == 0 || rows.iter().any(|r| r.len() != n_cols) {
            return Err(FamaError::domain(
                "ComplexMatrix::from_real_rows",
                "rows must be non-empty and of equal length",
            ));
        }
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for c in 0..n_cols {
            for r in rows {
                data.push(Complex64::new(r[c], 0.0));
            }
        }
        Ok(ComplexMatrix {
            rows: n_rows,
            cols: n_cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[c * self.rows + r]
    }

    pub fn column(&self, c: usize) -> &[Complex64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn column_vector(&self, c: usize) -> ComplexVector {
        ComplexVector(self.column(c).to_vec())
    }

    pub fn columns(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks_exact(self.rows)
    }

    /// `Hᴴ K` for conformable `K`.
    pub fn adjoint_times(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.rows != other.rows {
            return Err(FamaError::domain("ComplexMatrix::adjoint_times", "row mismatch"));
        }
        let mut data = Vec::with_capacity(self.cols * other.cols);
        for j in 0..other.cols {
            for i in 0..self.cols {
                data.push(dot_h(self.column(i), other.column(j)));
            }
        }
        Ok(ComplexMatrix {
            rows: self.cols,
            cols: other.cols,
            data,
        })
    }
}

/// Cholesky factor `G = L Lᴴ` of a Hermitian positive-definite matrix.
/// Fails with the pivot ratio if a pivot is not positive or the spread exceeds `1/tolerance`.
fn cholesky(g: &ComplexMatrix, tolerance: f64) -> std::result::Result<Vec<Complex64>, f64> {
    let n = g.rows;
    let mut l = vec![Complex64::new(0.0, 0.0); n * n]; // row-major lower triangle
    let mut pivots = Vec::with_capacity(n);
    for j in 0..n {
        let mut d = g.get(j, j).re;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        pivots.push(d);
        if !(d > 0.0) {
            return Err(0.0);
        }
        let ljj = d.sqrt();
        l[j * n + j] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = g.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / ljj;
        }
    }
    let max = pivots.iter().cloned().fold(f64::MIN, f64::max);
    let min = pivots.iter().cloned().fold(f64::MAX, f64::min);
    let ratio = min / max;
    if ratio < tolerance {
        return Err(ratio);
    }
    Ok(l)
}

/// Computes `H (HᴴH)^{-1}` through a Cholesky factorization of the Gram matrix.
///
/// The ratio of smallest to largest Cholesky pivot serves as the inverse
/// condition estimate; below `tolerance` the draw is reported as
/// [`FamaError::SingularGram`] and the caller decides whether to resample.
pub fn solve_gram(h: &ComplexMatrix, tolerance: f64) -> Result<ComplexMatrix> {
    if h.rows < h.cols {
        return Err(FamaError::domain(
            "solve_gram",
            format!("need rows >= cols, got {}x{}", h.rows, h.cols),
        ));
    }
    let n = h.cols;
    let gram = h.adjoint_times(h)?;
    let l = cholesky(&gram, tolerance).map_err(|pivot_ratio| FamaError::SingularGram {
        pivot_ratio,
        tolerance,
    })?;
    // Solve G X = I column by column: forward with L, backward with Lᴴ.
    let mut inv = vec![Complex64::new(0.0, 0.0); n * n]; // column-major
    for c in 0..n {
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut s = if i == c {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[k * n + i].conj() * inv[c * n + k];
            }
            inv[c * n + i] = s / l[i * n + i];
        }
    }
    let m = h.rows;
    let mut data = vec![Complex64::new(0.0, 0.0); m * n];
    for c in 0..n {
        for k in 0..n {
            let coeff = inv[c * n + k];
            let col = h.column(k);
            let out = &mut data[c * m..(c + 1) * m];
            for (o, hv) in out.iter_mut().zip(col) {
                *o += hv * coeff;
            }
        }
    }
    Ok(ComplexMatrix {
        rows: m,
        cols: n,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inner_product_examples() {
        let e1 = ComplexVector::basis(2, 0).unwrap();
        let e2 = ComplexVector::basis(2, 1).unwrap();
        assert_eq!(hermitian_inner(&e1, &e1).unwrap(), c(1.0, 0.0));
        assert_eq!(hermitian_inner(&e1, &e2).unwrap(), c(0.0, 0.0));
        let x = ComplexVector::new(vec![c(1.0, 1.0), c(0.0, 0.0)]).unwrap();
        let y = ComplexVector::new(vec![c(0.0, 2.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(hermitian_inner(&x, &y).unwrap(), c(2.0, 2.0));
        let short = ComplexVector::basis(1, 0).unwrap();
        assert!(hermitian_inner(&x, &short).is_err());
    }

    #[test]
    fn vector_invariants() {
        assert!(ComplexVector::new(vec![]).is_err());
        assert!(ComplexVector::new(vec![c(f64::NAN, 0.0)]).is_err());
        let mut s = RngStream::new(1, 0);
        assert!(sample_cgauss_vec(&mut s, 0).is_err());
        assert!(sample_gamma_int(&mut s, 0).is_err());
    }

    #[test]
    fn streams_are_reproducible() {
        let a = sample_cgauss_vec(&mut RngStream::new(42, 7), 8).unwrap();
        let b = sample_cgauss_vec(&mut RngStream::new(42, 7), 8).unwrap();
        let other = sample_cgauss_vec(&mut RngStream::new(42, 8), 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, other);
    }

    #[test]
    fn gram_identity_columns() {
        let h = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let w = solve_gram(&h, DEFAULT_GRAM_TOLERANCE).unwrap();
        assert_eq!(w, h);
    }

    #[test]
    fn gram_single_column() {
        let h = ComplexVector::new(vec![c(1.0, 2.0), c(-0.5, 0.25), c(3.0, 0.0)]).unwrap();
        let w = solve_gram(&ComplexMatrix::from_columns(&[h.clone()]).unwrap(), 1e-12).unwrap();
        let expect = h.scaled(1.0 / h.norm_sqr());
        for i in 0..3 {
            assert_abs_diff_eq!(w.get(i, 0).re, expect[i].re, epsilon = 1e-15);
            assert_abs_diff_eq!(w.get(i, 0).im, expect[i].im, epsilon = 1e-15);
        }
    }

    #[test]
    fn gram_two_by_two_hand_inverse() {
        let h = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let w = solve_gram(&h, 1e-12).unwrap();
        let expect = [[1.0, 0.0], [-1.0, 1.0]];
        for r in 0..2 {
            for col in 0..2 {
                assert_abs_diff_eq!(w.get(r, col).re, expect[r][col], epsilon = 1e-14);
                assert_abs_diff_eq!(w.get(r, col).im, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn gram_rejects_rank_deficient() {
        let h = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[1.0, 2.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(
            solve_gram(&h, 1e-12),
            Err(FamaError::SingularGram { .. })
        ));
        let wide = ComplexMatrix::from_real_rows(&[&[1.0, 2.0]]).unwrap();
        assert!(solve_gram(&wide, 1e-12).is_err());
    }
}
