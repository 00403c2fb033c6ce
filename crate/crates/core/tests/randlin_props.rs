use approx::assert_abs_diff_eq;
use fama_lab::randlin::{
    hermitian_inner, sample_cgauss_vec, sample_gamma_int, solve_gram, ComplexMatrix, ComplexVector,
    RngStream, DEFAULT_GRAM_TOLERANCE,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

#[test]
fn cgauss_moments() {
    let mut s = RngStream::new(11, 0);
    let mut norms = Vec::new();
    let mut re = Vec::new();
    for _ in 0..100_000 {
        let v = sample_cgauss_vec(&mut s, 8).unwrap();
        norms.push(v.norm_sqr());
        re.push(v[0].re);
    }
    assert_abs_diff_eq!(mean_var(&norms).0, 8.0, epsilon = 0.1);
    assert_abs_diff_eq!(mean_var(&re).1, 0.5, epsilon = 0.01);
}

#[test]
fn streams_are_reproducible_and_distinct() {
    let a = sample_cgauss_vec(&mut RngStream::new(5, 3), 16).unwrap();
    let b = sample_cgauss_vec(&mut RngStream::new(5, 3), 16).unwrap();
    let c = sample_cgauss_vec(&mut RngStream::new(5, 4), 16).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn distinct_streams_are_uncorrelated() {
    let n = 1_000_000;
    let mut s1 = RngStream::new(42, 0);
    let mut s2 = RngStream::new(42, 1);
    let x: Vec<f64> = (0..n).map(|_| s1.standard_normal()).collect();
    let y: Vec<f64> = (0..n).map(|_| s2.standard_normal()).collect();
    let r = fama_lab::montecarlo::pearson_correlation(&x, &y).unwrap();
    assert!(r.abs() <= 3.0 / (n as f64).sqrt(), "r = {r}");
}

#[test]
fn gamma_moments() {
    let mut s = RngStream::new(3, 0);
    let ones: Vec<f64> = (0..1_000_000).map(|_| sample_gamma_int(&mut s, 1).unwrap()).collect();
    assert_abs_diff_eq!(mean_var(&ones).0, 1.0, epsilon = 0.005);
    let eights: Vec<f64> = (0..1_000_000).map(|_| sample_gamma_int(&mut s, 8).unwrap()).collect();
    let (m, v) = mean_var(&eights);
    assert_abs_diff_eq!(m, 8.0, epsilon = 0.02);
    assert_abs_diff_eq!(v, 8.0, epsilon = 0.1);
    assert!(sample_gamma_int(&mut s, 0).is_err());
}

#[test]
fn gamma_cdf_matches_incomplete_gamma() {
    // P(3, 3) = 1 - e^{-3}(1 + 3 + 9/2)
    let exact = 1.0 - (-3.0f64).exp() * (1.0 + 3.0 + 4.5);
    let mut s = RngStream::new(8, 0);
    let n = 200_000;
    let hits = (0..n).filter(|_| sample_gamma_int(&mut s, 3).unwrap() <= 3.0).count();
    assert_abs_diff_eq!(hits as f64 / n as f64, exact, epsilon = 0.005);
    assert_abs_diff_eq!(exact, 0.5768, epsilon = 1e-4);
}

#[test]
fn large_shapes_use_the_same_law() {
    let mut s = RngStream::new(9, 0);
    let xs: Vec<f64> = (0..200_000).map(|_| sample_gamma_int(&mut s, 40).unwrap()).collect();
    let (m, v) = mean_var(&xs);
    assert_abs_diff_eq!(m, 40.0, epsilon = 0.1);
    assert_abs_diff_eq!(v, 40.0, epsilon = 1.0);
}

#[test]
fn inner_product_examples() {
    let e1 = ComplexVector::basis(2, 0).unwrap();
    let e2 = ComplexVector::basis(2, 1).unwrap();
    assert_eq!(hermitian_inner(&e1, &e1).unwrap(), Complex64::new(1.0, 0.0));
    assert_eq!(hermitian_inner(&e1, &e2).unwrap(), Complex64::new(0.0, 0.0));
    let x = ComplexVector::new(vec![Complex64::new(1.0, 1.0), Complex64::new(0.0, 0.0)]).unwrap();
    let y = ComplexVector::new(vec![Complex64::new(0.0, 2.0), Complex64::new(0.0, 0.0)]).unwrap();
    assert_eq!(hermitian_inner(&x, &y).unwrap(), Complex64::new(2.0, 2.0));
    let short = ComplexVector::basis(3, 0).unwrap();
    assert!(hermitian_inner(&e1, &short).is_err());
}

#[test]
fn gram_solve_examples() {
    let h = ComplexMatrix::from_columns(&[
        ComplexVector::basis(3, 0).unwrap(),
        ComplexVector::basis(3, 2).unwrap(),
    ])
    .unwrap();
    assert_eq!(solve_gram(&h, DEFAULT_GRAM_TOLERANCE).unwrap(), h);

    let col = ComplexVector::from_real(&[3.0, 4.0]).unwrap();
    let w = solve_gram(&ComplexMatrix::from_columns(&[col]).unwrap(), DEFAULT_GRAM_TOLERANCE).unwrap();
    assert_abs_diff_eq!(w.get(0, 0).re, 3.0 / 25.0, epsilon = 1e-15);
    assert_abs_diff_eq!(w.get(1, 0).re, 4.0 / 25.0, epsilon = 1e-15);

    let dup = ComplexVector::from_real(&[1.0, 2.0]).unwrap();
    let singular = ComplexMatrix::from_columns(&[dup.clone(), dup]).unwrap();
    assert!(solve_gram(&singular, DEFAULT_GRAM_TOLERANCE).is_err());
}

fn max_identity_residual(h: &ComplexMatrix, w: &ComplexMatrix) -> f64 {
    let g = h.adjoint_times(w).unwrap();
    let mut worst: f64 = 0.0;
    for r in 0..g.rows() {
        for c in 0..g.cols() {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((g.get(r, c) - target).norm());
        }
    }
    worst
}

#[test]
fn gram_solve_residual_over_random_draws() {
    let mut s = RngStream::new(21, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let cols: Vec<ComplexVector> = (0..4).map(|_| sample_cgauss_vec(&mut s, 8).unwrap()).collect();
        let h = ComplexMatrix::from_columns(&cols).unwrap();
        let w = solve_gram(&h, DEFAULT_GRAM_TOLERANCE).unwrap();
        worst = worst.max(max_identity_residual(&h, &w));
    }
    assert!(worst <= 1e-10, "residual {worst:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_product_is_hermitian(seed in any::<u64>(), dim in 1usize..12) {
        let mut s = RngStream::new(seed, 0);
        let x = sample_cgauss_vec(&mut s, dim).unwrap();
        let y = sample_cgauss_vec(&mut s, dim).unwrap();
        let xy = hermitian_inner(&x, &y).unwrap();
        let yx = hermitian_inner(&y, &x).unwrap();
        prop_assert!((xy - yx.conj()).norm() <= 1e-12 * (1.0 + xy.norm()));
        let xx = hermitian_inner(&x, &x).unwrap();
        prop_assert!(xx.im == 0.0 && xx.re >= 0.0);
        prop_assert!((xx.re - x.norm_sqr()).abs() <= 1e-12 * xx.re);
    }

    #[test]
    fn same_stream_same_values(seed in any::<u64>(), id in any::<u32>(), dim in 1usize..10) {
        let a = sample_cgauss_vec(&mut RngStream::new(seed, id as u64), dim).unwrap();
        let b = sample_cgauss_vec(&mut RngStream::new(seed, id as u64), dim).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn gram_solve_inverts(seed in any::<u64>(), m in 2usize..10, u_frac in 0.0f64..1.0) {
        let u = 1 + ((m - 1) as f64 * u_frac) as usize;
        let mut s = RngStream::new(seed, 0);
        let cols: Vec<ComplexVector> = (0..u).map(|_| sample_cgauss_vec(&mut s, m).unwrap()).collect();
        let h = ComplexMatrix::from_columns(&cols).unwrap();
        let w = solve_gram(&h, DEFAULT_GRAM_TOLERANCE).unwrap();
        prop_assert!(max_identity_residual(&h, &w) <= 1e-9);
    }
}
