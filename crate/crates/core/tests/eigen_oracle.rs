//! Eigenvalues against closed-form characteristic-polynomial roots.

use proctheory::numerics::{eigenvalues_hermitian, is_psd, CMatrix, C64};
use proctheory::random::{gaussian_matrix, trial_rng};
use proctheory::Tolerances;

/// Roots of `λ² − tr λ + det` for a Hermitian 2×2 matrix.
fn roots_2x2(a: &CMatrix) -> [f64; 2] {
    let (p, q, b) = (a[(0, 0)].re, a[(1, 1)].re, a[(0, 1)]);
    let mid = 0.5 * (p + q);
    let rad = (0.25 * (p - q) * (p - q) + b.norm_sqr()).sqrt();
    [mid - rad, mid + rad]
}

/// Real roots of the monic cubic `λ³ + c2 λ² + c1 λ + c0` by the trigonometric method.
fn roots_cubic(c2: f64, c1: f64, c0: f64) -> [f64; 3] {
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2.powi(3) / 27.0 - c2 * c1 / 3.0 + c0;
    let m = 2.0 * (-p / 3.0).max(0.0).sqrt();
    let arg = if m == 0.0 { 0.0 } else { (3.0 * q / (p * m)).clamp(-1.0, 1.0) };
    let theta = arg.acos() / 3.0;
    let mut r: [f64; 3] =
        [0, 1, 2].map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - c2 / 3.0);
    r.sort_by(f64::total_cmp);
    r
}

/// Characteristic polynomial coefficients of a Hermitian 3×3 matrix.
fn charpoly_3x3(a: &CMatrix) -> (f64, f64, f64) {
    let e = |r: usize, c: usize| a[(r, c)];
    let tr = (e(0, 0) + e(1, 1) + e(2, 2)).re;
    let minors = (e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0)) + (e(0, 0) * e(2, 2) - e(0, 2) * e(2, 0)) + (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1));
    let det = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
        + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
    (-tr, minors.re, -det.re)
}

fn hermitian(seed: u64, t: u64, n: usize) -> CMatrix {
    let g = gaussian_matrix(&mut trial_rng(seed, 99, t), n, n);
    (&g + &g.adjoint()).scale_real(0.5)
}

#[test]
fn two_by_two_matches_closed_form() {
    let tol = Tolerances::default();
    for t in 0..200 {
        let a = hermitian(1, t, 2);
        let got = eigenvalues_hermitian(&a, &tol).unwrap();
        let want = roots_2x2(&a);
        for k in 0..2 {
            assert!((got[k] - want[k]).abs() <= 1e-12, "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn three_by_three_matches_cubic_roots() {
    let tol = Tolerances::default();
    for t in 0..200 {
        let a = hermitian(2, t, 3);
        let got = eigenvalues_hermitian(&a, &tol).unwrap();
        let (c2, c1, c0) = charpoly_3x3(&a);
        let want = roots_cubic(c2, c1, c0);
        for k in 0..3 {
            assert!((got[k] - want[k]).abs() <= 1e-9, "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn frozen_values() {
    let tol = Tolerances::default();
    // Pauli Y has eigenvalues ±1; [[2, 1-i], [1+i, 3]] has (5 ± √(1 + 8)) / 2 = 1, 4
    let y = CMatrix::new(2, 2, vec![C64::new(0., 0.), C64::new(0., -1.), C64::new(0., 1.), C64::new(0., 0.)]).unwrap();
    assert_eq!(eigenvalues_hermitian(&y, &tol).unwrap().iter().map(|x| x.round()).collect::<Vec<_>>(), vec![-1.0, 1.0]);
    let m = CMatrix::new(2, 2, vec![C64::new(2., 0.), C64::new(1., -1.), C64::new(1., 1.), C64::new(3., 0.)]).unwrap();
    let ev = eigenvalues_hermitian(&m, &tol).unwrap();
    assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 4.0).abs() < 1e-12);
    // |+⟩⟨+| − 1e-3 𝟙 is not PSD, |+⟩⟨+| is
    let plus = CMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
    assert!(is_psd(&plus, &tol).unwrap());
    assert!(!is_psd(&(&plus - &CMatrix::identity(2).scale_real(1e-3)), &tol).unwrap());
    assert!(eigenvalues_hermitian(&CMatrix::from_real(2, 2, &[0., 1., 0., 0.]).unwrap(), &tol).is_err());
}
