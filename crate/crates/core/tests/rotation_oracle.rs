//! Wigner-D against the matrix exponential of the angular-momentum generator.

use nalgebra::DMatrix;
use proptest::prelude::*;
use wigner_cs::sampling::{MeasureKind, SamplePoint};
use wigner_cs::special_functions::{wigner_D, WignerIndex};
use wigner_cs::Complex64;

/// `<k| exp(-iθ J_y) |n>` for spin `j`, rows and columns ordered `m = -j..=j`.
fn small_d(j: u32, theta: f64) -> DMatrix<Complex64> {
    let dim = (2 * j + 1) as usize;
    let jf = j as f64;
    let mut jp = DMatrix::<Complex64>::zeros(dim, dim);
    for col in 0..dim - 1 {
        let m = col as f64 - jf;
        jp[(col + 1, col)] = Complex64::new((jf * (jf + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let jy = (&jp - jp.adjoint()) / Complex64::new(0.0, 2.0);
    (jy * Complex64::new(0.0, -theta)).exp()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn matches_rotation_matrix(j in 0u32..=4, theta in 0.0..std::f64::consts::PI, phi in 0.0..6.28f64, chi in 0.0..6.28f64) {
        let d = small_d(j, theta);
        let norm = ((2 * j + 1) as f64 / (8.0 * std::f64::consts::PI.powi(2))).sqrt();
        let point = SamplePoint::new(theta, phi, chi, MeasureKind::Product);
        for k in -(j as i32)..=j as i32 {
            for n in -(j as i32)..=j as i32 {
                let entry = d[((k + j as i32) as usize, (n + j as i32) as usize)];
                let want = entry * norm * Complex64::from_polar(1.0, -(k as f64 * phi + n as f64 * chi));
                let got = wigner_D(WignerIndex::new(j, k, n).unwrap(), &point);
                prop_assert!((got - want).norm() < 1e-12, "j={} k={} n={} got {} want {}", j, k, n, got, want);
            }
        }
    }
}

#[test]
fn unitarity_of_rows_at_degree_two() {
    let point = SamplePoint::new(0.9, 0.4, 2.2, MeasureKind::Product);
    let norm = (5.0 / (8.0 * std::f64::consts::PI.powi(2))).sqrt();
    for k in -2..=2 {
        let s: f64 = (-2..=2)
            .map(|n| (wigner_D(WignerIndex::new(2, k, n).unwrap(), &point) / norm).norm_sqr())
            .sum();
        assert!((s - 1.0).abs() < 1e-13);
    }
}
