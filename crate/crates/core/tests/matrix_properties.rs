mod common;

use common::{gaussian, random_hermitian, random_pd, rng, unitary};
use meanforge_core::matrix::{eigh, fractional_power, hs_norm, loewner_compare, matrix_function};
use meanforge_core::{HermitianMatrix, C64};
use rand::Rng;

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

#[test]
fn spectral_mapping() {
    let mut rng = rng(11);
    for trial in 0..200 {
        let n = 1 + trial % 8;
        let a = random_hermitian(&mut rng, n, trial % 2 == 0);
        let f = |x: f64| x.powi(3) - 2.0 * x + x.sin();
        let fa = matrix_function(&a, f).unwrap();
        let mut expected: Vec<f64> = a
            .eigen()
            .unwrap()
            .eigenvalues
            .iter()
            .map(|&l| f(l))
            .collect();
        expected.sort_by(f64::total_cmp);
        let got = eigh(&fa).unwrap().eigenvalues;
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() <= 1e-10 * (1.0 + e.abs()), "{g} vs {e}");
        }
    }
}

#[test]
fn square_root_squares_back() {
    let mut rng = rng(12);
    for trial in 0..200 {
        let a = random_pd(&mut rng, 1 + trial % 8, 1e4, trial % 2 == 1);
        let h = fractional_power(&a, 0.5).unwrap();
        let back = h.as_matrix() * h.as_matrix();
        let err = (back - a.as_matrix()).norm();
        assert!(err <= 1e-10 * a.as_matrix().norm(), "trial {trial}: {err}");
    }
}

#[test]
fn hs_norm_identities() {
    let mut rng = rng(13);
    for trial in 0..200 {
        let (r, c) = (1 + trial % 7, 1 + (trial / 7) % 5);
        let m = gaussian(&mut rng, r, c, true);
        let n2 = hs_norm(&m).powi(2);
        let trace: C64 = (m.adjoint() * &m).trace();
        assert!((n2 - trace.re).abs() <= 1e-12 * n2);
        let sv_norm = m.singular_values().norm();
        assert!((hs_norm(&m) - sv_norm).abs() <= 1e-12 * sv_norm);
        let (u, v) = (unitary(&mut rng, r, true), unitary(&mut rng, c, true));
        let rotated = hs_norm(&(u * &m * v.adjoint()));
        assert!((rotated - hs_norm(&m)).abs() <= 1e-12 * hs_norm(&m));
    }
}

/// `f = g + h` with `h >= 0` on `[lo, hi]` but possibly negative outside it.
#[test]
fn pointwise_order_transfers() {
    let mut rng = rng(14);
    for trial in 0..200 {
        let n = 1 + trial % 8;
        let x = random_hermitian(&mut rng, n, trial % 2 == 0);
        let e = x.eigen().unwrap();
        let (lo, hi) = (e.min_eigenvalue(), e.max_eigenvalue());
        let g: Vec<f64> = (0..rng.random_range(1..6))
            .map(|_| rng.random_range(-3.0..3.0))
            .collect();
        let s: Vec<f64> = (0..rng.random_range(1..4))
            .map(|_| rng.random_range(-2.0..2.0))
            .collect();
        let c = rng.random_range(0.0..2.0);
        let d = if trial % 3 == 0 {
            0.0
        } else {
            rng.random_range(0.0..1.0)
        };
        let h = move |t: f64| c * (t - lo) * (hi - t) * horner(&s, t).powi(2) + d;
        let gf = |t: f64| horner(&g, t);
        let fx = matrix_function(&x, |t| gf(t) + h(t)).unwrap();
        let gx = matrix_function(&x, gf).unwrap();
        let v = loewner_compare(&gx, &fx, 1e-10).unwrap();
        let bound = -1e-10 * (1.0 + fx.spectral_norm().unwrap());
        assert!(v.margin >= bound, "trial {trial}: margin {}", v.margin);
    }
}

#[test]
fn rejects_non_hermitian() {
    let mut rng = rng(15);
    let m = gaussian(&mut rng, 3, 3, true);
    assert!(HermitianMatrix::new(m).is_err());
}
