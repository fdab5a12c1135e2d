#![allow(dead_code)]

use meanforge_core::{HermitianMatrix, RationalWeight, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn w(p: u64, q: u64) -> RationalWeight {
    RationalWeight::new(p, q).unwrap()
}

/// Log-uniform on `[lo, hi]`.
pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

pub fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize, complex: bool) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = if complex {
            rng.sample(StandardNormal)
        } else {
            0.0
        };
        C64::new(re, im)
    })
}

/// Unitary factor of a Gaussian matrix.
pub fn unitary(rng: &mut impl Rng, n: usize, complex: bool) -> DMatrix<C64> {
    gaussian(rng, n, n, complex).qr().q()
}

/// `U diag(values) U*`.
pub fn with_spectrum(u: &DMatrix<C64>, values: &[f64]) -> HermitianMatrix {
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| C64::from(v)),
    ));
    HermitianMatrix::new(u * d * u.adjoint()).unwrap()
}

/// Positive definite with eigenvalues log-uniform in `[1, cond]` times a random scale.
pub fn random_pd(rng: &mut impl Rng, n: usize, cond: f64, complex: bool) -> HermitianMatrix {
    let u = unitary(rng, n, complex);
    let scale = log_uniform(rng, 1e-2, 1e2);
    let values: Vec<f64> = (0..n)
        .map(|_| scale * log_uniform(rng, 1.0, cond))
        .collect();
    with_spectrum(&u, &values)
}

/// Positive semidefinite, sometimes singular.
pub fn random_psd(rng: &mut impl Rng, n: usize, complex: bool) -> HermitianMatrix {
    let u = unitary(rng, n, complex);
    let values: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random_bool(0.15) {
                0.0
            } else {
                log_uniform(rng, 1e-2, 1e2)
            }
        })
        .collect();
    with_spectrum(&u, &values)
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize, complex: bool) -> HermitianMatrix {
    let g = gaussian(rng, n, n, complex);
    HermitianMatrix::new((&g + g.adjoint()) * C64::from(0.5)).unwrap()
}

pub fn random_weight(rng: &mut impl Rng) -> RationalWeight {
    let q = rng.random_range(2..=64u64);
    w(rng.random_range(1..q), q)
}
