//! Deterministic instance generation.

use meanforge_core::{HermitianMatrix, C64};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::Field;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index`: the `index + 1`-th output of splitmix64 started at `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

pub const SEED_DERIVATION: &str =
    "trial_seed = splitmix64(master_seed + (trial + 1) * 0x9E3779B97F4A7C15 mod 2^64); \
     each level draws from ChaCha8 seeded with splitmix64(trial_seed ^ level_tag)";

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut impl Rng, n: usize, field: Field) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = match field {
            Field::Real => 0.0,
            Field::Complex => rng.sample(StandardNormal),
        };
        C64::new(re, im)
    })
}

/// `x` log-uniform on `[lo, hi]`.
pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..=hi.ln()).exp()
}

/// `M M* + εI` for Gaussian `M`, with the smallest `ε >= 0` that brings the
/// condition number down to `condition_cap`.
pub fn generate_pd(seed: u64, dim: usize, condition_cap: f64, field: Field) -> HermitianMatrix {
    assert!(dim >= 1, "dimension must be positive");
    let mut rng = rng(seed);
    let m = gaussian_matrix(&mut rng, dim, field);
    let g = HermitianMatrix::new(&m * m.adjoint()).expect("M M* is Hermitian");
    let e = g.eigen().expect("Gram matrix decomposes");
    let (lo, hi) = (e.min_eigenvalue().max(0.0), e.max_eigenvalue());
    if condition_cap <= 1.0 {
        return HermitianMatrix::identity(dim).scaled(hi.max(f64::MIN_POSITIVE));
    }
    // (hi + ε) / (lo + ε) = cap
    let eps = ((hi - condition_cap * lo) / (condition_cap - 1.0)).max(0.0);
    // a singular Gram matrix with hi = 0 cannot occur for Gaussian M, but keep λ_min > 0
    let eps = if lo + eps > 0.0 {
        eps
    } else {
        f64::MIN_POSITIVE.max(hi)
    };
    let shifted: Vec<f64> = e.eigenvalues.iter().map(|&l| l.max(0.0) + eps).collect();
    e.assemble(&shifted)
}

/// Uniformly random unitary (orthogonal for the real field) matrix.
pub fn random_unitary(rng: &mut impl Rng, n: usize, field: Field) -> DMatrix<C64> {
    let qr = gaussian_matrix(rng, n, field).qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column phases so the distribution is Haar
    let phases = DVector::from_fn(n, |i, _| {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            d / C64::from(d.norm())
        } else {
            C64::from(1.0)
        }
    });
    q * DMatrix::from_diagonal(&phases)
}

/// A commuting pair `U diag(a) U*`, `U diag(b) U*` with spectra log-uniform in
/// `[1/condition_cap, 1]`.
pub struct CommutingPair {
    pub a: HermitianMatrix,
    pub b: HermitianMatrix,
    pub a_spectrum: Vec<f64>,
    pub b_spectrum: Vec<f64>,
}

pub fn generate_commuting_pair(
    seed: u64,
    dim: usize,
    condition_cap: f64,
    field: Field,
) -> CommutingPair {
    let mut rng = rng(seed);
    let u = random_unitary(&mut rng, dim, field);
    let cap = condition_cap.max(1.0);
    let mut spectrum = || -> Vec<f64> {
        (0..dim)
            .map(|_| log_uniform(&mut rng, cap.recip(), 1.0))
            .collect()
    };
    let (a_spectrum, b_spectrum) = (spectrum(), spectrum());
    let assemble = |values: &[f64]| {
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            dim,
            values.iter().map(|&v| C64::from(v)),
        ));
        HermitianMatrix::new(&u * d * u.adjoint())
            .expect("unitary congruence of a real diagonal is Hermitian")
    };
    CommutingPair {
        a: assemble(&a_spectrum),
        b: assemble(&b_spectrum),
        a_spectrum,
        b_spectrum,
    }
}
