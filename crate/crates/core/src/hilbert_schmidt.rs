//! Hilbert–Schmidt norm refinements for `A, B` positive semidefinite and `X` arbitrary.
//!
//! Two independent evaluation routes are provided:
//!
//! - [`direct_breakdown`] forms every matrix product and takes Frobenius norms;
//! - [`entrywise_oracle`] diagonalizes `A = U diag(λ) U*`, `B = V diag(μ) V*`,
//!   sets `Y = U* X V`, and evaluates each squared norm as `Σ_ij w(λ_i, μ_j) |y_ij|²`.
//!
//! The verdicts use the entrywise route: its weights evaluate each tail gap
//! without cancellation, whereas the direct route subtracts nearly equal
//! matrices. The direct route serves as the cross-check.
//!
//! Throughout, `p = m_k/2^k` and `q = (m_k+1)/2^k`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{fractional_power, hs_norm, HermitianMatrix, C64};
use crate::scalar::{geometric, positive_power, power_gap};
use crate::schedule::{DyadicSchedule, RationalWeight};
use crate::verdict::InequalityVerdict;

/// `(A, B, X, ν)` with `A`, `B` positive semidefinite of the same size as `X`.
#[derive(Debug, Clone)]
pub struct HsInstance {
    a: HermitianMatrix,
    b: HermitianMatrix,
    x: DMatrix<C64>,
    nu: RationalWeight,
}

impl HsInstance {
    pub fn new(
        a: HermitianMatrix,
        b: HermitianMatrix,
        x: DMatrix<C64>,
        nu: RationalWeight,
    ) -> Result<Self> {
        a.require_psd("A")?;
        b.require_psd("B")?;
        let n = a.dim();
        if b.dim() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: b.dim(),
            });
        }
        if x.nrows() != n || x.ncols() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: x.nrows().max(x.ncols()),
            });
        }
        Ok(Self { a, b, x, nu })
    }

    pub fn a(&self) -> &HermitianMatrix {
        &self.a
    }

    pub fn b(&self) -> &HermitianMatrix {
        &self.b
    }

    pub fn x(&self) -> &DMatrix<C64> {
        &self.x
    }

    pub fn nu(&self) -> RationalWeight {
        self.nu
    }

    pub fn with_nu(&self, nu: RationalWeight) -> Self {
        Self { nu, ..self.clone() }
    }
}

/// All squared norms that appear in the refinements.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HsBreakdown {
    /// `||A^{1-ν} X B^ν||²`.
    pub mixed_norm_sq: f64,
    /// `||AX - XB||²`.
    pub commutator_norm_sq: f64,
    /// `r_k ||A^{1-p} X B^p - A^{1-q} X B^q||²` for `k = 1..depth`.
    pub tail_terms: Vec<f64>,
    /// `r_k ||A^p X B^{1-p} - A^q X B^{1-q}||²` for `k = 1..depth`.
    pub reflected_tail_terms: Vec<f64>,
    /// `||(1-ν) AX + ν XB||²`.
    pub convex_norm_sq: f64,
    /// `||(1-ν) AX - ν XB||²`, the other sign reading; only logged.
    pub minus_variant_norm_sq: f64,
}

impl HsBreakdown {
    /// `mixed + r_0² commutator + Σ tail`, the lower bound for `convex_norm_sq`.
    pub fn lower_bound(&self, r0: f64) -> f64 {
        self.mixed_norm_sq + r0 * r0 * self.commutator_norm_sq + self.tail_terms.iter().sum::<f64>()
    }

    /// `mixed + (1-r_0)² commutator - Σ reflected tail`, the upper bound.
    pub fn upper_bound(&self, r0: f64) -> f64 {
        self.mixed_norm_sq + (1.0 - r0) * (1.0 - r0) * self.commutator_norm_sq
            - self.reflected_tail_terms.iter().sum::<f64>()
    }

    /// Lower bounds after including `0..=i` tail terms, i.e. at depth `i + 2`.
    pub fn lower_partial_bounds(&self, r0: f64) -> Vec<f64> {
        let mut acc = self.mixed_norm_sq + r0 * r0 * self.commutator_norm_sq;
        let mut out = vec![acc];
        for t in &self.tail_terms {
            acc += t;
            out.push(acc);
        }
        out
    }

    fn fields(&self) -> impl Iterator<Item = f64> + '_ {
        [
            self.mixed_norm_sq,
            self.commutator_norm_sq,
            self.convex_norm_sq,
            self.minus_variant_norm_sq,
        ]
        .into_iter()
        .chain(self.tail_terms.iter().copied())
        .chain(self.reflected_tail_terms.iter().copied())
    }

    /// Largest field, used as the comparison scale between routes.
    pub fn magnitude(&self) -> f64 {
        self.fields().fold(0.0, f64::max)
    }
}

fn sq(x: f64) -> f64 {
    x * x
}

fn norm_sq(m: &DMatrix<C64>) -> f64 {
    sq(hs_norm(m))
}

/// Computes every field by forming the matrices and taking Frobenius norms.
pub fn direct_breakdown(inst: &HsInstance, schedule: &DyadicSchedule) -> Result<HsBreakdown> {
    let v = inst.nu.to_f64();
    let (a, b, x) = (inst.a.as_matrix(), inst.b.as_matrix(), &inst.x);
    let power_a = |t: f64| fractional_power(&inst.a, t).map(HermitianMatrix::into_matrix);
    let power_b = |t: f64| fractional_power(&inst.b, t).map(HermitianMatrix::into_matrix);
    // A^{1-s} X B^s
    let sandwich = |s: f64| -> Result<DMatrix<C64>> { Ok(power_a(1.0 - s)? * x * power_b(s)?) };

    let ax = a * x;
    let xb = x * b;
    let (one_minus, nu) = (C64::from(1.0 - v), C64::from(v));

    let mut tail_terms = Vec::new();
    let mut reflected_tail_terms = Vec::new();
    for e in schedule.entries().iter().skip(1) {
        let (p, q) = (e.lower_exponent(), e.upper_exponent());
        tail_terms.push(e.r() * norm_sq(&(sandwich(p)? - sandwich(q)?)));
        reflected_tail_terms.push(e.r() * norm_sq(&(sandwich(1.0 - p)? - sandwich(1.0 - q)?)));
    }

    Ok(HsBreakdown {
        mixed_norm_sq: norm_sq(&sandwich(v)?),
        commutator_norm_sq: norm_sq(&(&ax - &xb)),
        tail_terms,
        reflected_tail_terms,
        convex_norm_sq: norm_sq(&(&ax * one_minus + &xb * nu)),
        minus_variant_norm_sq: norm_sq(&(&ax * one_minus - &xb * nu)),
    })
}

/// Computes every field as a weighted sum over eigenvalue pairs.
pub fn entrywise_oracle(inst: &HsInstance, schedule: &DyadicSchedule) -> Result<HsBreakdown> {
    let ea = inst.a.eigen()?;
    let eb = inst.b.eigen()?;
    let y = ea.vectors.adjoint() * &inst.x * &eb.vectors;
    let lambda: Vec<f64> = ea.eigenvalues.iter().map(|l| l.max(0.0)).collect();
    let mu: Vec<f64> = eb.eigenvalues.iter().map(|m| m.max(0.0)).collect();

    let weighted = |w: &dyn Fn(f64, f64) -> f64| -> f64 {
        let mut total = 0.0;
        for (i, &l) in lambda.iter().enumerate() {
            for (j, &m) in mu.iter().enumerate() {
                total += w(l, m) * y[(i, j)].norm_sqr();
            }
        }
        total
    };
    // λ^{1-s} μ^s
    let mix = |l: f64, m: f64, s: f64| {
        if l > 0.0 && m > 0.0 {
            geometric(l, m, s)
        } else {
            positive_power(l, 1.0 - s) * positive_power(m, s)
        }
    };
    // λ^{1-p} μ^p - λ^{1-q} μ^q
    let gap = |l: f64, m: f64, p: f64, q: f64| {
        if l > 0.0 && m > 0.0 {
            power_gap(l, m, p, q)
        } else {
            mix(l, m, p) - mix(l, m, q)
        }
    };

    let v = inst.nu.to_f64();
    let mut tail_terms = Vec::new();
    let mut reflected_tail_terms = Vec::new();
    for e in schedule.entries().iter().skip(1) {
        let (p, q) = (e.lower_exponent(), e.upper_exponent());
        tail_terms.push(e.r() * weighted(&|l, m| sq(gap(l, m, p, q))));
        reflected_tail_terms.push(e.r() * weighted(&|l, m| sq(gap(m, l, p, q))));
    }

    Ok(HsBreakdown {
        mixed_norm_sq: weighted(&|l, m| sq(mix(l, m, v))),
        commutator_norm_sq: weighted(&|l, m| sq(l - m)),
        tail_terms,
        reflected_tail_terms,
        convex_norm_sq: weighted(&|l, m| sq((1.0 - v) * l + v * m)),
        minus_variant_norm_sq: weighted(&|l, m| sq((1.0 - v) * l - v * m)),
    })
}

fn check_schedule(inst: &HsInstance, schedule: &DyadicSchedule) -> Result<()> {
    if schedule.nu() != inst.nu {
        return Err(Error::WeightMismatch {
            schedule: schedule.nu().to_string(),
            instance: inst.nu.to_string(),
        });
    }
    Ok(())
}

/// `mixed + r_0² commutator + Σ tail <= convex`, scaled by `convex_norm_sq`.
pub fn lower_verdict(breakdown: &HsBreakdown, r0: f64, tol: f64) -> InequalityVerdict {
    InequalityVerdict::at_most(
        breakdown.lower_bound(r0),
        breakdown.convex_norm_sq,
        breakdown.convex_norm_sq,
        tol,
    )
}

/// `convex <= mixed + (1-r_0)² commutator - Σ reflected tail`.
pub fn upper_verdict(breakdown: &HsBreakdown, r0: f64, tol: f64) -> InequalityVerdict {
    InequalityVerdict::at_most(
        breakdown.convex_norm_sq,
        breakdown.upper_bound(r0),
        breakdown.convex_norm_sq,
        tol,
    )
}

pub fn hs_refined_lower(
    inst: &HsInstance,
    schedule: &DyadicSchedule,
    tol: f64,
) -> Result<InequalityVerdict> {
    check_schedule(inst, schedule)?;
    Ok(lower_verdict(
        &entrywise_oracle(inst, schedule)?,
        schedule.r0(),
        tol,
    ))
}

/// The tail subtracted here uses the reflected exponents; with the unreflected
/// tail the bound fails once the spectra of `A` and `B` are far apart.
pub fn hs_refined_upper(
    inst: &HsInstance,
    schedule: &DyadicSchedule,
    tol: f64,
) -> Result<InequalityVerdict> {
    check_schedule(inst, schedule)?;
    Ok(upper_verdict(
        &entrywise_oracle(inst, schedule)?,
        schedule.r0(),
        tol,
    ))
}

/// The Zhao–Wu Hilbert–Schmidt bounds on `||(1-ν)AX + νXB||² - ||A^{1-ν}XB^ν||²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HsBaselines {
    pub lower: InequalityVerdict,
    pub upper: InequalityVerdict,
    /// The bounded quantity `convex - mixed`.
    pub gap: f64,
}

pub fn baseline_hs(inst: &HsInstance, tol: f64) -> Result<HsBaselines> {
    let v = inst.nu.to_f64();
    let x = &inst.x;
    let (a, b) = (inst.a.as_matrix(), inst.b.as_matrix());
    let ax = a * x;
    let xb = x * b;
    let half = fractional_power(&inst.a, 0.5)?.into_matrix()
        * x
        * fractional_power(&inst.b, 0.5)?.into_matrix();
    let mixed = norm_sq(
        &(fractional_power(&inst.a, 1.0 - v)?.into_matrix()
            * x
            * fractional_power(&inst.b, v)?.into_matrix()),
    );
    let convex = norm_sq(&(&ax * C64::from(1.0 - v) + &xb * C64::from(v)));
    let gap = convex - mixed;
    let comm = norm_sq(&(&ax - &xb));
    let near_ax = norm_sq(&(&half - &ax));
    let near_xb = norm_sq(&(&half - &xb));

    let (w, lower_near, upper_near) = if v <= 0.5 {
        (v, near_ax, near_xb)
    } else {
        (1.0 - v, near_xb, near_ax)
    };
    let r = (2.0 * w).min(1.0 - 2.0 * w);
    let lower = w * w * comm + r * lower_near;
    let upper = (1.0 - w) * (1.0 - w) * comm - r * upper_near;
    Ok(HsBaselines {
        lower: InequalityVerdict::at_most(lower, gap, convex, tol),
        upper: InequalityVerdict::at_most(gap, upper, convex, tol),
        gap,
    })
}
