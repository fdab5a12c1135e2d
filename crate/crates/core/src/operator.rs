//! Weighted operator means of positive definite matrices and the refined
//! operator Young inequalities.
//!
//! Every geometric-type quantity here has the form `A^{1/2} f(X) A^{1/2}` with
//! `X = A^{-1/2} B A^{-1/2}` and `f` a scalar function applied through the
//! spectral calculus. [`GeometricFrame`] decomposes `X` once and assembles any
//! such `f`, so a whole refinement series costs a single eigendecomposition
//! plus one congruence.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{fractional_power, loewner_compare, HermitianMatrix, LoewnerVerdict};
use crate::scalar::root_gap;
use crate::schedule::{DyadicSchedule, RationalWeight, ScheduleEntry};

/// `A^{1/2}` together with the decomposed `X = A^{-1/2} B A^{-1/2}`.
#[derive(Debug, Clone)]
pub struct GeometricFrame {
    a_half: HermitianMatrix,
    x: HermitianMatrix,
}

impl GeometricFrame {
    pub fn new(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                left: a.dim(),
                right: b.dim(),
            });
        }
        a.require_pd("A")?;
        b.require_pd("B")?;
        let a_half = fractional_power(a, 0.5)?;
        let a_neg_half = fractional_power(a, -0.5)?;
        let x = a_neg_half.congruence(b);
        x.eigen()?;
        Ok(Self { a_half, x })
    }

    /// `A^{1/2} f(X) A^{1/2}`.
    pub fn assemble(&self, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
        let e = self.x.eigen()?;
        let values: Vec<f64> = e
            .eigenvalues
            .iter()
            .map(|&x| f(x.max(f64::MIN_POSITIVE)))
            .collect();
        Ok(self.a_half.congruence(&e.assemble(&values)))
    }

    /// `A ♯t B = A^{1/2} X^t A^{1/2}`.
    pub fn geometric(&self, t: f64) -> Result<HermitianMatrix> {
        self.assemble(|x| x_power(x, t))
    }

    /// Eigenvalues of `X`, ascending.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(self.x.eigen()?.eigenvalues.iter().copied().collect())
    }
}

fn x_power(x: f64, t: f64) -> f64 {
    x.powf(t)
}

/// `r_k [X^p - 2 X^{(p+q)/2} + X^q] = r_k (X^{p/2} - X^{q/2})^2` as a scalar function of `x`.
fn lower_term(e: &ScheduleEntry, x: f64) -> f64 {
    let g = root_gap(1.0, x, e.lower_exponent(), e.upper_exponent());
    e.r() * g * g
}

/// The same bracket at the reflected exponents `1-p`, `1-q`.
fn reflected_term(e: &ScheduleEntry, x: f64) -> f64 {
    let g = root_gap(x, 1.0, e.lower_exponent(), e.upper_exponent());
    e.r() * g * g
}

/// `r_k [H_p - 2 H_{(p+q)/2} + H_q]` in the variable `x`.
fn heinz_term(e: &ScheduleEntry, x: f64) -> f64 {
    0.5 * (lower_term(e, x) + reflected_term(e, x))
}

fn series_sum(schedule: &DyadicSchedule, x: f64, term: fn(&ScheduleEntry, f64) -> f64) -> f64 {
    schedule.entries().iter().map(|e| term(e, x)).sum()
}

/// The four ν-weighted means of two positive definite matrices.
#[derive(Debug, Clone)]
pub struct OperatorMeanBundle {
    pub nabla: HermitianMatrix,
    pub sharp: HermitianMatrix,
    pub harmonic: HermitianMatrix,
    pub heinz: HermitianMatrix,
}

fn inverse(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    fractional_power(m, -1.0)
}

fn arithmetic(a: &HermitianMatrix, b: &HermitianMatrix, v: f64) -> HermitianMatrix {
    &a.scaled(1.0 - v) + &b.scaled(v)
}

fn harmonic(a: &HermitianMatrix, b: &HermitianMatrix, v: f64) -> Result<HermitianMatrix> {
    inverse(&arithmetic(&inverse(a)?, &inverse(b)?, v))
}

pub fn operator_means(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    nu: RationalWeight,
) -> Result<OperatorMeanBundle> {
    let frame = GeometricFrame::new(a, b)?;
    let v = nu.to_f64();
    Ok(OperatorMeanBundle {
        nabla: arithmetic(a, b, v),
        sharp: frame.geometric(v)?,
        harmonic: harmonic(a, b, v)?,
        heinz: frame.assemble(|x| 0.5 * (x_power(x, v) + x_power(x, 1.0 - v)))?,
    })
}

/// `A ♯t B` for a real `t`.
pub fn geometric_mean(a: &HermitianMatrix, b: &HermitianMatrix, t: f64) -> Result<HermitianMatrix> {
    GeometricFrame::new(a, b)?.geometric(t)
}

/// Terms `r_k [A♯_p B - 2 A♯_{(p+q)/2} B + A♯_q B]` and their running sums.
#[derive(Debug, Clone)]
pub struct OperatorSeries {
    pub terms: Vec<HermitianMatrix>,
    pub partial_sums: Vec<HermitianMatrix>,
    pub exact: bool,
}

impl OperatorSeries {
    pub fn sum(&self) -> Option<&HermitianMatrix> {
        self.partial_sums.last()
    }
}

pub fn operator_refinement_sum(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    schedule: &DyadicSchedule,
) -> Result<OperatorSeries> {
    let frame = GeometricFrame::new(a, b)?;
    let terms = schedule
        .entries()
        .iter()
        .map(|e| frame.assemble(|x| lower_term(e, x)))
        .collect::<Result<Vec<_>>>()?;
    let mut partial_sums: Vec<HermitianMatrix> = Vec::with_capacity(terms.len());
    for t in &terms {
        let next = match partial_sums.last() {
            Some(s) => s + t,
            None => t.clone(),
        };
        partial_sums.push(next);
    }
    Ok(OperatorSeries {
        terms,
        partial_sums,
        exact: schedule.is_exact(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefinedOperatorYoung {
    /// `A♯νB + Σ(...) <= A∇νB`.
    pub lower: LoewnerVerdict,
    /// `A∇νB <= A♯νB + (A - 2A♯B + B) - Σ(reflected ...)`.
    pub reverse: LoewnerVerdict,
}

/// Refined operator Young inequality and its reverse.
///
/// The reverse bound subtracts the series at the reflected exponents
/// `1 - m_k/2^k`, `1 - (m_k+1)/2^k`, which is what the scalar reverse
/// inequality gives when applied to `X`.
pub fn refined_operator_young(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    schedule: &DyadicSchedule,
    tol: f64,
) -> Result<RefinedOperatorYoung> {
    let frame = GeometricFrame::new(a, b)?;
    let v = schedule.nu().to_f64();
    let nabla = arithmetic(a, b, v);
    let lower_bound = frame.assemble(|x| x_power(x, v) + series_sum(schedule, x, lower_term))?;
    let upper_bound = frame.assemble(|x| {
        let d = 1.0 - x.sqrt();
        x_power(x, v) + d * d - series_sum(schedule, x, reflected_term)
    })?;
    Ok(RefinedOperatorYoung {
        lower: loewner_compare(&lower_bound, &nabla, tol)?,
        reverse: loewner_compare(&nabla, &upper_bound, tol)?,
    })
}

/// Verdicts for `lower <= middle` and `middle <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sandwich {
    pub lower: LoewnerVerdict,
    pub upper: LoewnerVerdict,
}

impl Sandwich {
    fn new(
        lower: &HermitianMatrix,
        middle: &HermitianMatrix,
        upper: &HermitianMatrix,
        tol: f64,
    ) -> Result<Self> {
        Ok(Self {
            lower: loewner_compare(lower, middle, tol)?,
            upper: loewner_compare(middle, upper, tol)?,
        })
    }

    pub fn holds(&self) -> bool {
        self.lower.holds && self.upper.holds
    }
}

/// The three sandwiches between the geometric, arithmetic and harmonic means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometricHarmonicChain {
    /// `A♯νB <= A♯νB + Σ <= A∇νB`.
    pub direct: Sandwich,
    /// The same with `A⁻¹`, `B⁻¹`.
    pub inverted: Sandwich,
    /// `A!νB <= {A⁻¹♯νB⁻¹ + Σ⁻}⁻¹ <= A♯νB`, where `Σ⁻` is the series of the inverses.
    pub harmonic: Sandwich,
}

/// `(A♯νB, A♯νB + Σ, A∇νB)` for one frame.
fn refinement_triple(
    frame: &GeometricFrame,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    schedule: &DyadicSchedule,
) -> Result<[HermitianMatrix; 3]> {
    let v = schedule.nu().to_f64();
    Ok([
        frame.geometric(v)?,
        frame.assemble(|x| x_power(x, v) + series_sum(schedule, x, lower_term))?,
        arithmetic(a, b, v),
    ])
}

pub fn geometric_harmonic_chain(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    schedule: &DyadicSchedule,
    tol: f64,
) -> Result<GeometricHarmonicChain> {
    let frame = GeometricFrame::new(a, b)?;
    let [sharp, refined, nabla] = refinement_triple(&frame, a, b, schedule)?;
    let direct = Sandwich::new(&sharp, &refined, &nabla, tol)?;

    let (a_inv, b_inv) = (inverse(a)?, inverse(b)?);
    let inv_frame = GeometricFrame::new(&a_inv, &b_inv)?;
    let [inv_sharp, inv_refined, inv_nabla] =
        refinement_triple(&inv_frame, &a_inv, &b_inv, schedule)?;
    let inverted = Sandwich::new(&inv_sharp, &inv_refined, &inv_nabla, tol)?;

    let harmonic_mean = harmonic(a, b, schedule.nu().to_f64())?;
    let middle = inverse(&inv_refined)?;
    let harmonic = Sandwich::new(&harmonic_mean, &middle, &sharp, tol)?;

    Ok(GeometricHarmonicChain {
        direct,
        inverted,
        harmonic,
    })
}

/// `A!νB <= A♯νB <= A∇νB`.
pub fn mean_chain(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    nu: RationalWeight,
    tol: f64,
) -> Result<Sandwich> {
    let m = operator_means(a, b, nu)?;
    Sandwich::new(&m.harmonic, &m.sharp, &m.nabla, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorHeinzBounds {
    /// `Hν(A,B) + Σ r_k[H_p - 2H_{(p+q)/2} + H_q] <= A∇B`.
    pub lower: LoewnerVerdict,
    /// `A∇B <= Hν(A,B) + (A - 2A♯B + B) - Σ r_k[...]`.
    pub upper: LoewnerVerdict,
}

pub fn operator_heinz_bounds(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    schedule: &DyadicSchedule,
    tol: f64,
) -> Result<OperatorHeinzBounds> {
    let frame = GeometricFrame::new(a, b)?;
    let v = schedule.nu().to_f64();
    let mid = arithmetic(a, b, 0.5);
    let heinz = |x: f64| 0.5 * (x_power(x, v) + x_power(x, 1.0 - v));
    let lower_bound = frame.assemble(|x| heinz(x) + series_sum(schedule, x, heinz_term))?;
    let upper_bound = frame.assemble(|x| {
        let d = 1.0 - x.sqrt();
        heinz(x) + d * d - series_sum(schedule, x, heinz_term)
    })?;
    Ok(OperatorHeinzBounds {
        lower: loewner_compare(&lower_bound, &mid, tol)?,
        upper: loewner_compare(&mid, &upper_bound, tol)?,
    })
}
