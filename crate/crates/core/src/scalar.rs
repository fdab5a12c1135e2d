//! Weighted means of two positive numbers and the refined Young inequalities.
//!
//! Notation: `a ∇ν b = (1-ν)a + νb`, `a ♯ν b = a^{1-ν} b^ν`, and
//! `Hν(a, b) = (a ♯ν b + a ♯_{1-ν} b) / 2`. For each schedule row
//! `(k, m_k, r_k)` write `p = m_k/2^k` and `q = (m_k+1)/2^k`. The refinement
//! series sum `r_k` times squared gaps between the geometric interpolants of
//! `a` and `b` at the two ends `p`, `q` of the dyadic interval holding `ν`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::schedule::{DyadicSchedule, RationalWeight};
use crate::verdict::InequalityVerdict;

/// Two positive reals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarPair {
    a: f64,
    b: f64,
}

impl ScalarPair {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
            return Err(Error::NonPositiveScalar { a, b });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn swapped(&self) -> Self {
        Self {
            a: self.b,
            b: self.a,
        }
    }

    /// Comparison scale for inequalities that are linear in `(a, b)`.
    pub fn scale(&self) -> f64 {
        self.a.max(self.b)
    }

    /// Comparison scale for inequalities between squares.
    pub fn squared_scale(&self) -> f64 {
        self.scale() * self.scale()
    }
}

/// `x^t` for `x >= 0`, with `0^0 = 1` and `0^t = 0` for `t > 0`.
pub fn positive_power(x: f64, t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else if x == 0.0 {
        0.0
    } else if t == 0.5 {
        x.sqrt()
    } else if t == -0.5 {
        x.sqrt().recip()
    } else {
        x.powf(t)
    }
}

/// `a^{1-t} b^t` given `ln a` and `ln b`.
fn interpolant(ln_a: f64, ln_b: f64, t: f64) -> f64 {
    ((1.0 - t) * ln_a + t * ln_b).exp()
}

/// `a^{1-p} b^p - a^{1-q} b^q` from logarithms, without cancellation when `p ≈ q`
/// or `a ≈ b`.
fn interpolant_gap(ln_a: f64, ln_b: f64, p: f64, q: f64) -> f64 {
    -interpolant(ln_a, ln_b, p) * ((q - p) * (ln_b - ln_a)).exp_m1()
}

/// `a^{1-p} b^p - a^{1-q} b^q`.
pub fn power_gap(a: f64, b: f64, p: f64, q: f64) -> f64 {
    interpolant_gap(a.ln(), b.ln(), p, q)
}

/// `(a^{1-p} b^p)^{1/2} - (a^{1-q} b^q)^{1/2}`.
pub fn root_gap(a: f64, b: f64, p: f64, q: f64) -> f64 {
    interpolant_gap(0.5 * a.ln(), 0.5 * b.ln(), p, q)
}

/// `a ♯t b = a^{1-t} b^t`, evaluated as `a (b/a)^t` like its matrix counterpart.
pub fn geometric(a: f64, b: f64, t: f64) -> f64 {
    a * (b / a).powf(t)
}

/// `Ht(a, b)`.
pub fn heinz(a: f64, b: f64, t: f64) -> f64 {
    0.5 * (geometric(a, b, t) + geometric(a, b, 1.0 - t))
}

/// The four weighted means of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanBundle {
    pub nabla: f64,
    pub sharp: f64,
    pub heinz: f64,
    pub harmonic: f64,
}

/// The Kittaneh–Manasrah constants `r = min{ν, 1-ν}` and `s = max{ν, 1-ν}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KmConstants {
    pub r: f64,
    pub s: f64,
}

impl KmConstants {
    pub fn new(nu: RationalWeight) -> Self {
        let nu = nu.to_f64();
        Self {
            r: nu.min(1.0 - nu),
            s: nu.max(1.0 - nu),
        }
    }
}

pub fn weighted_means(pair: ScalarPair, nu: RationalWeight) -> MeanBundle {
    let (a, b) = (pair.a, pair.b);
    let v = nu.to_f64();
    MeanBundle {
        nabla: (1.0 - v) * a + v * b,
        sharp: geometric(a, b, v),
        heinz: heinz(a, b, v),
        harmonic: 1.0 / ((1.0 - v) / a + v / b),
    }
}

/// A truncated refinement series `base ± Σ terms`.
///
/// `terms[i]` belongs to schedule index `first_index + i`. `partial_sums[i]`
/// is the bound after including `terms[0..=i]`; it is nondecreasing for
/// refinements of lower bounds and nonincreasing for upper bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesEvaluation {
    pub base: f64,
    pub first_index: usize,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub value: f64,
    /// Every term beyond the computed depth is zero.
    pub exact: bool,
}

impl SeriesEvaluation {
    fn adding(base: f64, first_index: usize, terms: Vec<f64>, exact: bool) -> Self {
        Self::accumulate(base, first_index, terms, 1.0, exact)
    }

    fn subtracting(base: f64, first_index: usize, terms: Vec<f64>, exact: bool) -> Self {
        Self::accumulate(base, first_index, terms, -1.0, exact)
    }

    fn accumulate(base: f64, first_index: usize, terms: Vec<f64>, sign: f64, exact: bool) -> Self {
        let mut total = 0.0;
        let partial_sums = terms
            .iter()
            .map(|t| {
                total += t;
                base + sign * total
            })
            .collect();
        Self {
            base,
            first_index,
            terms,
            partial_sums,
            value: base + sign * total,
            exact,
        }
    }
}

/// `r_k [ (a^{1-p} b^p)^{1/2} - (a^{1-q} b^q)^{1/2} ]^2` for every schedule row from `from`.
fn root_terms(pair: ScalarPair, schedule: &DyadicSchedule, from: usize) -> Vec<f64> {
    let (la, lb) = (0.5 * pair.a.ln(), 0.5 * pair.b.ln());
    schedule.entries()[from..]
        .iter()
        .map(|e| {
            let g = interpolant_gap(la, lb, e.lower_exponent(), e.upper_exponent());
            e.r() * (g * g)
        })
        .collect()
}

/// `r_k [ a^{1-p} b^p - a^{1-q} b^q ]^2` for every schedule row from `from`.
fn power_terms(pair: ScalarPair, schedule: &DyadicSchedule, from: usize) -> Vec<f64> {
    let (la, lb) = (pair.a.ln(), pair.b.ln());
    schedule.entries()[from..]
        .iter()
        .map(|e| {
            let g = interpolant_gap(la, lb, e.lower_exponent(), e.upper_exponent());
            e.r() * (g * g)
        })
        .collect()
}

/// Lower bound `a ♯ν b + Σ r_k [(a^{1-p}b^p)^{1/2} - (a^{1-q}b^q)^{1/2}]^2 <= a ∇ν b`,
/// an equality once a dyadic schedule has terminated.
pub fn refined_young_lower(pair: ScalarPair, schedule: &DyadicSchedule) -> SeriesEvaluation {
    let sharp = geometric(pair.a, pair.b, schedule.nu().to_f64());
    SeriesEvaluation::adding(sharp, 0, root_terms(pair, schedule, 0), schedule.is_exact())
}

/// Upper bound `a ∇ν b <= a ♯ν b + (√a - √b)^2 - Σ r_k [(a^p b^{1-p})^{1/2} - (a^q b^{1-q})^{1/2}]^2`.
pub fn refined_young_reverse(pair: ScalarPair, schedule: &DyadicSchedule) -> SeriesEvaluation {
    let sharp = geometric(pair.a, pair.b, schedule.nu().to_f64());
    let d = pair.a.sqrt() - pair.b.sqrt();
    SeriesEvaluation::subtracting(
        sharp + d * d,
        0,
        root_terms(pair.swapped(), schedule, 0),
        schedule.is_exact(),
    )
}

/// The four bounds obtained from the refined inequalities applied to squares.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquaredRefinements {
    /// Lower bound for `a² ∇ν b²`.
    pub squares_lower: SeriesEvaluation,
    /// Upper bound for `a² ∇ν b²`.
    pub squares_upper: SeriesEvaluation,
    /// Lower bound for `(a ∇ν b)²`.
    pub square_lower: SeriesEvaluation,
    /// Upper bound for `(a ∇ν b)²`.
    pub square_upper: SeriesEvaluation,
}

pub fn squared_refinements(pair: ScalarPair, schedule: &DyadicSchedule) -> SquaredRefinements {
    let exact = schedule.is_exact();
    let sharp = geometric(pair.a, pair.b, schedule.nu().to_f64());
    let sharp_sq = sharp * sharp;
    let diff_sq = (pair.a - pair.b) * (pair.a - pair.b);
    let r0 = schedule.r0();

    let squares_lower =
        SeriesEvaluation::adding(sharp_sq, 0, power_terms(pair, schedule, 0), exact);
    let squares_upper = SeriesEvaluation::subtracting(
        sharp_sq + diff_sq,
        0,
        power_terms(pair.swapped(), schedule, 0),
        exact,
    );
    let square_lower = SeriesEvaluation::adding(
        sharp_sq + r0 * r0 * diff_sq,
        1,
        power_terms(pair, schedule, 1),
        exact,
    );
    // The k >= 1 tail here is the one with a and b exchanged, inherited from
    // the upper bound for a² ∇ν b².
    let square_upper = SeriesEvaluation::subtracting(
        sharp_sq + (1.0 - r0) * (1.0 - r0) * diff_sq,
        1,
        power_terms(pair.swapped(), schedule, 1),
        exact,
    );
    SquaredRefinements {
        squares_lower,
        squares_upper,
        square_lower,
        square_upper,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeinzRefinements {
    /// `Hν + Σ r_k [H_p - 2 H_{(p+q)/2} + H_q] <= a ∇ b`.
    pub lower: SeriesEvaluation,
    /// `a ∇ b <= Hν + (√a - √b)^2 - Σ r_k [H_p - 2 H_{(p+q)/2} + H_q]`.
    pub upper: SeriesEvaluation,
}

/// Heinz-mean refinements of the arithmetic–geometric mean inequality.
///
/// `H_p - 2 H_{(p+q)/2} + H_q` is the average of the squared root gaps of
/// `(a, b)` and `(b, a)`, which is how the terms are evaluated.
pub fn heinz_refinements(pair: ScalarPair, schedule: &DyadicSchedule) -> HeinzRefinements {
    let exact = schedule.is_exact();
    let h = heinz(pair.a, pair.b, schedule.nu().to_f64());
    let terms: Vec<f64> = root_terms(pair, schedule, 0)
        .into_iter()
        .zip(root_terms(pair.swapped(), schedule, 0))
        .map(|(x, y)| 0.5 * (x + y))
        .collect();
    let d = pair.a.sqrt() - pair.b.sqrt();
    HeinzRefinements {
        lower: SeriesEvaluation::adding(h, 0, terms.clone(), exact),
        upper: SeriesEvaluation::subtracting(h + d * d, 0, terms, exact),
    }
}

/// Lower and upper verdicts of one two-sided bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoSided {
    pub lower: InequalityVerdict,
    pub upper: InequalityVerdict,
}

/// The earlier one- and two-step refinements, used as regression oracles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselineBounds {
    /// `a♯b + r(√a-√b)² <= a∇b <= a♯b + s(√a-√b)²`.
    pub re1: TwoSided,
    /// `r²(a-b)² <= (a∇b)² - (a♯b)² <= s²(a-b)²`.
    pub re2: TwoSided,
    /// Zhao–Wu refinement of `re1`, branch chosen by `ν <= 1/2`.
    pub zhao_wu: TwoSided,
    /// Zhao–Wu refinement of `re2` (`e10` for `ν <= 1/2`, `e11` otherwise).
    pub squared_zhao_wu: TwoSided,
}

/// `min{2ν, 1-2ν}` for `ν <= 1/2`, else `min{2(1-ν), 1-2(1-ν)}`.
fn zhao_wu_r(v: f64) -> f64 {
    let w = if v <= 0.5 { v } else { 1.0 - v };
    (2.0 * w).min(1.0 - 2.0 * w)
}

pub fn baseline_bounds(pair: ScalarPair, nu: RationalWeight, tol: f64) -> BaselineBounds {
    let (a, b) = (pair.a, pair.b);
    let v = nu.to_f64();
    let km = KmConstants::new(nu);
    let means = weighted_means(pair, nu);
    let (nabla, sharp) = (means.nabla, means.sharp);
    let scale = pair.scale();
    let sq_scale = pair.squared_scale();

    let root_diff_sq = (a.sqrt() - b.sqrt()).powi(2);
    let diff_sq = (a - b).powi(2);
    let gap = nabla - sharp;
    let sq_gap = nabla * nabla - sharp * sharp;

    let re1 = TwoSided {
        lower: InequalityVerdict::at_most(sharp + km.r * root_diff_sq, nabla, scale, tol),
        upper: InequalityVerdict::at_most(nabla, sharp + km.s * root_diff_sq, scale, tol),
    };
    let re2 = TwoSided {
        lower: InequalityVerdict::at_most(km.r * km.r * diff_sq, sq_gap, sq_scale, tol),
        upper: InequalityVerdict::at_most(sq_gap, km.s * km.s * diff_sq, sq_scale, tol),
    };

    let r = zhao_wu_r(v);
    let quarter = (a * b).powf(0.25);
    let root_ab = (a * b).sqrt();
    let (near_a, near_b) = ((quarter - a.sqrt()).powi(2), (quarter - b.sqrt()).powi(2));
    let (sq_near_a, sq_near_b) = ((root_ab - a).powi(2), (root_ab - b).powi(2));

    let (zhao_wu, squared_zhao_wu) = if v <= 0.5 {
        (
            TwoSided {
                lower: InequalityVerdict::at_most(r * near_a + v * root_diff_sq, gap, scale, tol),
                upper: InequalityVerdict::at_most(
                    gap,
                    (1.0 - v) * root_diff_sq - r * near_b,
                    scale,
                    tol,
                ),
            },
            TwoSided {
                lower: InequalityVerdict::at_most(
                    r * sq_near_a + v * v * diff_sq,
                    sq_gap,
                    sq_scale,
                    tol,
                ),
                upper: InequalityVerdict::at_most(
                    sq_gap,
                    (1.0 - v).powi(2) * diff_sq - r * sq_near_b,
                    sq_scale,
                    tol,
                ),
            },
        )
    } else {
        (
            TwoSided {
                lower: InequalityVerdict::at_most(
                    r * near_b + (1.0 - v) * root_diff_sq,
                    gap,
                    scale,
                    tol,
                ),
                upper: InequalityVerdict::at_most(gap, v * root_diff_sq - r * near_a, scale, tol),
            },
            TwoSided {
                lower: InequalityVerdict::at_most(
                    r * sq_near_b + (1.0 - v).powi(2) * diff_sq,
                    sq_gap,
                    sq_scale,
                    tol,
                ),
                upper: InequalityVerdict::at_most(
                    sq_gap,
                    v * v * diff_sq - r * sq_near_a,
                    sq_scale,
                    tol,
                ),
            },
        )
    };

    BaselineBounds {
        re1,
        re2,
        zhao_wu,
        squared_zhao_wu,
    }
}
