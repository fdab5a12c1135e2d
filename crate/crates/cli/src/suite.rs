//! Per-trial evaluation of every inequality of the selected levels.

use std::collections::BTreeMap;

use meanforge_core::hilbert_schmidt::{
    baseline_hs, direct_breakdown, entrywise_oracle, lower_verdict, upper_verdict, HsBreakdown,
    HsInstance,
};
use meanforge_core::matrix::loewner_compare;
use meanforge_core::operator::{
    geometric_harmonic_chain, mean_chain, operator_heinz_bounds, operator_refinement_sum,
    refined_operator_young,
};
use meanforge_core::scalar::{
    baseline_bounds, heinz_refinements, refined_young_lower, refined_young_reverse,
    squared_refinements, weighted_means, ScalarPair,
};
use meanforge_core::schedule::make_schedule;
use meanforge_core::{
    DyadicSchedule, HermitianMatrix, InequalityVerdict, LoewnerVerdict, RationalWeight,
    VerdictKind, C64,
};
use nalgebra::DMatrix;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Level, TrialConfig};
use crate::generate::{
    self, gaussian_matrix, generate_commuting_pair, generate_pd, log_uniform, trial_seed,
};
use crate::report::{Summary, TrialReport};

/// Absolute agreement required between commuting-pair operator margins and
/// their scalar reductions (or the run tolerance, if looser), and relative
/// agreement between HS routes.
pub const AGREEMENT_TOLERANCE: f64 = 1e-9;

/// Condition number up to which the commuting-pair tolerance applies
/// unscaled; beyond it the allowance grows linearly with cond(A), tracking
/// the error of conjugating by A^{-1/2}.
pub const COMMUTING_REFERENCE_CONDITION: f64 = 1e4;

/// Scalar draws are log-uniform on this interval.
pub const SCALAR_RANGE: (f64, f64) = (1e-3, 1e3);

const SCALAR_TAG: u64 = 0x5CA1A2;
const OPERATOR_TAG: u64 = 0x0E2A70;
const HS_TAG: u64 = 0x45AB;

/// One checked inequality of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub id: String,
    pub kind: VerdictKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lhs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<f64>,
    /// `rhs - lhs`, or `λ_min(R - L)` for Loewner comparisons; absent on evaluation errors.
    pub margin: Option<f64>,
    /// Magnitude the tolerance is measured against.
    pub scale: Option<f64>,
    pub holds: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl VerdictRecord {
    fn scalar(id: &str, v: InequalityVerdict) -> Self {
        Self {
            id: id.to_string(),
            kind: v.kind,
            lhs: Some(v.lhs),
            rhs: Some(v.rhs),
            margin: Some(v.margin),
            scale: Some(v.scale),
            holds: v.holds,
            error: None,
        }
    }

    fn loewner(id: &str, v: LoewnerVerdict) -> Self {
        Self {
            id: id.to_string(),
            kind: VerdictKind::Inequality,
            lhs: None,
            rhs: None,
            margin: Some(v.margin),
            scale: Some(v.scale),
            holds: v.holds,
            error: None,
        }
    }

    /// The Loewner comparison read as an equality.
    fn loewner_equality(id: &str, v: LoewnerVerdict, tol: f64) -> Self {
        Self {
            kind: VerdictKind::Equality,
            holds: v.is_equality(tol),
            ..Self::loewner(id, v)
        }
    }

    fn failed(id: &str, error: String) -> Self {
        Self {
            id: id.to_string(),
            kind: VerdictKind::Inequality,
            lhs: None,
            rhs: None,
            margin: None,
            scale: None,
            holds: false,
            error: Some(error),
        }
    }

    pub fn is_equality_case(&self) -> bool {
        self.kind == VerdictKind::Equality && self.holds
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub nu: RationalWeight,
    /// SHA-256 of the generated instance data.
    pub digest: String,
    pub verdicts: Vec<VerdictRecord>,
    /// Quantities reported but never asserted.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub logged: BTreeMap<String, f64>,
}

/// Matrices supplied explicitly instead of generated per trial.
#[derive(Debug, Clone)]
pub struct ExplicitInstance {
    pub a: HermitianMatrix,
    pub b: HermitianMatrix,
    /// Defaults to the identity.
    pub x: Option<DMatrix<C64>>,
}

struct TrialBuilder {
    verdicts: Vec<VerdictRecord>,
    logged: BTreeMap<String, f64>,
    hasher: Sha256,
}

impl TrialBuilder {
    fn new() -> Self {
        Self {
            verdicts: Vec::new(),
            logged: BTreeMap::new(),
            hasher: Sha256::new(),
        }
    }

    fn scalar(&mut self, id: &str, v: InequalityVerdict) {
        self.verdicts.push(VerdictRecord::scalar(id, v));
    }

    fn loewner(&mut self, id: &str, v: LoewnerVerdict) {
        self.verdicts.push(VerdictRecord::loewner(id, v));
    }

    fn hash_f64(&mut self, x: f64) {
        self.hasher.update(x.to_bits().to_le_bytes());
    }

    fn hash_matrix(&mut self, m: &DMatrix<C64>) {
        self.hasher.update((m.nrows() as u64).to_le_bytes());
        for z in m.iter() {
            self.hash_f64(z.re);
            self.hash_f64(z.im);
        }
    }

    /// Runs one level, turning an evaluation error into a failed verdict.
    fn level(&mut self, name: &str, f: impl FnOnce(&mut Self) -> meanforge_core::Result<()>) {
        if let Err(e) = f(self) {
            self.verdicts.push(VerdictRecord::failed(
                &format!("{name}-evaluation"),
                e.to_string(),
            ));
        }
    }
}

fn level_rng(seed: u64, tag: u64) -> rand_chacha::ChaCha8Rng {
    generate::rng(generate::splitmix64(seed ^ tag))
}

fn scalar_level(
    t: &mut TrialBuilder,
    seed: u64,
    schedule: &DyadicSchedule,
    tol: f64,
) -> meanforge_core::Result<()> {
    let mut rng = level_rng(seed, SCALAR_TAG);
    let (a, b) = (
        log_uniform(&mut rng, SCALAR_RANGE.0, SCALAR_RANGE.1),
        log_uniform(&mut rng, SCALAR_RANGE.0, SCALAR_RANGE.1),
    );
    t.hash_f64(a);
    t.hash_f64(b);
    let nu = schedule.nu();
    let v = nu.to_f64();
    let pair = ScalarPair::new(a, b)?;
    let (scale, sq_scale) = (pair.scale(), pair.squared_scale());
    let m = weighted_means(pair, nu);

    t.scalar(
        "chain-harmonic-sharp",
        InequalityVerdict::at_most(m.harmonic, m.sharp, scale, tol),
    );
    t.scalar(
        "chain-sharp-nabla",
        InequalityVerdict::at_most(m.sharp, m.nabla, scale, tol),
    );

    let lower = refined_young_lower(pair, schedule);
    let reverse = refined_young_reverse(pair, schedule);
    t.scalar(
        "y1",
        InequalityVerdict::at_most(lower.value, m.nabla, scale, tol),
    );
    t.scalar(
        "y2",
        InequalityVerdict::at_most(m.nabla, reverse.value, scale, tol),
    );
    t.scalar(
        "y1-refines-sharp",
        InequalityVerdict::at_most(m.sharp, lower.value, scale, tol),
    );
    t.scalar(
        "y1-monotone",
        InequalityVerdict::at_most(0.0, min_step(&lower.partial_sums), scale, tol),
    );
    t.scalar(
        "y2-monotone",
        InequalityVerdict::at_most(0.0, -max_step(&reverse.partial_sums), scale, tol),
    );
    if schedule.is_exact() {
        t.scalar(
            "dyadic-equality",
            InequalityVerdict::equal(lower.value, m.nabla, scale, tol),
        );
    }

    let sq = squared_refinements(pair, schedule);
    let squares = (1.0 - v) * a * a + v * b * b;
    let square = m.nabla * m.nabla;
    t.scalar(
        "y3",
        InequalityVerdict::at_most(sq.squares_lower.value, squares, sq_scale, tol),
    );
    t.scalar(
        "y4",
        InequalityVerdict::at_most(squares, sq.squares_upper.value, sq_scale, tol),
    );
    t.scalar(
        "y5",
        InequalityVerdict::at_most(sq.square_lower.value, square, sq_scale, tol),
    );
    t.scalar(
        "y6",
        InequalityVerdict::at_most(square, sq.square_upper.value, sq_scale, tol),
    );

    let base = baseline_bounds(pair, nu, tol);
    t.scalar("re1-lower", base.re1.lower);
    t.scalar("re1-upper", base.re1.upper);
    t.scalar("re2-lower", base.re2.lower);
    t.scalar("re2-upper", base.re2.upper);
    t.scalar("zw-lower", base.zhao_wu.lower);
    t.scalar("zw-upper", base.zhao_wu.upper);
    let e = if v <= 0.5 { "e10" } else { "e11" };
    t.scalar(&format!("{e}-lower"), base.squared_zhao_wu.lower);
    t.scalar(&format!("{e}-upper"), base.squared_zhao_wu.upper);

    let h = heinz_refinements(pair, schedule);
    let mid = 0.5 * (a + b);
    t.scalar(
        "heinz-lower",
        InequalityVerdict::at_most(h.lower.value, mid, scale, tol),
    );
    t.scalar(
        "heinz-upper",
        InequalityVerdict::at_most(mid, h.upper.value, scale, tol),
    );
    Ok(())
}

/// Smallest increment of a sequence, `0` for fewer than two entries.
fn min_step(xs: &[f64]) -> f64 {
    xs.windows(2)
        .map(|w| w[1] - w[0])
        .reduce(f64::min)
        .unwrap_or(0.0)
}

fn max_step(xs: &[f64]) -> f64 {
    xs.windows(2)
        .map(|w| w[1] - w[0])
        .reduce(f64::max)
        .unwrap_or(0.0)
}

fn operator_checks(
    t: &mut TrialBuilder,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    schedule: &DyadicSchedule,
    tol: f64,
) -> meanforge_core::Result<()> {
    let young = refined_operator_young(a, b, schedule, tol)?;
    t.loewner("op-young-lower", young.lower);
    t.loewner("op-young-reverse", young.reverse);

    let chain = geometric_harmonic_chain(a, b, schedule, tol)?;
    t.loewner("op-chain-direct-lower", chain.direct.lower);
    t.loewner("op-chain-direct-upper", chain.direct.upper);
    t.loewner("op-chain-inverted-lower", chain.inverted.lower);
    t.loewner("op-chain-inverted-upper", chain.inverted.upper);
    t.loewner("op-chain-harmonic-lower", chain.harmonic.lower);
    t.loewner("op-chain-harmonic-upper", chain.harmonic.upper);

    let means = mean_chain(a, b, schedule.nu(), tol)?;
    t.loewner("op-means-lower", means.lower);
    t.loewner("op-means-upper", means.upper);

    let heinz = operator_heinz_bounds(a, b, schedule, tol)?;
    t.loewner("op-heinz-lower", heinz.lower);
    t.loewner("op-heinz-upper", heinz.upper);

    let series = operator_refinement_sum(a, b, schedule)?;
    let zero = HermitianMatrix::from_diagonal(&vec![0.0; a.dim()]);
    let mut worst: Option<LoewnerVerdict> = None;
    for term in &series.terms {
        let v = loewner_compare(&zero, term, tol)?;
        if worst.is_none_or(|w| v.margin < w.margin) {
            worst = Some(v);
        }
    }
    if let Some(w) = worst {
        t.loewner("op-series-psd", w);
    }

    if schedule.is_exact() {
        t.verdicts.push(VerdictRecord::loewner_equality(
            "op-dyadic-equality",
            young.lower,
            tol,
        ));
        t.verdicts.push(VerdictRecord::loewner_equality(
            "op-chain-harmonic-dyadic-equality",
            chain.harmonic.lower,
            tol,
        ));
    }
    Ok(())
}

/// Largest gap between operator margins for a commuting pair and the smallest
/// scalar margins over its eigenvalue pairs.
fn commuting_gap(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    a_spectrum: &[f64],
    b_spectrum: &[f64],
    schedule: &DyadicSchedule,
    tol: f64,
) -> meanforge_core::Result<f64> {
    let nu = schedule.nu();
    let mut scalar = [f64::INFINITY; 4];
    for (&x, &y) in a_spectrum.iter().zip(b_spectrum) {
        let pair = ScalarPair::new(x, y)?;
        let nabla = weighted_means(pair, nu).nabla;
        let h = heinz_refinements(pair, schedule);
        let mid = 0.5 * (x + y);
        let margins = [
            nabla - refined_young_lower(pair, schedule).value,
            refined_young_reverse(pair, schedule).value - nabla,
            mid - h.lower.value,
            h.upper.value - mid,
        ];
        for (s, m) in scalar.iter_mut().zip(margins) {
            *s = s.min(m);
        }
    }
    let young = refined_operator_young(a, b, schedule, tol)?;
    let heinz = operator_heinz_bounds(a, b, schedule, tol)?;
    let operator = [
        young.lower.margin,
        young.reverse.margin,
        heinz.lower.margin,
        heinz.upper.margin,
    ];
    Ok(operator
        .iter()
        .zip(&scalar)
        .map(|(o, s)| (o - s).abs())
        .fold(0.0, f64::max))
}

fn operator_level(
    t: &mut TrialBuilder,
    seed: u64,
    config: &TrialConfig,
    schedule: &DyadicSchedule,
    explicit: Option<&ExplicitInstance>,
) -> meanforge_core::Result<()> {
    let tol = config.tol;
    match explicit {
        Some(inst) => {
            t.hash_matrix(inst.a.as_matrix());
            t.hash_matrix(inst.b.as_matrix());
            operator_checks(t, &inst.a, &inst.b, schedule, tol)
        }
        None => {
            let mut rng = level_rng(seed, OPERATOR_TAG);
            let a = generate_pd(
                rng.next_u64(),
                config.dim,
                config.condition_cap,
                config.field,
            );
            let b = generate_pd(
                rng.next_u64(),
                config.dim,
                config.condition_cap,
                config.field,
            );
            t.hash_matrix(a.as_matrix());
            t.hash_matrix(b.as_matrix());
            operator_checks(t, &a, &b, schedule, tol)?;

            let pair = generate_commuting_pair(
                rng.next_u64(),
                config.dim,
                config.condition_cap,
                config.field,
            );
            t.hash_matrix(pair.a.as_matrix());
            t.hash_matrix(pair.b.as_matrix());
            let gap = commuting_gap(
                &pair.a,
                &pair.b,
                &pair.a_spectrum,
                &pair.b_spectrum,
                schedule,
                tol,
            )?;
            let (lo, hi) = pair
                .a_spectrum
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| {
                    (lo.min(x), hi.max(x))
                });
            let scale = (hi / lo / COMMUTING_REFERENCE_CONDITION).max(1.0);
            t.scalar(
                "op-commuting-reduction",
                InequalityVerdict::at_most(gap, 0.0, scale, AGREEMENT_TOLERANCE.max(tol)),
            );
            Ok(())
        }
    }
}

fn route_gap(x: &HsBreakdown, y: &HsBreakdown) -> f64 {
    let fields = |b: &HsBreakdown| -> Vec<f64> {
        let mut v = vec![
            b.mixed_norm_sq,
            b.commutator_norm_sq,
            b.convex_norm_sq,
            b.minus_variant_norm_sq,
        ];
        v.extend(&b.tail_terms);
        v.extend(&b.reflected_tail_terms);
        v
    };
    fields(x)
        .iter()
        .zip(fields(y))
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

fn hs_checks(
    t: &mut TrialBuilder,
    inst: &HsInstance,
    schedule: &DyadicSchedule,
    tol: f64,
) -> meanforge_core::Result<()> {
    let r0 = schedule.r0();
    let direct = direct_breakdown(inst, schedule)?;
    let oracle = entrywise_oracle(inst, schedule)?;
    let convex = oracle.convex_norm_sq;

    t.scalar("hs-lower", lower_verdict(&oracle, r0, tol));
    t.scalar("hs-upper", upper_verdict(&oracle, r0, tol));
    let scale = direct.magnitude().max(oracle.magnitude());
    t.scalar(
        "hs-routes",
        InequalityVerdict::at_most(route_gap(&direct, &oracle), 0.0, scale, AGREEMENT_TOLERANCE),
    );

    let base = baseline_hs(inst, tol)?;
    t.scalar("hs-b1", base.lower);
    t.scalar("hs-b2", base.upper);
    // the refinement truncated after its first tail term
    let lower_two = oracle.lower_partial_bounds(r0)[oracle.tail_terms.len().min(1)];
    let upper_two = oracle.mixed_norm_sq + (1.0 - r0) * (1.0 - r0) * oracle.commutator_norm_sq
        - oracle.reflected_tail_terms.first().copied().unwrap_or(0.0);
    t.scalar(
        "hs-dominates-b1",
        InequalityVerdict::at_most(
            oracle.mixed_norm_sq + base.lower.lhs,
            lower_two,
            convex,
            tol,
        ),
    );
    t.scalar(
        "hs-dominates-b2",
        InequalityVerdict::at_most(
            upper_two,
            oracle.mixed_norm_sq + base.upper.rhs,
            convex,
            tol,
        ),
    );
    if !oracle.tail_terms.is_empty() {
        t.scalar(
            "hs-monotone",
            InequalityVerdict::at_most(
                0.0,
                min_step(&oracle.lower_partial_bounds(r0)),
                convex,
                tol,
            ),
        );
    }

    let minus = oracle.minus_variant_norm_sq;
    if (minus - convex).abs() > tol * convex.max(minus) {
        t.logged.insert("hs-minus-variant-norm-sq".into(), minus);
        t.logged.insert(
            "hs-minus-variant-lower-margin".into(),
            minus - oracle.lower_bound(r0),
        );
        t.logged.insert(
            "hs-minus-variant-upper-margin".into(),
            oracle.upper_bound(r0) - minus,
        );
    }
    Ok(())
}

fn hs_level(
    t: &mut TrialBuilder,
    seed: u64,
    config: &TrialConfig,
    schedule: &DyadicSchedule,
    explicit: Option<&ExplicitInstance>,
) -> meanforge_core::Result<()> {
    let nu = schedule.nu();
    let inst = match explicit {
        Some(e) => {
            let n = e.a.dim();
            let x = e.x.clone().unwrap_or_else(|| DMatrix::identity(n, n));
            HsInstance::new(e.a.clone(), e.b.clone(), x, nu)?
        }
        None => {
            let mut rng = level_rng(seed, HS_TAG);
            let a = generate_pd(
                rng.next_u64(),
                config.dim,
                config.condition_cap,
                config.field,
            );
            let b = generate_pd(
                rng.next_u64(),
                config.dim,
                config.condition_cap,
                config.field,
            );
            let x = gaussian_matrix(&mut rng, config.dim, config.field);
            HsInstance::new(a, b, x, nu)?
        }
    };
    t.hash_matrix(inst.a().as_matrix());
    t.hash_matrix(inst.b().as_matrix());
    t.hash_matrix(inst.x());
    hs_checks(t, &inst, schedule, config.tol)
}

fn run_trial(
    config: &TrialConfig,
    level: Level,
    index: usize,
    explicit: Option<&ExplicitInstance>,
) -> TrialRecord {
    let seed = trial_seed(config.master_seed, index as u64);
    let nu = config.nu_for(index);
    let mut t = TrialBuilder::new();
    t.hasher.update(nu.to_string().as_bytes());
    match make_schedule(nu, config.depth) {
        Ok(schedule) => {
            if level.includes(Level::Scalar) && explicit.is_none() {
                t.level("scalar", |t| scalar_level(t, seed, &schedule, config.tol));
            }
            if level.includes(Level::Operator) {
                t.level("operator", |t| {
                    operator_level(t, seed, config, &schedule, explicit)
                });
            }
            if level.includes(Level::Hsnorm) {
                t.level("hs", |t| hs_level(t, seed, config, &schedule, explicit));
            }
        }
        Err(e) => t
            .verdicts
            .push(VerdictRecord::failed("schedule-evaluation", e.to_string())),
    }
    let digest = t
        .hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    TrialRecord {
        trial: index,
        seed,
        nu,
        digest,
        verdicts: t.verdicts,
        logged: t.logged,
    }
}

fn run(
    config: &TrialConfig,
    level: Level,
    explicit: Option<&ExplicitInstance>,
) -> Result<TrialReport, String> {
    config.validate()?;
    let trials: Vec<TrialRecord> = (0..config.trials)
        .into_par_iter()
        .map(|i| run_trial(config, level, i, explicit))
        .collect();
    let summary = Summary::from_trials(&trials);
    Ok(TrialReport {
        config: config.clone(),
        level,
        seed_derivation: generate::SEED_DERIVATION.to_string(),
        trials,
        summary,
    })
}

/// Generates `config.trials` instances and checks every inequality of `level`.
pub fn run_suite(config: &TrialConfig, level: Level) -> Result<TrialReport, String> {
    run(config, level, None)
}

/// Checks the matrix-level inequalities on fixed matrices, one trial per
/// configured trial index (so each weight of `nu_list` is visited in turn).
/// The scalar level has no explicit form and is skipped.
pub fn run_suite_with_instance(
    config: &TrialConfig,
    level: Level,
    instance: &ExplicitInstance,
) -> Result<TrialReport, String> {
    if level == Level::Scalar {
        return Err("explicit matrices cannot drive the scalar level".into());
    }
    let n = instance.a.dim();
    if instance.b.dim() != n
        || instance
            .x
            .as_ref()
            .is_some_and(|x| x.nrows() != n || x.ncols() != n)
    {
        return Err("matrix dimensions disagree".into());
    }
    run(config, level, Some(instance))
}
