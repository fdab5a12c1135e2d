//! Exact coefficient sequences for the dyadic refinement series.
//!
//! For a weight `0 < ν < 1` the series use two integer-valued sequences:
//!
//! - `m_k = ⌊2^k ν⌋`, the index of the dyadic interval `[m_k/2^k, (m_k+1)/2^k)`
//!   that contains `ν`;
//! - `r_0 = min{ν, 1-ν}` and `r_k = min{2 r_{k-1}, 1 - 2 r_{k-1}}`.
//!
//! Both are computed here without any floating point, so a dyadic weight
//! `t/2^n` is recognised exactly by `r_n = 0`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Depth used when a caller does not ask for a specific truncation.
pub const DEFAULT_DEPTH: usize = 64;

/// Largest supported depth; `m_k < 2^k` must fit in a `u128`.
pub const MAX_DEPTH: usize = 127;

/// A weight `ν = numerator / denominator` in lowest terms with `0 < ν < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RationalWeight {
    numerator: u64,
    denominator: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl RationalWeight {
    pub fn new(numerator: u64, denominator: u64) -> Result<Self> {
        if denominator == 0 || numerator == 0 || numerator >= denominator {
            return Err(Error::WeightOutOfRange {
                numerator,
                denominator,
            });
        }
        let g = gcd(numerator, denominator);
        Ok(Self {
            numerator: numerator / g,
            denominator: denominator / g,
        })
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    /// `1 - ν`.
    pub fn complement(&self) -> Self {
        Self {
            numerator: self.denominator - self.numerator,
            denominator: self.denominator,
        }
    }

    /// `n` such that `ν = t / 2^n` with `t` odd, if the denominator is a power of two.
    pub fn dyadic_exponent(&self) -> Option<u32> {
        self.denominator
            .is_power_of_two()
            .then(|| self.denominator.trailing_zeros())
    }

    /// `min{ν, 1-ν}` as an exact fraction over the same denominator.
    fn reflection_distance(&self) -> u64 {
        self.numerator.min(self.denominator - self.numerator)
    }
}

impl fmt::Display for RationalWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

impl FromStr for RationalWeight {
    type Err = Error;

    /// Accepts `p/q` or a plain decimal such as `0.25`, converted exactly to `p/10^d`.
    fn from_str(s: &str) -> Result<Self> {
        let input = s.trim();
        let fail = |reason: &str| Error::WeightParse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        if let Some((p, q)) = input.split_once('/') {
            let p: u64 = p.trim().parse().map_err(|_| fail("bad numerator"))?;
            let q: u64 = q.trim().parse().map_err(|_| fail("bad denominator"))?;
            return RationalWeight::new(p, q);
        }
        let (int_part, frac_part) = input.split_once('.').unwrap_or((input, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(fail("empty"));
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(fail("expected p/q or a decimal"));
        }
        if frac_part.len() > 18 {
            return Err(fail("too many decimal digits"));
        }
        let digits = format!("{int_part}{frac_part}");
        let numerator: u64 = digits.parse().map_err(|_| fail("decimal out of range"))?;
        let denominator = 10u64.pow(frac_part.len() as u32);
        RationalWeight::new(numerator, denominator)
    }
}

impl TryFrom<String> for RationalWeight {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        value.parse()
    }
}

impl From<RationalWeight> for String {
    fn from(value: RationalWeight) -> Self {
        value.to_string()
    }
}

/// One row `(k, m_k, r_k)` of a schedule. `r_k` is held as a numerator over
/// the weight's denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleEntry {
    pub k: usize,
    pub m: u128,
    r_numerator: u64,
    denominator: u64,
}

impl ScheduleEntry {
    /// `r_k` in lowest terms.
    pub fn r_exact(&self) -> (u64, u64) {
        if self.r_numerator == 0 {
            return (0, 1);
        }
        let g = gcd(self.r_numerator, self.denominator);
        (self.r_numerator / g, self.denominator / g)
    }

    pub fn r(&self) -> f64 {
        self.r_numerator as f64 / self.denominator as f64
    }

    pub fn r_is_zero(&self) -> bool {
        self.r_numerator == 0
    }

    /// `m_k / 2^k`.
    pub fn lower_exponent(&self) -> f64 {
        dyadic_to_f64(self.m, self.k)
    }

    /// `(m_k + 1) / 2^k`.
    pub fn upper_exponent(&self) -> f64 {
        dyadic_to_f64(self.m + 1, self.k)
    }

    /// `(2 m_k + 1) / 2^(k+1)`, the midpoint of the dyadic interval.
    pub fn midpoint_exponent(&self) -> f64 {
        dyadic_to_f64(2 * self.m + 1, self.k + 1)
    }
}

fn dyadic_to_f64(numerator: u128, exponent: usize) -> f64 {
    // Scaling by a power of two is exact.
    numerator as f64 * (-(exponent as f64)).exp2()
}

/// The first `depth` coefficients `(m_k, r_k)` for a weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicSchedule {
    nu: RationalWeight,
    entries: Vec<ScheduleEntry>,
    termination_index: Option<usize>,
}

impl DyadicSchedule {
    pub fn nu(&self) -> RationalWeight {
        self.nu
    }

    pub fn depth(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[ScheduleEntry] {
        &self.entries
    }

    /// Smallest `k` with `r_k = 0`, when it lies within the computed depth.
    pub fn termination_index(&self) -> Option<usize> {
        self.termination_index
    }

    /// True when every coefficient past this depth vanishes (`ν = t/2^n` with
    /// `n <= depth`), so a series truncated here equals the full series.
    pub fn is_exact(&self) -> bool {
        self.nu
            .dyadic_exponent()
            .is_some_and(|n| n as usize <= self.depth())
    }

    /// `r_0 = min{ν, 1-ν}` as a float.
    pub fn r0(&self) -> f64 {
        self.entries[0].r()
    }

    /// The same weight truncated to a shorter depth.
    pub fn truncated(&self, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::ZeroDepth);
        }
        let depth = depth.min(self.entries.len());
        Ok(Self {
            nu: self.nu,
            entries: self.entries[..depth].to_vec(),
            termination_index: self.termination_index.filter(|&n| n < depth),
        })
    }
}

/// Computes `(m_k, r_k)` for `k = 0..depth` in exact integer arithmetic.
pub fn make_schedule(nu: RationalWeight, depth: usize) -> Result<DyadicSchedule> {
    if depth == 0 {
        return Err(Error::ZeroDepth);
    }
    if depth > MAX_DEPTH {
        return Err(Error::DepthTooLarge {
            depth,
            max: MAX_DEPTH,
        });
    }
    let q = nu.denominator;
    let mut entries = Vec::with_capacity(depth);
    let mut termination_index = None;

    // 2^k ν = m + frac/q with 0 <= frac < q
    let mut m: u128 = 0;
    let mut frac: u64 = nu.numerator;
    let mut r: u64 = nu.reflection_distance();
    for k in 0..depth {
        if k > 0 {
            let doubled = 2 * frac as u128;
            let carry = doubled >= q as u128;
            m = 2 * m + carry as u128;
            frac = (doubled - if carry { q as u128 } else { 0 }) as u64;
            // r <= q/2 so both candidates are nonnegative
            r = (2 * r).min(q - 2 * r);
        }
        if r == 0 && termination_index.is_none() {
            termination_index = Some(k);
        }
        entries.push(ScheduleEntry {
            k,
            m,
            r_numerator: r,
            denominator: q,
        });
    }
    Ok(DyadicSchedule {
        nu,
        entries,
        termination_index,
    })
}

/// Schedule of `1 - ν`.
///
/// Panics if the reflected floors disagree with `⌊2^k(1-ν)⌋ = 2^k - m_k - 1`
/// at some `k` where `2^k ν` is not an integer, or if the `r` sequences differ;
/// both are identities of the recursion.
pub fn reflect_schedule(nu: RationalWeight, depth: usize) -> Result<DyadicSchedule> {
    let original = make_schedule(nu, depth)?;
    let reflected = make_schedule(nu.complement(), depth)?;
    for (o, r) in original.entries.iter().zip(&reflected.entries) {
        assert_eq!(
            o.r_numerator, r.r_numerator,
            "r_{} differs under reflection",
            o.k
        );
        let integral = (nu.numerator as u128) << o.k == o.m * nu.denominator as u128;
        if !integral {
            assert_eq!(
                r.m,
                (1u128 << o.k) - o.m - 1,
                "reflected floor at k={}",
                o.k
            );
        }
    }
    Ok(reflected)
}
