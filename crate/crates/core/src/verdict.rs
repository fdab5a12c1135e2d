use serde::{Deserialize, Serialize};

/// Whether a verdict checks `lhs <= rhs` or `lhs == rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictKind {
    Inequality,
    Equality,
}

/// Outcome of checking one scalar-valued inequality `lhs <= rhs`
/// (or the equality `lhs = rhs`).
///
/// `margin = rhs - lhs`. The comparison tolerance is `tol * scale`, where the
/// scale is chosen by the caller to match the magnitude of both sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityVerdict {
    pub kind: VerdictKind,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub scale: f64,
    pub holds: bool,
    pub equality: bool,
}

impl InequalityVerdict {
    /// Checks `lhs <= rhs` up to `tol * scale`.
    pub fn at_most(lhs: f64, rhs: f64, scale: f64, tol: f64) -> Self {
        let margin = rhs - lhs;
        let slack = tol * scale;
        Self {
            kind: VerdictKind::Inequality,
            lhs,
            rhs,
            margin,
            scale,
            holds: margin >= -slack,
            equality: margin.abs() <= slack,
        }
    }

    /// Checks `lhs >= rhs` up to `tol * scale`; stored as `rhs <= lhs`.
    pub fn at_least(lhs: f64, rhs: f64, scale: f64, tol: f64) -> Self {
        Self::at_most(rhs, lhs, scale, tol)
    }

    /// Checks `lhs = rhs` up to `tol * scale`.
    pub fn equal(lhs: f64, rhs: f64, scale: f64, tol: f64) -> Self {
        let mut v = Self::at_most(lhs, rhs, scale, tol);
        v.kind = VerdictKind::Equality;
        v.holds = v.equality;
        v
    }
}
