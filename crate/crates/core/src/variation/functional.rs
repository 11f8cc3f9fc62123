use serde::{Deserialize, Serialize};

use super::{Result, VariationError};

/// Gauge `φ` of a generalized variation `Σ φ(|Δ|)`, with `φ(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VariationFunctional {
    /// `u^p`.
    Power { p: f64 },
    /// Taylor's gauge `u² / (2 ln* ln* u)`.
    TaylorPsi,
    /// `(u / log₂* u)²`, the simplest admissible gauge decaying only
    /// logarithmically faster than `u²`.
    DampedSquare,
    /// Tabulated gauge through `(u, φ(u))` knots.
    Table { knots: Vec<(f64, f64)>, rule: Interpolation },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    /// Piecewise linear through `(0, 0)` and the knots; the last segment
    /// is extended beyond the final knot (floored at zero).
    Linear,
    /// Piecewise linear in `(ln u, ln φ)`; end segments extend as power laws.
    LogLog,
}

/// `ln* u := 1 ∨ |ln u|`.
pub fn ln_star(u: f64) -> f64 {
    1f64.max(u.ln().abs())
}

/// `log* u := 1 ∨ |log₂ u|`.
pub fn log2_star(u: f64) -> f64 {
    1f64.max(u.log2().abs())
}

/// Taylor's function with `ψ(0) := 0`.
pub fn psi(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    u * u / (2.0 * ln_star(ln_star(u)))
}

impl VariationFunctional {
    pub fn power(p: f64) -> Self {
        Self::Power { p }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(VariationError::BadFunctional(m));
        match self {
            Self::Power { p } if !(p.is_finite() && *p > 0.0) => bad(format!("power {p} must be positive")),
            Self::Table { knots, rule } => {
                if knots.is_empty() {
                    return bad("table needs at least one knot".into());
                }
                if *rule == Interpolation::LogLog && knots.len() < 2 {
                    return bad("log-log table needs at least two knots".into());
                }
                for w in knots.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return bad("table knots must have strictly increasing u".into());
                    }
                }
                for &(u, f) in knots {
                    if !(u > 0.0 && u.is_finite() && f.is_finite() && f >= 0.0) {
                        return bad(format!("bad knot ({u}, {f})"));
                    }
                    if *rule == Interpolation::LogLog && f == 0.0 {
                        return bad("log-log table needs positive values".into());
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `φ(u)` for `u ≥ 0`; negative arguments are treated as `0`.
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        match self {
            Self::Power { p } => {
                if *p == 2.0 {
                    u * u
                } else if *p == 1.0 {
                    u
                } else {
                    u.powf(*p)
                }
            }
            Self::TaylorPsi => psi(u),
            Self::DampedSquare => {
                let r = u / log2_star(u);
                r * r
            }
            Self::Table { knots, rule } => table_eval(knots, *rule, u),
        }
    }

    /// Power gauges with `p ≤ 1` are subadditive: the finest partition
    /// attains the supremum.
    pub(crate) fn finest_is_optimal(&self) -> bool {
        matches!(self, Self::Power { p } if *p <= 1.0)
    }

    /// Convex gauges never gain from a partition point strictly inside a
    /// monotone run, so only turning points need to be considered.
    pub(crate) fn is_convex(&self) -> bool {
        matches!(self, Self::Power { p } if *p >= 1.0)
    }

    /// Non-decreasing gauges admit range-based pruning in the DP.
    pub(crate) fn is_monotone(&self) -> bool {
        match self {
            Self::Power { .. } | Self::TaylorPsi => true,
            Self::DampedSquare => false,
            Self::Table { knots, .. } => knots.windows(2).all(|w| w[1].1 >= w[0].1),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Power { p } => format!("power({p})"),
            Self::TaylorPsi => "taylor-psi".into(),
            Self::DampedSquare => "damped-square".into(),
            Self::Table { knots, .. } => format!("table({} knots)", knots.len()),
        }
    }
}

fn table_eval(knots: &[(f64, f64)], rule: Interpolation, u: f64) -> f64 {
    match rule {
        Interpolation::Linear => {
            let idx = knots.partition_point(|&(k, _)| k <= u);
            let (left, right) = if idx == 0 {
                ((0.0, 0.0), knots[0])
            } else if idx < knots.len() {
                (knots[idx - 1], knots[idx])
            } else if knots.len() == 1 {
                ((0.0, 0.0), knots[0])
            } else {
                (knots[knots.len() - 2], knots[knots.len() - 1])
            };
            let slope = (right.1 - left.1) / (right.0 - left.0);
            (left.1 + slope * (u - left.0)).max(0.0)
        }
        Interpolation::LogLog => {
            let lu = u.ln();
            let idx = knots.partition_point(|&(k, _)| k <= u);
            let seg = idx.clamp(1, knots.len() - 1);
            let (u0, f0) = knots[seg - 1];
            let (u1, f1) = knots[seg];
            let slope = (f1.ln() - f0.ln()) / (u1.ln() - u0.ln());
            (f0.ln() + slope * (lu - u0.ln())).exp()
        }
    }
}
