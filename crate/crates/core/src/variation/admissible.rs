use serde::{Deserialize, Serialize};

use super::{Result, VariationError, VariationFunctional};
use crate::numeric::compensated_sum;

/// Advisory numerical probe of the two gauge conditions: bounded doubling
/// ratio `sup φ(s)/φ(t)` over `t ≤ s ≤ 2t`, and convergence of
/// `Σ_j 2^{2j} φ(2^{−j})`. Not a proof.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub j_max: u32,
    pub ratio_sup_estimate: f64,
    /// `Σ_{j ≤ j_max} 2^{2j} φ(2^{−j})`.
    pub partial_sum: f64,
    /// Dyadic mass over `(J/2, J]` divided by the mass over `(J/4, J/2]`.
    /// Terms decaying like `j^{−s}` give about `2^{1−s}`; a flat or growing
    /// series gives `≥ 1`.
    pub tail_trend: f64,
    pub admissible: bool,
}

/// Doubling ratios above this are treated as unbounded.
const RATIO_CEILING: f64 = 1e6;
/// Tail trends at or above this are treated as a non-converging series.
const TREND_CEILING: f64 = 0.75;
/// Largest probe depth; `2^{−2j}` must stay a normal double.
pub const MAX_DYADIC_DEPTH: u32 = 500;

/// `2^{2j} φ(2^{−j})`.
pub(crate) fn dyadic_weight(phi: &VariationFunctional, j: i32) -> f64 {
    let u = 2f64.powi(-j);
    phi.eval(u) / u / u
}

pub fn phi_admissible(phi: &VariationFunctional, j_max: u32) -> Result<AdmissibilityReport> {
    phi.validate()?;
    if !(8..=MAX_DYADIC_DEPTH).contains(&j_max) {
        return Err(VariationError::BadGrid(format!("j_max = {j_max} outside [8, {MAX_DYADIC_DEPTH}]")));
    }
    let weights: Vec<f64> = (0..=j_max as i32).map(|j| dyadic_weight(phi, j)).collect();
    let partial_sum = compensated_sum(weights.iter().copied());

    let band = |from: u32, to: u32| compensated_sum(((from + 1)..=to).map(|j| weights[j as usize]));
    let recent = band(j_max / 2, j_max);
    let earlier = band(j_max / 4, j_max / 2);
    let tail_trend = if earlier > 0.0 {
        recent / earlier
    } else if recent > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };

    let mut ratio_sup: f64 = 0.0;
    let steps = 8;
    for m in -(steps * j_max as i32)..=(steps * 4) {
        let t = 2f64.powf(m as f64 / steps as f64);
        let ft = phi.eval(t);
        for q in 1..=steps {
            let s = t * 2f64.powf(q as f64 / steps as f64);
            let fs = phi.eval(s);
            let r = if ft > 0.0 {
                fs / ft
            } else if fs > 0.0 {
                f64::INFINITY
            } else {
                continue;
            };
            ratio_sup = ratio_sup.max(r);
        }
    }

    let admissible = ratio_sup.is_finite() && ratio_sup < RATIO_CEILING && tail_trend < TREND_CEILING;
    Ok(AdmissibilityReport { j_max, ratio_sup_estimate: ratio_sup, partial_sum, tail_trend, admissible })
}
