use serde::{Deserialize, Serialize};

use super::{dp_sup, Result, VariationError, VariationFunctional};
use crate::paths::PricePath;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QvarPoint {
    pub delta: f64,
    pub value: f64,
}

/// `sup Σ ψ(|Δ|)` over partitions with mesh `< δ`, for each `δ` of a
/// strictly decreasing ladder.
///
/// Partition points may sit anywhere inside a step, so a jump from sample
/// `j` straight to sample `i` is feasible iff `t_i − t_{j+1} < δ`: the
/// earlier point can be placed just before `t_{j+1}`. Adjacent samples are
/// always reachable, hence every `δ > 0` is feasible and the profile tends
/// to the finest-partition sum as `δ → 0`.
pub fn qvar_profile(path: &PricePath, deltas: &[f64]) -> Result<Vec<QvarPoint>> {
    if let Some(d) = deltas.iter().find(|d| !(**d > 0.0)) {
        return Err(VariationError::BadDeltas(format!("mesh {d} must be positive")));
    }
    if deltas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(VariationError::BadDeltas("mesh ladder must be strictly decreasing".into()));
    }
    let times = path.times();
    let psi = VariationFunctional::TaylorPsi;
    Ok(deltas
        .iter()
        .map(|&delta| {
            let lo = |i: usize| {
                let ti = times[i];
                let m = times.partition_point(|&s| ti - s >= delta);
                m.saturating_sub(1)
            };
            QvarPoint { delta, value: dp_sup(path.values(), &psi, lo) }
        })
        .collect())
}
