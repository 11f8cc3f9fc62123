//! Exact variation functionals and crossing counts on step paths.
//!
//! On a step path every partition increment is a difference of two sample
//! values and every subsequence of samples is realized by some partition,
//! so `sup_κ Σ φ(|Δ|)` is a maximum over sample subsequences. That maximum
//! is found by dynamic programming over the samples.

pub(crate) mod admissible;
pub(crate) mod crossings;
mod functional;
mod qvar;

pub use admissible::{phi_admissible, AdmissibilityReport};
pub use crossings::{crossings, grid_crossings, CrossingCount, GridCrossings};
pub use functional::{ln_star, log2_star, psi, Interpolation, VariationFunctional};
pub use qvar::{qvar_profile, QvarPoint};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::Compensated;
use crate::paths::{discretize, PathError, PricePath};

#[derive(Debug, Error)]
pub enum VariationError {
    #[error("bad variation functional: {0}")]
    BadFunctional(String),
    #[error("exhaustive enumeration limited to {limit} samples, path has {len}")]
    TooLarge { len: usize, limit: usize },
    #[error("bad interval ({a}, {b}): need 0 <= a < b")]
    BadInterval { a: f64, b: f64 },
    #[error("bad grid step {0}: must be positive")]
    BadStep(f64),
    #[error("bad mesh ladder: {0}")]
    BadDeltas(String),
    #[error("bad profile grid: {0}")]
    BadGrid(String),
    #[error(transparent)]
    Path(#[from] PathError),
}

pub type Result<T, E = VariationError> = std::result::Result<T, E>;

/// Largest path accepted by [`brute_force_var_phi`].
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Samples per block in the pruned DP.
const BLOCK: usize = 64;

/// `var_φ` of the step path.
pub fn var_phi(path: &PricePath, phi: &VariationFunctional) -> Result<f64> {
    var_phi_values(path.values(), phi)
}

/// `var_φ` of an arbitrary real sequence read as a step function.
pub fn var_phi_values(values: &[f64], phi: &VariationFunctional) -> Result<f64> {
    phi.validate()?;
    Ok(var_phi_unchecked(values, phi))
}

pub(crate) fn var_phi_unchecked(values: &[f64], phi: &VariationFunctional) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    if phi.finest_is_optimal() {
        return finest_sum(values, phi);
    }
    if phi.is_convex() {
        let turning = turning_points(values);
        return dp_sup(&turning, phi, |_| 0);
    }
    dp_sup(values, phi, |_| 0)
}

/// `Σ φ(|x_i − x_{i−1}|)` over consecutive samples.
pub fn finest_sum(values: &[f64], phi: &VariationFunctional) -> f64 {
    values.windows(2).map(|w| phi.eval((w[1] - w[0]).abs())).sum::<Compensated>().value()
}

/// Drops samples strictly inside monotone runs (and repeated values),
/// keeping the endpoints.
pub(crate) fn turning_points(values: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(values.len());
    for &x in values {
        while out.len() >= 2 {
            let top = out[out.len() - 1];
            let prev = out[out.len() - 2];
            if (top - prev) * (x - top) >= 0.0 {
                out.pop();
            } else {
                break;
            }
        }
        if out.len() == 1 && out[0] == x {
            continue;
        }
        out.push(x);
    }
    if out.len() == 1 {
        out.push(values[values.len() - 1]);
    }
    out
}

#[derive(Clone, Copy)]
struct Block {
    min: f64,
    max: f64,
    best_max: f64,
}

/// `best[i] = max_{lo(i) ≤ j < i} best[j] + φ(|x_i − x_j|)`, returning
/// `best[n−1]`. `lo(i)` must not exceed `i − 1`.
///
/// For non-decreasing `φ` a candidate range is skipped when
/// `max best + φ(max distance)` cannot beat the incumbent; this never
/// changes the result.
pub(crate) fn dp_sup(x: &[f64], phi: &VariationFunctional, lo_of: impl Fn(usize) -> usize) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let prune = phi.is_monotone();
    let mut best = vec![Compensated::ZERO; n];
    let mut best_val = vec![0.0f64; n];
    let mut prefix_min = vec![x[0]; n];
    let mut prefix_max = vec![x[0]; n];
    let mut prefix_best = vec![0.0f64; n];
    let mut blocks: Vec<Block> = Vec::with_capacity(n / BLOCK + 1);
    let slack = |bound: f64| bound + bound.abs() * 1e-13;

    for i in 1..n {
        let xi = x[i];
        let lo = lo_of(i).min(i - 1);
        let mut cur = best[i - 1].add(phi.eval((xi - x[i - 1]).abs()));
        let mut cur_val = cur.value();

        let mut j = i - 1;
        while j > lo {
            let jj = j - 1;
            if prune && (jj + 1) % BLOCK == 0 {
                let d = (xi - prefix_min[jj]).max(prefix_max[jj] - xi);
                if slack(prefix_best[jj] + phi.eval(d)) <= cur_val {
                    break;
                }
                let start = jj + 1 - BLOCK;
                if start >= lo {
                    let blk = blocks[jj / BLOCK];
                    let d = (xi - blk.min).max(blk.max - xi);
                    if slack(blk.best_max + phi.eval(d)) <= cur_val {
                        j = start;
                        continue;
                    }
                }
            }
            let cand = best[jj].add(phi.eval((xi - x[jj]).abs()));
            let v = cand.value();
            if v > cur_val {
                cur = cand;
                cur_val = v;
            }
            j = jj;
        }

        best[i] = cur;
        best_val[i] = cur_val;
        prefix_min[i] = prefix_min[i - 1].min(xi);
        prefix_max[i] = prefix_max[i - 1].max(xi);
        prefix_best[i] = prefix_best[i - 1].max(cur_val);
        if (i + 1) % BLOCK == 0 {
            let range = i + 1 - BLOCK..=i;
            let mut blk = Block { min: f64::INFINITY, max: f64::NEG_INFINITY, best_max: f64::NEG_INFINITY };
            for k in range {
                blk.min = blk.min.min(x[k]);
                blk.max = blk.max.max(x[k]);
                blk.best_max = blk.best_max.max(best_val[k]);
            }
            blocks.push(blk);
        }
    }
    best_val[n - 1]
}

/// Exhaustive oracle: maximum of `Σ φ(|Δ|)` over all `2^(n−2)` subsets of
/// interior samples.
pub fn brute_force_var_phi(path: &PricePath, phi: &VariationFunctional) -> Result<f64> {
    brute_force_values(path.values(), phi)
}

pub fn brute_force_values(values: &[f64], phi: &VariationFunctional) -> Result<f64> {
    phi.validate()?;
    let n = values.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(VariationError::TooLarge { len: n, limit: BRUTE_FORCE_LIMIT });
    }
    if n < 2 {
        return Ok(0.0);
    }
    let interior = n - 2;
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1u32 << interior) {
        let mut total = 0.0;
        let mut prev = values[0];
        for (k, &x) in values[1..n - 1].iter().enumerate() {
            if mask & (1 << k) != 0 {
                total += phi.eval((x - prev).abs());
                prev = x;
            }
        }
        total += phi.eval((values[n - 1] - prev).abs());
        best = best.max(total);
    }
    Ok(best)
}

/// Total, positive and negative variation of a step function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedVariation {
    pub var: f64,
    pub plus: f64,
    pub minus: f64,
}

/// `var`, `var⁺`, `var⁻` of a real sequence. Since `(a + b)⁺ ≤ a⁺ + b⁺`
/// the finest partition is optimal for both signed parts.
pub fn var_signed(values: &[f64]) -> SignedVariation {
    let mut plus = Compensated::ZERO;
    let mut minus = Compensated::ZERO;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d > 0.0 {
            plus = plus.add(d);
        } else if d < 0.0 {
            minus = minus.add(-d);
        }
    }
    let (plus, minus) = (plus.value(), minus.value());
    SignedVariation { var: plus + minus, plus, minus }
}

/// `var_p(ω_N)` for each `N` (rows) and `p` (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthProfile {
    pub p_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    /// `values[row][col]` is `var_{p_grid[col]}(ω_{n_grid[row]})`.
    pub values: Vec<Vec<f64>>,
}

impl GrowthProfile {
    pub fn column(&self, col: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[col]).collect()
    }
}

pub fn variation_growth_profile(path: &PricePath, p_grid: &[f64], n_grid: &[usize]) -> Result<GrowthProfile> {
    if n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(VariationError::BadGrid("N grid must be strictly increasing".into()));
    }
    for &p in p_grid {
        VariationFunctional::power(p).validate()?;
    }
    let mut values = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let coarse = discretize(path, n)?;
        let row = p_grid.iter().map(|&p| var_phi_unchecked(coarse.values(), &VariationFunctional::power(p))).collect();
        values.push(row);
    }
    Ok(GrowthProfile { p_grid: p_grid.to_vec(), n_grid: n_grid.to_vec(), values })
}
