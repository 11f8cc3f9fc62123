use serde::{Deserialize, Serialize};

use super::{Result, VariationError};

/// Completed crossings of an open interval `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CrossingCount {
    pub up: u64,
    pub down: u64,
}

/// Crossings aggregated over the grid intervals `(kh, (k+1)h)`, `k ∈ ℤ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCrossings {
    pub step: f64,
    pub up: u64,
    pub down: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Low,
    High,
}

/// Upcrossings (moves from `≤ a` to `≥ b`) and downcrossings (`≥ b` to
/// `≤ a`) of `(a, b)`, scanning the samples in order.
pub fn crossings(values: &[f64], a: f64, b: f64) -> Result<CrossingCount> {
    if !(a >= 0.0 && a < b) {
        return Err(VariationError::BadInterval { a, b });
    }
    Ok(count_crossings(values, a, b))
}

pub(crate) fn count_crossings(values: &[f64], a: f64, b: f64) -> CrossingCount {
    let mut side = None;
    let mut count = CrossingCount::default();
    for &x in values {
        if x <= a {
            if side == Some(Side::High) {
                count.down += 1;
            }
            side = Some(Side::Low);
        } else if x >= b {
            if side == Some(Side::Low) {
                count.up += 1;
            }
            side = Some(Side::High);
        }
    }
    count
}

/// Smallest `k` with `k·h ≥ x`.
pub(crate) fn ceil_index(x: f64, h: f64) -> i64 {
    let mut k = (x / h).ceil() as i64;
    while ((k - 1) as f64) * h >= x {
        k -= 1;
    }
    while (k as f64) * h < x {
        k += 1;
    }
    k
}

/// Largest `k` with `k·h ≤ x`.
pub(crate) fn floor_index(x: f64, h: f64) -> i64 {
    let mut k = (x / h).floor() as i64;
    while ((k + 1) as f64) * h <= x {
        k += 1;
    }
    while (k as f64) * h > x {
        k -= 1;
    }
    k
}

/// The grid interval strictly containing `x`, if `x` is off the grid.
pub(crate) fn straddled(x: f64, h: f64) -> Option<i64> {
    let k = floor_index(x, h);
    ((k as f64) * h < x).then_some(k)
}

/// Tracks the side of the one grid interval that strictly contains the
/// current sample. Every other interval's side is fixed by the sample
/// itself, which is what makes a linear sweep possible.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Straddle {
    pub interval: i64,
    pub side: Option<Side>,
}

impl Straddle {
    /// Straddle state after moving from `prev` (if any) to `x`.
    pub(crate) fn advance(current: Option<Straddle>, prev: Option<f64>, x: f64, h: f64) -> Option<Straddle> {
        let k = straddled(x, h)?;
        if let Some(s) = current {
            if s.interval == k {
                return Some(s);
            }
        }
        let side = prev.map(|p| if p <= (k as f64) * h { Side::Low } else { Side::High });
        Some(Straddle { interval: k, side })
    }
}

/// `M(f, h)` and `D(f, h)` in one pass over the samples.
pub fn grid_crossings(values: &[f64], h: f64) -> Result<GridCrossings> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(VariationError::BadStep(h));
    }
    let mut up = 0u64;
    let mut down = 0u64;
    let mut straddle: Option<Straddle> = None;
    let mut prev: Option<f64> = None;
    for &x in values {
        if let Some(p) = prev {
            if x > p {
                // intervals with kh ≥ p sit on the low side; they complete
                // an upcrossing when (k+1)h ≤ x
                let lo = ceil_index(p, h);
                let hi = floor_index(x, h) - 1;
                if hi >= lo {
                    up += (hi - lo + 1) as u64;
                }
                if let Some(s) = straddle {
                    if s.side == Some(Side::Low) && ((s.interval + 1) as f64) * h <= x {
                        up += 1;
                    }
                }
            } else if x < p {
                let lo = ceil_index(x, h);
                let hi = floor_index(p, h) - 1;
                if hi >= lo {
                    down += (hi - lo + 1) as u64;
                }
                if let Some(s) = straddle {
                    if s.side == Some(Side::High) && (s.interval as f64) * h >= x {
                        down += 1;
                    }
                }
            }
        }
        straddle = Straddle::advance(straddle, prev, x, h);
        prev = Some(x);
    }
    Ok(GridCrossings { step: h, up, down })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SAW: [f64; 5] = [1.0, 0.5, 1.5, 0.5, 1.5];

    /// Sum of per-interval counts over every grid interval that can be hit.
    fn naive_grid(values: &[f64], h: f64) -> (u64, u64) {
        let sup = values.iter().copied().fold(0.0, f64::max);
        let kmax = floor_index(sup, h);
        let mut total = (0, 0);
        for k in 0..=kmax {
            let c = count_crossings(values, (k as f64) * h, ((k + 1) as f64) * h);
            total.0 += c.up;
            total.1 += c.down;
        }
        total
    }

    #[test]
    fn hand_traced_counts() {
        assert_eq!(crossings(&SAW, 0.5, 1.5).unwrap(), CrossingCount { up: 2, down: 1 });
        assert_eq!(crossings(&[1.0, 1.0, 1.0], 0.5, 1.5).unwrap(), CrossingCount::default());
        assert_eq!(crossings(&[0.0, 2.5], 0.0, 1.0).unwrap(), CrossingCount { up: 1, down: 0 });
    }

    #[test]
    fn bad_interval() {
        assert!(crossings(&SAW, 1.0, 1.0).is_err());
        assert!(crossings(&SAW, -0.1, 1.0).is_err());
        assert!(grid_crossings(&SAW, 0.0).is_err());
        assert!(grid_crossings(&SAW, -1.0).is_err());
    }

    #[test]
    fn grid_hand_counts() {
        let g = grid_crossings(&[0.0, 2.5], 1.0).unwrap();
        assert_eq!((g.up, g.down), (2, 0));
        let g = grid_crossings(&[3.0; 4], 0.25).unwrap();
        assert_eq!((g.up, g.down), (0, 0));
        // (0,1): 1 at t0 is >= 1, 0.5 never <= 0 -> nothing
        // (1,2): 1 <= 1 low, 1.5 neither, 0.5 low, 1.5 neither -> nothing
        let g = grid_crossings(&SAW, 1.0).unwrap();
        assert_eq!((g.up, g.down), (0, 0));
        assert_eq!(naive_grid(&SAW, 1.0), (0, 0));
        let g = grid_crossings(&SAW, 0.5).unwrap();
        assert_eq!((g.up, g.down), naive_grid(&SAW, 0.5));
        assert_eq!((g.up, g.down), (4, 3));
    }

    #[test]
    fn index_helpers() {
        assert_eq!(ceil_index(1.0, 0.5), 2);
        assert_eq!(ceil_index(1.1, 0.5), 3);
        assert_eq!(floor_index(1.0, 0.5), 2);
        assert_eq!(floor_index(0.99, 0.5), 1);
        assert_eq!(straddled(1.0, 0.5), None);
        assert_eq!(straddled(1.2, 0.5), Some(2));
        // 0.1 is not a multiple of 0.1·k in floating point for every k
        for k in 0..1000 {
            let x = k as f64 * 0.1;
            assert_eq!(floor_index(x, 0.1), k);
            assert_eq!(ceil_index(x, 0.1), k);
        }
    }

    proptest! {
        #[test]
        fn single_interval_balance(values in prop::collection::vec(0.0f64..3.0, 1..80), a in 0.0f64..1.5, w in 0.01f64..1.5) {
            let c = crossings(&values, a, a + w).unwrap();
            prop_assert!(c.up.abs_diff(c.down) <= 1);
        }

        #[test]
        fn sweep_matches_per_interval_sum(
            values in prop::collection::vec(0.0f64..3.0, 1..60),
            j in 0i32..6,
        ) {
            let h = 2f64.powi(-j);
            let g = grid_crossings(&values, h).unwrap();
            prop_assert_eq!((g.up, g.down), naive_grid(&values, h));
        }

        #[test]
        fn sweep_matches_on_grid_values(
            ks in prop::collection::vec(0u32..24, 1..60),
            j in 0i32..4,
        ) {
            let values: Vec<f64> = ks.iter().map(|&k| k as f64 * 0.125).collect();
            let h = 2f64.powi(-j);
            let g = grid_crossings(&values, h).unwrap();
            prop_assert_eq!((g.up, g.down), naive_grid(&values, h));
        }

        #[test]
        fn sweep_matches_non_dyadic(values in prop::collection::vec(0.0f64..3.0, 1..60), h in 0.05f64..1.0) {
            let g = grid_crossings(&values, h).unwrap();
            prop_assert_eq!((g.up, g.down), naive_grid(&values, h));
        }

        /// Each up-move that spans a whole grid interval completes an
        /// upcrossing of it.
        #[test]
        fn spanning_moves_are_upcrossings(values in prop::collection::vec(0.0f64..3.0, 2..60), j in 0i32..5) {
            let h = 2f64.powi(-j);
            let spanning = values
                .windows(2)
                .filter(|w| w[1] > w[0] && floor_index(w[1], h) - 1 >= ceil_index(w[0], h))
                .count() as u64;
            prop_assert!(grid_crossings(&values, h).unwrap().up >= spanning);
        }
    }
}
