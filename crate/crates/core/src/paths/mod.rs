//! Price paths as right-continuous step functions.
//!
//! A [`PricePath`] stores samples `(t_i, x_i)` and is read as
//! `ω(t) = x_i` for `t ∈ [t_i, t_{i+1})`, with `ω(T)` equal to the last
//! sample. Every analysis in the crate works on that step function, so
//! hitting times, crossing counts and variations are exact on the grid.

mod generate;
mod io;

pub use generate::{generate, GeneratorKind, GeneratorSpec, JumpLaw};
pub use io::{read_path, read_path_from, write_path, write_path_to};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PathError {
    #[error("price at sample {index} is negative or not a number ({value})")]
    NonPositiveValue { index: usize, value: f64 },
    #[error("bad time grid: {0}")]
    BadTimeGrid(String),
    #[error("bad generator spec: {0}")]
    BadSpec(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = PathError> = std::result::Result<T, E>;

/// Sampled positive price trajectory on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePath {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl PricePath {
    /// Validates and builds a path. `horizon` must equal the last time.
    pub fn new(times: Vec<f64>, values: Vec<f64>, horizon: f64) -> Result<Self> {
        if times.len() != values.len() {
            return Err(PathError::BadTimeGrid(format!("{} times but {} values", times.len(), values.len())));
        }
        if times.len() < 2 {
            return Err(PathError::BadTimeGrid("need at least two samples".into()));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(PathError::BadTimeGrid(format!("horizon {horizon} must be positive")));
        }
        if times[0] != 0.0 {
            return Err(PathError::BadTimeGrid(format!("first time is {}, not 0", times[0])));
        }
        if times[times.len() - 1] != horizon {
            return Err(PathError::BadTimeGrid(format!(
                "last time {} differs from horizon {horizon}",
                times[times.len() - 1]
            )));
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(PathError::BadTimeGrid(format!("times not strictly increasing at sample {}", i + 1)));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(PathError::NonPositiveValue { index, value });
        }
        Ok(Self { times, values })
    }

    /// Path on the uniform grid `k·T/(n−1)`, `k = 0..n`.
    pub fn uniform(values: Vec<f64>, horizon: f64) -> Result<Self> {
        let times = uniform_grid(values.len().saturating_sub(1), horizon);
        Self::new(times, values, horizon)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn inf(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Index of the sample whose step contains `t` (clamped to `[0, T]`).
    pub fn index_at(&self, t: f64) -> usize {
        // partition_point returns the count of times <= t
        let count = self.times.partition_point(|&s| s <= t);
        count.saturating_sub(1)
    }

    /// Step-function evaluation `ω(t)`.
    pub fn value_at(&self, t: f64) -> f64 {
        self.values[self.index_at(t)]
    }

    /// Natural logarithm of every sample. Fails on a zero price.
    pub fn log_values(&self) -> Option<Vec<f64>> {
        if self.values.iter().any(|&v| v <= 0.0) {
            return None;
        }
        Some(self.values.iter().map(|v| v.ln()).collect())
    }

    /// Returns a copy with the samples after `index` replaced.
    pub fn with_suffix(&self, index: usize, suffix: &[f64]) -> Result<Self> {
        let mut values = self.values[..=index].to_vec();
        values.extend_from_slice(suffix);
        Self::new(self.times.clone(), values, self.horizon())
    }
}

pub(crate) fn uniform_grid(intervals: usize, horizon: f64) -> Vec<f64> {
    if intervals == 0 {
        return vec![0.0];
    }
    let n = intervals as f64;
    (0..=intervals).map(|k| if k == intervals { horizon } else { horizon * (k as f64) / n }).collect()
}

/// Validated constructor over borrowed data.
pub fn make_path(times: &[f64], values: &[f64], horizon: f64) -> Result<PricePath> {
    PricePath::new(times.to_vec(), values.to_vec(), horizon)
}

/// Left-floor sampling of `path` on the uniform `N`-step grid:
/// `ω_N(t) = ω((T/N)·⌊(N/T)·t⌋)`, returned as its `N + 1` grid samples.
pub fn discretize(path: &PricePath, intervals: usize) -> Result<PricePath> {
    if intervals == 0 {
        return Err(PathError::BadSpec("discretization needs N >= 1".into()));
    }
    let times = uniform_grid(intervals, path.horizon());
    let values = times.iter().map(|&t| path.value_at(t)).collect();
    PricePath::new(times, values, path.horizon())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_path() {
        let p = make_path(&[0.0, 1.0], &[1.0, 1.0], 1.0).unwrap();
        assert_eq!(p.values(), &[1.0, 1.0]);
        assert_eq!(p.horizon(), 1.0);
    }

    #[test]
    fn negative_value_rejected() {
        let err = make_path(&[0.0, 0.5, 1.0], &[1.0, -0.1, 2.0], 1.0).unwrap_err();
        assert!(matches!(err, PathError::NonPositiveValue { index: 1, .. }));
    }

    #[test]
    fn zero_price_allowed() {
        assert!(make_path(&[0.0, 1.0], &[1.0, 0.0], 1.0).is_ok());
    }

    #[test]
    fn duplicate_time_rejected() {
        let err = make_path(&[0.0, 0.5, 0.5, 1.0], &[1.0, 2.0, 3.0, 4.0], 1.0).unwrap_err();
        assert!(matches!(err, PathError::BadTimeGrid(_)));
    }

    #[test]
    fn endpoints_checked() {
        assert!(make_path(&[0.1, 1.0], &[1.0, 1.0], 1.0).is_err());
        assert!(make_path(&[0.0, 0.9], &[1.0, 1.0], 1.0).is_err());
        assert!(make_path(&[0.0], &[1.0], 1.0).is_err());
        assert!(make_path(&[0.0, 1.0], &[1.0], 1.0).is_err());
    }

    #[test]
    fn step_evaluation() {
        let p = make_path(&[0.0, 0.5, 1.0], &[1.0, 2.0, 3.0], 1.0).unwrap();
        assert_eq!(p.value_at(0.0), 1.0);
        assert_eq!(p.value_at(0.4999), 1.0);
        assert_eq!(p.value_at(0.5), 2.0);
        assert_eq!(p.value_at(0.99), 2.0);
        assert_eq!(p.value_at(1.0), 3.0);
    }

    #[test]
    fn discretize_identity_refinement() {
        let p = PricePath::uniform(vec![1.0, 3.0, 2.0, 5.0], 2.0).unwrap();
        let d = discretize(&p, 3).unwrap();
        assert_eq!(d, p);
    }

    #[test]
    fn discretize_single_step_keeps_terminal_value() {
        let p = make_path(&[0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0], &[1.0, 2.0, 3.0, 4.0], 1.0).unwrap();
        let d = discretize(&p, 1).unwrap();
        assert_eq!(d.times(), &[0.0, 1.0]);
        assert_eq!(d.values(), &[1.0, 4.0]);
    }

    #[test]
    fn discretize_constant() {
        let p = PricePath::uniform(vec![2.5; 7], 1.0).unwrap();
        for n in 1..20 {
            assert!(discretize(&p, n).unwrap().values().iter().all(|&v| v == 2.5));
        }
    }

    #[test]
    fn discretize_floor_rule() {
        // samples at 0, 0.3, 0.7, 1; grid 0, .25, .5, .75, 1
        let p = make_path(&[0.0, 0.3, 0.7, 1.0], &[1.0, 2.0, 3.0, 4.0], 1.0).unwrap();
        let d = discretize(&p, 4).unwrap();
        assert_eq!(d.values(), &[1.0, 1.0, 2.0, 3.0, 4.0]);
    }
}
