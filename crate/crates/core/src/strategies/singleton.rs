//! The clairvoyant strategy for a single known path and the upper
//! probability of that path.

use super::simple::{Rule, SimpleStrategy, Sizing, Trigger};
use super::{Result, StrategyError};
use crate::numeric::{close, Compensated};
use crate::paths::PricePath;
use crate::variation::var_signed;

/// Relative agreement required between the two closed forms.
pub const FORM_TOLERANCE: f64 = 1e-12;

fn log_values(path: &PricePath) -> Result<Vec<f64>> {
    if let Some(index) = path.values().iter().position(|&x| x <= 0.0) {
        return Err(StrategyError::ZeroPrice { index });
    }
    Ok(path.log_values().expect("positive path has logarithms"))
}

/// All-in on every up-move of `path`, flat otherwise. Returns the strategy
/// with `K_0 = 1` and its capital growth factor on `path`,
/// `Π_{up moves} x_{i+1}/x_i`, accumulated in the log domain.
pub fn clairvoyant_strategy(path: &PricePath) -> Result<(SimpleStrategy, f64)> {
    let logs = log_values(path)?;
    let values = path.values();
    let times = path.times();
    let mut rules = Vec::with_capacity(values.len().saturating_sub(1));
    let mut log_factor = Compensated::ZERO;
    for i in 0..values.len() - 1 {
        let sizing = if values[i + 1] > values[i] {
            log_factor = log_factor.add(logs[i + 1] - logs[i]);
            Sizing::CapitalFraction { fraction: 1.0 }
        } else {
            Sizing::Units { units: 0.0 }
        };
        rules.push(Rule::new(Trigger::AtTime { time: times[i] }, sizing));
    }
    let strategy = SimpleStrategy::new(1.0, rules).described("clairvoyant");
    Ok((strategy, log_factor.value().exp()))
}

/// `√(ω(0)/ω(T) · e^{−var(ln ω)})` and `e^{−var⁺(ln ω)}`.
pub fn upper_prob_forms(path: &PricePath) -> Result<(f64, f64)> {
    let logs = log_values(path)?;
    let s = var_signed(&logs);
    let total = (0.5 * (logs[0] - logs[logs.len() - 1] - s.var)).exp();
    let positive = (-s.plus).exp();
    Ok((total, positive))
}

/// Upper probability of the singleton `{ω}`.
pub fn upper_prob_singleton(path: &PricePath) -> Result<f64> {
    let (total, positive) = upper_prob_forms(path)?;
    if !close(total, positive, FORM_TOLERANCE) {
        return Err(StrategyError::FormMismatch { total, positive });
    }
    Ok(total)
}
