//! Mixtures that grow without bound on paths that are unbounded or cross
//! an interval infinitely often.

use super::doob::capped_doob_strategy;
use super::mixture::{Component, StrategyMixture};
use super::simple::{Rule, SimpleStrategy, Sizing, Trigger};
use super::{Result, StrategyError};
use crate::numeric::compensated_sum;

/// `Σ_{m=1}^{m_max} 2^{−m} G_m`, where `G_m` starts with capital 1, buys
/// `1/ω(0)` units at once and sells when the price first reaches `2^m`.
/// A path that climbs to `2^M` brings every `G_m`, `m ≤ M`, to about
/// `2^m/ω(0)`, so the mixture grows like `M/ω(0)`.
pub fn unboundedness_mixture(m_max: u32) -> Result<StrategyMixture> {
    if !(1..=1000).contains(&m_max) {
        return Err(StrategyError::BadParameter(format!("m_max = {m_max} outside 1..=1000")));
    }
    let components = (1..=m_max as i32)
        .map(|m| {
            let strategy = SimpleStrategy::new(
                1.0,
                vec![
                    Rule::new(Trigger::Immediately, Sizing::InversePrice),
                    Rule::units(Trigger::PriceAtLeast { level: 2f64.powi(m) }, 0.0),
                ],
            )
            .described(format!("hold until 2^{m}"));
            Component::Single { weight: 2f64.powi(-m), strategy }
        })
        .collect();
    Ok(StrategyMixture { components, tail_capital: 0.0, descriptor: format!("unboundedness mixture m <= {m_max}") })
}

/// `Σ_k w_k D_k`, with `D_k` Doob's strategy on `intervals[k]`, stopped
/// once its own capital reaches `1/w_k`. Weights must sum to one.
pub fn crossing_explosion_mixture(intervals: &[(f64, f64)], weights: &[f64]) -> Result<StrategyMixture> {
    if intervals.is_empty() || intervals.len() != weights.len() {
        return Err(StrategyError::BadWeights(format!("{} intervals, {} weights", intervals.len(), weights.len())));
    }
    if let Some(w) = weights.iter().find(|&&w| !(w > 0.0 && w.is_finite())) {
        return Err(StrategyError::BadWeights(format!("weight {w} must be positive")));
    }
    let total = compensated_sum(weights.iter().copied());
    if (total - 1.0).abs() > 1e-12 {
        return Err(StrategyError::BadWeights(format!("weights sum to {total}, not 1")));
    }
    let components = intervals
        .iter()
        .zip(weights)
        .map(|(&(a, b), &w)| Ok(Component::Single { weight: w, strategy: capped_doob_strategy(a, b, 1.0 / w)? }))
        .collect::<Result<_>>()?;
    Ok(StrategyMixture {
        components,
        tail_capital: 0.0,
        descriptor: format!("capped Doob mixture over {} intervals", intervals.len()),
    })
}
