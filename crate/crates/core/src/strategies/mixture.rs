//! Countable convex mixtures of positive simple strategies.

use serde::{Deserialize, Serialize};

use super::doob::doob_strategy;
use super::simple::{run_simple, CapitalTrace, SimpleStrategy};
use super::{Result, StrategyError};
use crate::numeric::Compensated;
use crate::paths::PricePath;
use crate::variation::crossings::{ceil_index, Side, Straddle};

/// Doob strategies on `(kh, (k+1)h)` for `k = 0..count`, all with the same
/// weight. Evaluated in one pass instead of one run per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoobGrid {
    pub step: f64,
    pub count: u64,
    pub weight: f64,
}

impl DoobGrid {
    /// `weight · Σ_k k·h`.
    pub fn initial_capital(&self) -> f64 {
        let c = self.count as f64;
        self.weight * self.step * c * (c - 1.0) / 2.0
    }

    /// Weighted capital, position and cash of the whole block.
    ///
    /// After a sample `x`, the component on `(a, b)` is long iff its last
    /// visit outside `(a, b)` was at or below `a`. That is known from `x`
    /// alone except for the single interval strictly containing `x`.
    pub fn sweep(&self, values: &[f64]) -> CapitalTrace {
        let h = self.step;
        let count = self.count as i64;
        let n = values.len();
        let mut trace = CapitalTrace {
            initial_capital: self.initial_capital(),
            capital: Vec::with_capacity(n),
            position: Vec::with_capacity(n),
            cash: Vec::with_capacity(n),
            firings: Vec::new(),
        };
        let mut capital = Compensated::new(trace.initial_capital);
        let mut straddle: Option<Straddle> = None;
        let mut prev: Option<f64> = None;
        let mut position = 0.0;
        for &x in values {
            if let Some(p) = prev {
                capital = capital.add(position * (x - p));
            }
            straddle = Straddle::advance(straddle, prev, x, h);
            let first_low = ceil_index(x, h).max(0);
            let mut long = (count - first_low).max(0);
            if let Some(s) = straddle {
                if s.side == Some(Side::Low) && (0..count).contains(&s.interval) {
                    long += 1;
                }
            }
            position = self.weight * long as f64;
            let k = capital.value();
            trace.capital.push(k);
            trace.position.push(position);
            trace.cash.push(k - position * x);
            prev = Some(x);
        }
        trace
    }

    pub fn expand(&self) -> Result<Vec<(f64, SimpleStrategy)>> {
        (0..self.count)
            .map(|k| {
                let a = k as f64 * self.step;
                Ok((self.weight, doob_strategy(a, a + self.step)?))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "component", rename_all = "kebab-case")]
pub enum Component {
    Single { weight: f64, strategy: SimpleStrategy },
    DoobGrid(DoobGrid),
}

impl Component {
    pub fn initial_capital(&self) -> f64 {
        match self {
            Self::Single { weight, strategy } => weight * strategy.initial_capital,
            Self::DoobGrid(g) => g.initial_capital(),
        }
    }

    pub fn component_count(&self) -> u64 {
        match self {
            Self::Single { .. } => 1,
            Self::DoobGrid(g) => g.count,
        }
    }
}

/// `Σ_k w_k S^k` plus a constant idle-cash term.
///
/// `tail_capital` is the initial capital of components left out of
/// `components`. Holding it as cash keeps the mixture positive with the
/// same initial capital, and only lowers the terminal capital relative to
/// running the omitted components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyMixture {
    pub components: Vec<Component>,
    pub tail_capital: f64,
    #[serde(default)]
    pub descriptor: String,
}

impl StrategyMixture {
    pub fn initial_capital(&self) -> f64 {
        self.components.iter().map(Component::initial_capital).sum::<Compensated>().add(self.tail_capital).value()
    }

    pub fn component_count(&self) -> u64 {
        self.components.iter().map(Component::component_count).sum()
    }

    /// Every component as an explicit weighted simple strategy, failing if
    /// there are more than `limit`.
    pub fn expand(&self, limit: u64) -> Result<Vec<(f64, SimpleStrategy)>> {
        let total = self.component_count();
        if total > limit {
            return Err(StrategyError::BadParameter(format!("{total} components exceed expansion limit {limit}")));
        }
        let mut out = Vec::with_capacity(total as usize);
        for c in &self.components {
            match c {
                Component::Single { weight, strategy } => out.push((*weight, strategy.clone())),
                Component::DoobGrid(g) => out.extend(g.expand()?),
            }
        }
        Ok(out)
    }
}

/// Slack allowed on aggregated block capital before it counts as negative.
const BLOCK_SLACK: f64 = 1e-12;

/// Runs every component and sums the weighted traces sample by sample.
pub fn run_mixture(mixture: &StrategyMixture, path: &PricePath) -> Result<CapitalTrace> {
    let n = path.len();
    let values = path.values();
    let mut capital = vec![Compensated::new(mixture.tail_capital); n];
    let mut position = vec![Compensated::ZERO; n];

    for (index, c) in mixture.components.iter().enumerate() {
        let (weight, trace) = match c {
            Component::Single { weight, strategy } => {
                if !(*weight >= 0.0 && weight.is_finite()) {
                    return Err(StrategyError::BadWeights(format!("component {index} has weight {weight}")));
                }
                let trace = run_simple(strategy, path)?;
                if let Some(sample) = trace.capital.iter().position(|&k| k < 0.0) {
                    return Err(StrategyError::NegativeComponent {
                        component: index,
                        sample,
                        capital: trace.capital[sample],
                    });
                }
                (*weight, trace)
            }
            Component::DoobGrid(g) => {
                if !(g.weight >= 0.0 && g.weight.is_finite() && g.step > 0.0 && g.step.is_finite()) {
                    return Err(StrategyError::BadWeights(format!("component {index}: bad Doob grid")));
                }
                let trace = g.sweep(values);
                let floor = -BLOCK_SLACK * (1.0 + trace.initial_capital);
                if let Some(sample) = trace.capital.iter().position(|&k| k < floor) {
                    return Err(StrategyError::NegativeComponent {
                        component: index,
                        sample,
                        capital: trace.capital[sample],
                    });
                }
                (1.0, trace)
            }
        };
        for i in 0..n {
            capital[i] = capital[i].add(weight * trace.capital[i]);
            position[i] = position[i].add(weight * trace.position[i]);
        }
    }

    let capital: Vec<f64> = capital.into_iter().map(Compensated::value).collect();
    let position: Vec<f64> = position.into_iter().map(Compensated::value).collect();
    let cash = capital.iter().zip(&position).zip(values).map(|((k, h), x)| k - h * x).collect();
    Ok(CapitalTrace { initial_capital: mixture.initial_capital(), capital, position, cash, firings: Vec::new() })
}
