//! Borrowing-free audit: no short positions and no negative cash.
//!
//! A strategy that is positive on every right-continuous path must be
//! borrowing-free. When the audit finds a short position or negative cash
//! it builds a continuation of the observed prefix (a price spike or a
//! crash to zero) on which the capital goes negative.

use serde::{Deserialize, Serialize};

use super::mixture::{Component, StrategyMixture};
use super::simple::{run_simple, CapitalTrace, SimpleStrategy};
use super::Result;
use crate::paths::PricePath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    NegativeInitialCapital,
    BorrowedSecurity,
    BorrowedCash,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub sample: usize,
    pub position: f64,
    pub cash: f64,
    /// The observed prefix up to `sample`, then a single jump held to `T`.
    pub continuation: Vec<f64>,
    /// Capital of the strategy on the continuation right after the jump.
    pub continuation_capital: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BorrowReport {
    pub ok: bool,
    pub first_violation: Option<Violation>,
}

fn first_violation(trace: &CapitalTrace) -> Option<(usize, ViolationKind)> {
    if trace.initial_capital < 0.0 {
        return Some((0, ViolationKind::NegativeInitialCapital));
    }
    // the position held after the final sample is never exposed to a move
    let last = trace.capital.len() - 1;
    (0..last).find_map(|i| {
        if trace.position[i] < 0.0 {
            Some((i, ViolationKind::BorrowedSecurity))
        } else if trace.cash[i] < 0.0 {
            Some((i, ViolationKind::BorrowedCash))
        } else {
            None
        }
    })
}

pub fn borrowing_free_check(strategy: &SimpleStrategy, path: &PricePath) -> Result<BorrowReport> {
    let trace = run_simple(strategy, path)?;
    let Some((sample, kind)) = first_violation(&trace) else {
        return Ok(BorrowReport { ok: true, first_violation: None });
    };
    let position = trace.position[sample];
    let cash = trace.cash[sample];
    let x = path.values()[sample];
    let capital = trace.capital[sample];

    let (continuation, continuation_capital) = match kind {
        ViolationKind::NegativeInitialCapital => (path.values().to_vec(), strategy.initial_capital),
        _ => {
            let jump = match kind {
                // K + h·(P − x) = −1
                ViolationKind::BorrowedSecurity => x + (capital.max(0.0) + 1.0) / position.abs(),
                _ => 0.0,
            };
            let suffix = vec![jump; path.len() - 1 - sample];
            let altered = path.with_suffix(sample, &suffix)?;
            // a rule firing on the new price may fail to size (e.g. at price 0);
            // the capital at the jump is fixed before any rule fires
            let at_jump = match run_simple(strategy, &altered) {
                Ok(rerun) => rerun.capital[sample + 1],
                Err(_) => capital + position * (jump - x),
            };
            (altered.values().to_vec(), at_jump)
        }
    };
    Ok(BorrowReport {
        ok: false,
        first_violation: Some(Violation { kind, sample, position, cash, continuation, continuation_capital }),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureBorrowReport {
    pub ok: bool,
    pub components_checked: u64,
    /// Component index (after expanding Doob grids) and its violation.
    pub first_violation: Option<(u64, Violation)>,
}

/// Audits each component of a mixture. Doob grids are expanded when they
/// have at most `expand_limit` members and otherwise audited through their
/// aggregated position and cash, which must then also be non-negative.
pub fn borrowing_free_check_mixture(
    mixture: &StrategyMixture,
    path: &PricePath,
    expand_limit: u64,
) -> Result<MixtureBorrowReport> {
    let mut checked = 0u64;
    for c in &mixture.components {
        match c {
            Component::Single { strategy, .. } => {
                let r = borrowing_free_check(strategy, path)?;
                if let Some(v) = r.first_violation {
                    return Ok(MixtureBorrowReport {
                        ok: false,
                        components_checked: checked + 1,
                        first_violation: Some((checked, v)),
                    });
                }
                checked += 1;
            }
            Component::DoobGrid(g) if g.count <= expand_limit => {
                for (_, strategy) in g.expand()? {
                    let r = borrowing_free_check(&strategy, path)?;
                    if let Some(v) = r.first_violation {
                        return Ok(MixtureBorrowReport {
                            ok: false,
                            components_checked: checked + 1,
                            first_violation: Some((checked, v)),
                        });
                    }
                    checked += 1;
                }
            }
            Component::DoobGrid(g) => {
                let t = g.sweep(path.values());
                let slack = 1e-12 * (1.0 + t.initial_capital);
                let bad = (0..t.capital.len() - 1).any(|i| t.position[i] < 0.0 || t.cash[i] < -slack);
                if bad {
                    return Ok(MixtureBorrowReport {
                        ok: false,
                        components_checked: checked + g.count,
                        first_violation: None,
                    });
                }
                checked += g.count;
            }
        }
    }
    Ok(MixtureBorrowReport { ok: true, components_checked: checked, first_violation: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategies::{doob_strategy, Rule, Sizing, Trigger};

    fn uniform(values: &[f64]) -> PricePath {
        PricePath::uniform(values.to_vec(), 1.0).unwrap()
    }

    #[test]
    fn doob_is_borrowing_free() {
        let p = uniform(&[1.0, 0.4, 1.7, 0.2, 2.2, 1.0]);
        let r = borrowing_free_check(&doob_strategy(0.5, 1.5).unwrap(), &p).unwrap();
        assert!(r.ok);
    }

    #[test]
    fn short_seller_spiked() {
        let p = uniform(&[1.0, 0.9, 0.8, 0.7]);
        let s = SimpleStrategy::new(1.0, vec![Rule::units(Trigger::Immediately, -1.0)]);
        let r = borrowing_free_check(&s, &p).unwrap();
        let v = r.first_violation.unwrap();
        assert_eq!(v.kind, ViolationKind::BorrowedSecurity);
        assert_eq!(v.sample, 0);
        assert_eq!(v.continuation, vec![1.0, 3.0, 3.0, 3.0]);
        assert_eq!(v.continuation_capital, -1.0);
    }

    #[test]
    fn leverage_crashed() {
        let p = uniform(&[2.0, 2.5, 3.0]);
        let s =
            SimpleStrategy::new(1.0, vec![Rule::new(Trigger::Immediately, Sizing::CapitalFraction { fraction: 2.0 })]);
        let r = borrowing_free_check(&s, &p).unwrap();
        let v = r.first_violation.unwrap();
        assert_eq!(v.kind, ViolationKind::BorrowedCash);
        assert_eq!(v.cash, -1.0);
        assert_eq!(v.continuation, vec![2.0, 0.0, 0.0]);
        assert!(v.continuation_capital < 0.0);
    }

    #[test]
    fn negative_start() {
        let r = borrowing_free_check(&SimpleStrategy::cash(-0.5), &uniform(&[1.0, 1.0])).unwrap();
        assert_eq!(r.first_violation.unwrap().kind, ViolationKind::NegativeInitialCapital);
    }

    #[test]
    fn late_short_detected() {
        let p = uniform(&[1.0, 1.2, 0.8, 1.1, 1.3]);
        let s = SimpleStrategy::new(2.0, vec![Rule::units(Trigger::PriceAtLeast { level: 1.2 }, -0.5)]);
        let v = borrowing_free_check(&s, &p).unwrap().first_violation.unwrap();
        assert_eq!(v.sample, 1);
        assert!(v.continuation_capital < 0.0);
        assert_eq!(&v.continuation[..2], &[1.0, 1.2]);
    }
}
