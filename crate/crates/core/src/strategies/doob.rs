use super::simple::{Rule, SimpleStrategy, Trigger};
use super::{Result, StrategyError};

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(a >= 0.0 && a < b && b.is_finite()) {
        return Err(StrategyError::BadInterval { a, b });
    }
    Ok(())
}

/// Doob's strategy for `(a, b)`: start with capital `a`, buy one unit on
/// reaching `[0, a]`, sell it on reaching `[b, ∞)`, repeat.
///
/// Each completed upcrossing gains at least `b − a`; the capital never
/// drops below zero because a held unit was bought at a price `≤ a`.
pub fn doob_strategy(a: f64, b: f64) -> Result<SimpleStrategy> {
    check_interval(a, b)?;
    Ok(SimpleStrategy::new(
        a,
        vec![Rule::units(Trigger::PriceAtMost { level: a }, 1.0), Rule::units(Trigger::PriceAtLeast { level: b }, 0.0)],
    )
    .repeating_from(0)
    .bounded_by(1.0)
    .described(format!("doob({a}, {b})")))
}

/// [`doob_strategy`] that closes out for good once its capital reaches `cap`.
pub fn capped_doob_strategy(a: f64, b: f64, cap: f64) -> Result<SimpleStrategy> {
    if !(cap > 0.0) {
        return Err(StrategyError::BadParameter(format!("capital cap {cap} must be positive")));
    }
    let s = doob_strategy(a, b)?.stopping_when(Trigger::CapitalAtLeast { level: cap });
    Ok(SimpleStrategy { descriptor: format!("doob({a}, {b}) capped at {cap}"), ..s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::PricePath;
    use crate::strategies::run_simple;
    use crate::variation::crossings;
    use proptest::prelude::*;

    const SAW: [f64; 5] = [1.0, 0.5, 1.5, 0.5, 1.5];

    #[test]
    fn saw_gains_two_upcrossings() {
        let p = PricePath::uniform(SAW.to_vec(), 1.0).unwrap();
        let t = run_simple(&doob_strategy(0.5, 1.5).unwrap(), &p).unwrap();
        assert_eq!(t.initial_capital, 0.5);
        assert_eq!(t.capital, vec![0.5, 0.5, 1.5, 1.5, 2.5]);
        assert_eq!(t.terminal(), 0.5 + 2.0 * 1.0);
    }

    #[test]
    fn crash_after_buying() {
        let p = PricePath::uniform(vec![1.0, 0.5, 0.0], 1.0).unwrap();
        let t = run_simple(&doob_strategy(0.5, 1.5).unwrap(), &p).unwrap();
        assert_eq!(t.capital, vec![0.5, 0.5, 0.0]);
        let flat = PricePath::uniform(vec![1.0; 3], 1.0).unwrap();
        assert_eq!(run_simple(&doob_strategy(0.5, 1.5).unwrap(), &flat).unwrap().terminal(), 0.5);
    }

    #[test]
    fn bad_intervals() {
        assert!(doob_strategy(1.0, 1.0).is_err());
        assert!(doob_strategy(-1.0, 1.0).is_err());
        assert!(doob_strategy(2.0, 1.0).is_err());
        assert!(capped_doob_strategy(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn cap_stops_trading() {
        let p = PricePath::uniform(vec![0.5, 1.5, 0.5, 1.5, 0.5, 1.5, 0.5, 1.5], 1.0).unwrap();
        let t = run_simple(&capped_doob_strategy(0.5, 1.5, 2.0).unwrap(), &p).unwrap();
        assert_eq!(t.terminal(), 2.5);
        assert_eq!(*t.position.last().unwrap(), 0.0);
    }

    proptest! {
        /// `K_T ≥ (b − a)·U` and `K ≥ 0` throughout.
        #[test]
        fn upcrossing_inequality(values in prop::collection::vec(0.0f64..4.0, 2..80), a in 0.0f64..2.0, w in 0.05f64..2.0) {
            let b = a + w;
            let p = PricePath::uniform(values.clone(), 1.0).unwrap();
            let t = run_simple(&doob_strategy(a, b).unwrap(), &p).unwrap();
            let up = crossings(&values, a, b).unwrap().up as f64;
            prop_assert!(t.terminal() >= w * up - 1e-12 * (1.0 + t.terminal().abs()));
            prop_assert!(t.min_capital() >= 0.0);
            prop_assert!(t.telescoping_error(&p) <= 1e-12 * (1.0 + t.terminal()));
        }
    }
}
