//! Simple trading strategies, their capital processes, and the explicit
//! strategies that turn path roughness into trading gains.

mod borrowing;
mod doob;
mod mixture;
mod regularity;
mod simple;
mod singleton;
mod volatility;

pub use borrowing::{
    borrowing_free_check, borrowing_free_check_mixture, BorrowReport, MixtureBorrowReport, Violation, ViolationKind,
};
pub use doob::{capped_doob_strategy, doob_strategy};
pub use mixture::{run_mixture, Component, DoobGrid, StrategyMixture};
pub use regularity::{crossing_explosion_mixture, unboundedness_mixture};
pub use simple::{check_adapted, run_simple, CapitalTrace, Firing, Rule, SimpleStrategy, Sizing, Trigger};
pub use singleton::{clairvoyant_strategy, upper_prob_forms, upper_prob_singleton, FORM_TOLERANCE};
pub use volatility::{
    level_for, prop3_case, prop3_level_capital, prop3_rhs, verify_prop3_bound, volatility_mixture, DyadicWeights,
    Prop3Report, ScalePolicy, VolatilityKind, MAX_SCALE,
};

use thiserror::Error;

use crate::paths::PathError;
use crate::variation::VariationError;

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("strategy is not adapted: trace differs at sample {sample} after changing later prices")]
    NonAdapted { sample: usize },
    #[error("more rule firings than the {samples} path samples")]
    RuleOverflow { samples: usize },
    #[error("position {position} at sample {sample} exceeds bound {bound}")]
    PositionBound { sample: usize, position: f64, bound: f64 },
    #[error("capital-proportional position at zero price (sample {sample})")]
    UnboundedPosition { sample: usize },
    #[error("component {component} has negative capital {capital} at sample {sample}")]
    NegativeComponent { component: usize, sample: usize, capital: f64 },
    #[error("bad interval ({a}, {b}): need 0 <= a < b")]
    BadInterval { a: f64, b: f64 },
    #[error("gauge not admissible: {0}")]
    InadmissiblePhi(String),
    #[error("mixture truncation needs a path hint or a fixed finest scale")]
    TruncationUnsafe,
    #[error("zero price at sample {index}")]
    ZeroPrice { index: usize },
    #[error("closed forms disagree: {total} vs {positive}")]
    FormMismatch { total: f64, positive: f64 },
    #[error("bound violated: terminal capital {terminal} <= {rhs}")]
    BoundViolated { terminal: f64, rhs: f64 },
    #[error("bad weights: {0}")]
    BadWeights(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Variation(#[from] VariationError),
}

pub type Result<T, E = StrategyError> = std::result::Result<T, E>;
