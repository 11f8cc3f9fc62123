//! Mixtures of dyadic Doob strategies whose capital grows with the
//! variation of the price path.

use serde::{Deserialize, Serialize};

use super::mixture::{run_mixture, Component, DoobGrid, StrategyMixture};
use super::{Result, StrategyError};
use crate::numeric::{compensated_sum, Compensated};
use crate::paths::{discretize, PricePath};
use crate::variation::admissible::{dyadic_weight, MAX_DYADIC_DEPTH};
use crate::variation::{phi_admissible, var_phi, VariationFunctional};

/// Finest dyadic scale ever built; `2^{L+j}` must fit comfortably in `i64`.
pub const MAX_SCALE: i32 = 60;
const MAX_GRID_EXPONENT: i32 = 62;

/// Normalized dyadic weights `w(j) ∝ 2^{2j} φ(2^{−j})`, `j ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum DyadicWeights {
    /// `(1 − r) r^j`, from a power gauge `u^p` with `r = 2^{2−p}`.
    Geometric { ratio: f64 },
    /// Numerically normalized weights for `j ≤ MAX_DYADIC_DEPTH`, zero
    /// beyond.
    Tabulated { weights: Vec<f64> },
}

impl DyadicWeights {
    pub fn for_gauge(phi: &VariationFunctional) -> Result<Self> {
        phi.validate()?;
        if let VariationFunctional::Power { p } = *phi {
            if p <= 2.0 {
                return Err(StrategyError::InadmissiblePhi(format!("Σ 2^(2j) φ(2^-j) diverges for u^{p}")));
            }
            return Ok(Self::Geometric { ratio: 2f64.powf(2.0 - p) });
        }
        let report = phi_admissible(phi, MAX_DYADIC_DEPTH)?;
        if !report.admissible {
            return Err(StrategyError::InadmissiblePhi(format!(
                "{}: doubling ratio {:.3e}, tail trend {:.3}",
                phi.label(),
                report.ratio_sup_estimate,
                report.tail_trend
            )));
        }
        let raw: Vec<f64> = (0..=MAX_DYADIC_DEPTH as i32).map(|j| dyadic_weight(phi, j)).collect();
        let total = compensated_sum(raw.iter().copied());
        if !(total > 0.0 && total.is_finite()) {
            return Err(StrategyError::InadmissiblePhi(format!("{}: dyadic mass {total}", phi.label())));
        }
        Ok(Self::Tabulated { weights: raw.into_iter().map(|w| w / total).collect() })
    }

    pub fn weight(&self, j: u32) -> f64 {
        match self {
            Self::Geometric { ratio } => (1.0 - ratio) * ratio.powi(j as i32),
            Self::Tabulated { weights } => weights.get(j as usize).copied().unwrap_or(0.0),
        }
    }

    /// `Σ_{j > j_max} w(j)·(2^{L−1} − 2^{−j−1})`, the initial capital of
    /// the omitted scales at level `L`.
    fn tail_capital(&self, level: u32, j_max: u32) -> f64 {
        let half_top = 2f64.powi(level as i32 - 1);
        match self {
            Self::Geometric { ratio: r } => {
                let m = (j_max + 1) as i32;
                half_top * r.powi(m) - 0.5 * (1.0 - r) * (r / 2.0).powi(m) / (1.0 - r / 2.0)
            }
            Self::Tabulated { weights } => ((j_max as usize + 1)..weights.len())
                .map(|j| weights[j] * (half_top - 2f64.powi(-(j as i32) - 1)))
                .sum::<Compensated>()
                .value(),
        }
    }
}

/// How the finest scale `j` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum ScalePolicy {
    /// Scales `j ≤ j_max`.
    Fixed { j_max: i32 },
    /// Finest scale with `2^{−j} ≤ g/4`, `g` the smallest gap between
    /// distinct values of the hint path. Every up- or down-move between
    /// sample values then contains a whole grid interval at an included
    /// scale.
    FromPath,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VolatilityKind {
    /// Single level `L` (paths bounded by `2^L`) with gauge `φ`.
    Prop1 { phi: VariationFunctional, level: u32 },
    /// Levels `0..=levels`, power `2 + ε`, level mixing exponent `δ`.
    Prop3 { epsilon: f64, delta: f64, levels: u32 },
}

/// Smallest gap between distinct sample values.
fn min_gap(values: &[f64]) -> Option<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.windows(2).map(|w| w[1] - w[0]).filter(|&d| d > 0.0).min_by(f64::total_cmp)
}

/// Smallest integer `j` with `2^{−j} ≤ gap / 4`.
fn scale_for_gap(gap: f64) -> i32 {
    let mut j = (-(gap / 4.0).log2()).ceil() as i32;
    while 2f64.powi(-(j - 1)) <= gap / 4.0 {
        j -= 1;
    }
    while 2f64.powi(-j) > gap / 4.0 {
        j += 1;
    }
    j
}

fn finest_scale(policy: ScalePolicy, hint: Option<&PricePath>, lowest: i32, level: u32) -> Result<i32> {
    let j = match policy {
        ScalePolicy::Fixed { j_max } => j_max,
        ScalePolicy::FromPath => {
            let path = hint.ok_or(StrategyError::TruncationUnsafe)?;
            match min_gap(path.values()) {
                Some(gap) => scale_for_gap(gap),
                None => lowest,
            }
        }
    };
    Ok(j.max(lowest).min(MAX_SCALE).min(MAX_GRID_EXPONENT - level as i32))
}

/// Level-`L` ceiling `⌈log₂(1 ∨ sup ω)⌉`.
pub fn level_for(path: &PricePath) -> u32 {
    let sup = path.sup().max(1.0);
    let mut level = 0u32;
    while 2f64.powi(level as i32) < sup {
        level += 1;
    }
    level
}

fn grid(level: u32, j: i32, weight: f64) -> Component {
    Component::DoobGrid(DoobGrid { step: 2f64.powi(-j), count: 1u64 << (level as i32 + j), weight })
}

/// Builds the dyadic mixture. Scales finer than the policy allows are
/// replaced by their initial capital held as cash, so the initial capital
/// is that of the full mixture and the terminal capital can only be lower.
pub fn volatility_mixture(
    kind: &VolatilityKind,
    policy: ScalePolicy,
    hint: Option<&PricePath>,
) -> Result<StrategyMixture> {
    match kind {
        VolatilityKind::Prop1 { phi, level } => prop1_mixture(phi, *level, policy, hint),
        VolatilityKind::Prop3 { epsilon, delta, levels } => prop3_mixture(*epsilon, *delta, *levels, policy, hint),
    }
}

fn prop1_mixture(
    phi: &VariationFunctional,
    level: u32,
    policy: ScalePolicy,
    hint: Option<&PricePath>,
) -> Result<StrategyMixture> {
    if level as i32 > MAX_GRID_EXPONENT - 1 {
        return Err(StrategyError::BadParameter(format!("level {level} too large")));
    }
    let weights = DyadicWeights::for_gauge(phi)?;
    let j_max = finest_scale(policy, hint, 0, level)? as u32;
    let components =
        (0..=j_max).map(|j| grid(level, j as i32, weights.weight(j) * 2f64.powi(-(level as i32) - j as i32))).collect();
    Ok(StrategyMixture {
        components,
        tail_capital: weights.tail_capital(level, j_max),
        descriptor: format!("dyadic mixture {} level {level} scales 0..={j_max}", phi.label()),
    })
}

/// `1 − ½(2^ε − 1)/(2^{1+ε} − 1)`, the initial capital of every level.
pub fn prop3_level_capital(epsilon: f64) -> f64 {
    1.0 - 0.5 * (2f64.powf(epsilon) - 1.0) / (2f64.powf(1.0 + epsilon) - 1.0)
}

fn prop3_mixture(
    epsilon: f64,
    delta: f64,
    levels: u32,
    policy: ScalePolicy,
    hint: Option<&PricePath>,
) -> Result<StrategyMixture> {
    if !(epsilon > 0.0 && epsilon.is_finite() && delta > 0.0 && delta.is_finite()) {
        return Err(StrategyError::BadParameter(format!("need ε > 0 and δ > 0, got ε={epsilon}, δ={delta}")));
    }
    if levels as i32 > MAX_GRID_EXPONENT - 3 {
        return Err(StrategyError::BadParameter(format!("{levels} levels too many")));
    }
    let norm = 1.0 - 2f64.powf(-epsilon);
    let level_capital = prop3_level_capital(epsilon);
    let mut components = Vec::new();
    let mut tail = Compensated::ZERO;
    for level in 0..=levels {
        let l = level as i32;
        let lambda = (1.0 - 2f64.powf(-delta)) * 2f64.powf(-delta * level as f64);
        let scale = 2f64.powi(1 - l);
        let lowest = 2 - l;
        let j_max = finest_scale(policy, hint, lowest, level)?;
        let w = |j: i32| norm * 2f64.powf(epsilon * (lowest - j) as f64);
        for j in lowest..=j_max {
            components.push(grid(level, j, lambda * scale * w(j) * 2f64.powi(-l - j)));
        }
        // Σ_{j > j_max} w(j) (1 − 2^{−L−j})
        let first_omitted = j_max + 1;
        let mass = 2f64.powf(-epsilon * (first_omitted - lowest) as f64);
        let dyadic_mass =
            norm * 2f64.powf(epsilon * lowest as f64) * 2f64.powf(-(1.0 + epsilon) * first_omitted as f64)
                / (1.0 - 2f64.powf(-1.0 - epsilon));
        tail = tail.add(lambda * (mass - 2f64.powi(-l) * dyadic_mass));
    }
    tail = tail.add(level_capital * 2f64.powf(-delta * (levels + 1) as f64));
    Ok(StrategyMixture {
        components,
        tail_capital: tail.value(),
        descriptor: format!("level mixture ε={epsilon} δ={delta} levels 0..={levels}"),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop3Report {
    pub epsilon: f64,
    pub delta: f64,
    pub intervals: usize,
    pub levels: u32,
    pub initial_capital: f64,
    pub terminal_capital: f64,
    pub variation: f64,
    pub sup: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

/// `(1−2^{−ε})(1−2^{−δ})2^{−6−ε−δ} · var_{2+ε} / (1 ∨ sup)^{2+ε+δ} − ¼`.
pub fn prop3_rhs(epsilon: f64, delta: f64, variation: f64, sup: f64) -> f64 {
    (1.0 - 2f64.powf(-epsilon)) * (1.0 - 2f64.powf(-delta)) * 2f64.powf(-6.0 - epsilon - delta) * variation
        / sup.max(1.0).powf(2.0 + epsilon + delta)
        - 0.25
}

/// Runs the level mixture on `ω_N` and compares its terminal capital
/// with the variation lower bound. The report is returned whether or not
/// the bound holds; see [`verify_prop3_bound`] for the checked form.
pub fn prop3_case(path: &PricePath, epsilon: f64, delta: f64, intervals: usize) -> Result<Prop3Report> {
    let omega = discretize(path, intervals)?;
    let levels = level_for(&omega);
    let mixture =
        volatility_mixture(&VolatilityKind::Prop3 { epsilon, delta, levels }, ScalePolicy::FromPath, Some(&omega))?;
    let trace = run_mixture(&mixture, &omega)?;
    let variation = var_phi(&omega, &VariationFunctional::power(2.0 + epsilon))?;
    let sup = omega.sup();
    let rhs = prop3_rhs(epsilon, delta, variation, sup);
    let terminal = trace.terminal();
    Ok(Prop3Report {
        epsilon,
        delta,
        intervals,
        levels,
        initial_capital: mixture.initial_capital(),
        terminal_capital: terminal,
        variation,
        sup,
        rhs,
        margin: terminal - rhs,
        pass: terminal > rhs,
    })
}

pub fn verify_prop3_bound(path: &PricePath, epsilon: f64, delta: f64, intervals: usize) -> Result<Prop3Report> {
    let report = prop3_case(path, epsilon, delta, intervals)?;
    if !report.pass {
        return Err(StrategyError::BoundViolated { terminal: report.terminal_capital, rhs: report.rhs });
    }
    Ok(report)
}
