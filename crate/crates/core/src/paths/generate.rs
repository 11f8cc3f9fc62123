use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{uniform_grid, PathError, PricePath, Result};

/// Below this many increments fractional noise is drawn by Cholesky
/// factorization of the Toeplitz covariance instead of circulant embedding.
const CHOLESKY_LIMIT: usize = 256;

/// Seeded, reproducible description of a synthetic price path.
///
/// JSON form: `{"kind": "exp-fractional", "hurst": 0.4, "n_samples": 1025,
/// "horizon": 1.0, "seed": 7}`. Parameters of the kind sit next to `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    pub n_samples: usize,
    #[serde(default = "one")]
    pub horizon: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorKind {
    Constant {
        #[serde(default = "one")]
        level: f64,
    },
    /// `ω(t) = start + ε·t`.
    LinearDrift {
        epsilon: f64,
        #[serde(default = "one")]
        start: f64,
    },
    /// `start·exp(drift·t + σ·W_t)` sampled on the grid.
    GeometricRandomWalk {
        sigma: f64,
        #[serde(default)]
        drift: f64,
        #[serde(default = "one")]
        start: f64,
    },
    /// `start·exp(σ·B^H_t)` with `B^H` fractional Brownian motion.
    ExpFractional {
        hurst: f64,
        #[serde(default = "one")]
        sigma: f64,
        #[serde(default = "one")]
        start: f64,
    },
    /// `start·exp(σ·W_t + J_t)` with `J` compound Poisson.
    Jump {
        #[serde(default)]
        sigma: f64,
        intensity: f64,
        law: JumpLaw,
        #[serde(default = "one")]
        start: f64,
    },
    /// Explicit values on the uniform grid; `n_samples` must match.
    CustomSteps { values: Vec<f64> },
}

/// Distribution of a single log-price jump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum JumpLaw {
    Normal { mean: f64, std: f64 },
    Fixed { size: f64 },
}

fn one() -> f64 {
    1.0
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, n_samples: usize, seed: u64) -> Self {
        Self { kind, n_samples, horizon: 1.0, seed }
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PathError::BadSpec(m));
        if self.n_samples < 2 {
            return bad(format!("n_samples = {} < 2", self.n_samples));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad(format!("horizon {} must be positive", self.horizon));
        }
        match &self.kind {
            GeneratorKind::Constant { level } if !(*level >= 0.0 && level.is_finite()) => {
                bad(format!("level {level} must be nonnegative"))
            }
            GeneratorKind::LinearDrift { epsilon, start } => {
                let end = start + epsilon * self.horizon;
                if !(*start >= 0.0 && end >= 0.0 && end.is_finite()) {
                    bad(format!("linear drift leaves the positive half-line ({start} -> {end})"))
                } else {
                    Ok(())
                }
            }
            GeneratorKind::GeometricRandomWalk { sigma, start, .. } if !(*sigma >= 0.0 && *start > 0.0) => {
                bad("geometric random walk needs sigma >= 0 and start > 0".into())
            }
            GeneratorKind::ExpFractional { hurst, sigma, start } => {
                if !(*hurst > 0.0 && *hurst < 1.0) {
                    bad(format!("Hurst index {hurst} outside (0, 1)"))
                } else if !(*sigma >= 0.0 && *start > 0.0) {
                    bad("exp-fractional needs sigma >= 0 and start > 0".into())
                } else {
                    Ok(())
                }
            }
            GeneratorKind::Jump { sigma, intensity, law, start } => {
                let law_ok = match law {
                    JumpLaw::Normal { std, mean } => *std >= 0.0 && mean.is_finite(),
                    JumpLaw::Fixed { size } => size.is_finite(),
                };
                if !(*sigma >= 0.0 && *intensity >= 0.0 && *start > 0.0 && law_ok) {
                    bad("jump generator needs sigma, intensity >= 0, start > 0 and a valid law".into())
                } else {
                    Ok(())
                }
            }
            GeneratorKind::CustomSteps { values } if values.len() != self.n_samples => {
                bad(format!("custom-steps has {} values but n_samples = {}", values.len(), self.n_samples))
            }
            _ => Ok(()),
        }
    }
}

/// Draws the path described by `spec`. Same spec and seed give the same
/// path bit for bit.
pub fn generate(spec: &GeneratorSpec) -> Result<PricePath> {
    spec.validate()?;
    let n = spec.n_samples;
    let horizon = spec.horizon;
    let times = uniform_grid(n - 1, horizon);
    let dt = horizon / (n - 1) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let values = match &spec.kind {
        GeneratorKind::Constant { level } => vec![*level; n],
        GeneratorKind::LinearDrift { epsilon, start } => times.iter().map(|t| (start + epsilon * t).max(0.0)).collect(),
        GeneratorKind::GeometricRandomWalk { sigma, drift, start } => {
            let scale = sigma * dt.sqrt();
            let increments = (1..n).map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                drift * dt + scale * z
            });
            exponentiate(*start, increments)
        }
        GeneratorKind::ExpFractional { hurst, sigma, start } => {
            let scale = sigma * dt.powf(*hurst);
            let noise = fractional_noise(n - 1, *hurst, &mut rng);
            exponentiate(*start, noise.into_iter().map(|g| scale * g))
        }
        GeneratorKind::Jump { sigma, intensity, law, start } => {
            let scale = sigma * dt.sqrt();
            let poisson = if *intensity * dt > 0.0 {
                Some(Poisson::new(intensity * dt).map_err(|e| PathError::BadSpec(e.to_string()))?)
            } else {
                None
            };
            let mut increments = Vec::with_capacity(n - 1);
            for _ in 1..n {
                let z: f64 = rng.sample(StandardNormal);
                let count = poisson.as_ref().map_or(0.0, |p| p.sample(&mut rng));
                let mut jump = 0.0;
                for _ in 0..count as u64 {
                    jump += match law {
                        JumpLaw::Normal { mean, std } => {
                            let u: f64 = rng.sample(StandardNormal);
                            mean + std * u
                        }
                        JumpLaw::Fixed { size } => *size,
                    };
                }
                increments.push(scale * z + jump);
            }
            exponentiate(*start, increments)
        }
        GeneratorKind::CustomSteps { values } => values.clone(),
    };
    PricePath::new(times, values, horizon)
}

fn exponentiate(start: f64, increments: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut level = 0.0;
    let mut out = vec![start];
    for dx in increments {
        level += dx;
        out.push(start * level.exp());
    }
    out
}

/// Autocovariance of unit fractional Gaussian noise at integer lag `k`.
pub(crate) fn fgn_autocovariance(k: usize, hurst: f64) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// `n` stationary increments of fractional Brownian motion with unit
/// variance per step.
pub(crate) fn fractional_noise<R: Rng>(n: usize, hurst: f64, rng: &mut R) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    if n < CHOLESKY_LIMIT {
        cholesky_noise(n, hurst, rng)
    } else {
        circulant_noise(n, hurst, rng)
    }
}

fn cholesky_noise<R: Rng>(n: usize, hurst: f64, rng: &mut R) -> Vec<f64> {
    let gamma: Vec<f64> = (0..n).map(|k| fgn_autocovariance(k, hurst)).collect();
    // lower-triangular factor, row-major
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = gamma[i - j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                l[i * n + i] = s.max(0.0).sqrt();
            } else {
                let d = l[j * n + j];
                l[i * n + j] = if d > 0.0 { s / d } else { 0.0 };
            }
        }
    }
    let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    (0..n).map(|i| (0..=i).map(|k| l[i * n + k] * z[k]).sum()).collect()
}

fn circulant_noise<R: Rng>(n: usize, hurst: f64, rng: &mut R) -> Vec<f64> {
    let m = 2 * n;
    let mut row: Vec<Complex<f64>> = (0..m)
        .map(|k| {
            let lag = if k <= n { k } else { m - k };
            Complex::new(fgn_autocovariance(lag, hurst), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);

    let mut spectrum: Vec<Complex<f64>> = row
        .iter()
        .map(|eig| {
            let scale = (eig.re.max(0.0) / m as f64).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(scale * re, scale * im)
        })
        .collect();
    fft.process(&mut spectrum);
    spectrum[..n].iter().map(|c| c.re).collect()
}
