//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use roughmarket::paths::{discretize, generate, GeneratorKind, GeneratorSpec, JumpLaw, PricePath};
use roughmarket::strategies::{
    borrowing_free_check, borrowing_free_check_mixture, clairvoyant_strategy, doob_strategy, level_for, prop3_case,
    run_mixture, run_simple, upper_prob_forms, volatility_mixture, DyadicWeights, Rule, ScalePolicy, SimpleStrategy,
    Sizing, Trigger, VolatilityKind,
};
use roughmarket::variation::{crossings, psi, qvar_profile, var_phi, var_signed, VariationFunctional};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform(values: Vec<f64>) -> PricePath {
    PricePath::uniform(values, 1.0).unwrap()
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Mixed bag of positive paths from the library generators.
fn generated(seed: u64, n: usize) -> PricePath {
    let kind = match seed % 4 {
        0 => GeneratorKind::GeometricRandomWalk { sigma: 0.6, drift: 0.0, start: 1.0 },
        1 => GeneratorKind::ExpFractional { hurst: [0.3, 0.5, 0.7][(seed / 4 % 3) as usize], sigma: 0.8, start: 1.0 },
        2 => {
            GeneratorKind::Jump { sigma: 0.3, intensity: 5.0, law: JumpLaw::Normal { mean: 0.0, std: 0.3 }, start: 1.0 }
        }
        _ => GeneratorKind::GeometricRandomWalk { sigma: 1.5, drift: -0.5, start: 2.0 },
    };
    generate(&GeneratorSpec::new(kind, n, seed)).unwrap()
}

/// Random step path values: iid, lattice (ties) or a random walk, at a random scale.
fn random_values(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let scale = [1e-3, 0.1, 1.0, 1.0, 10.0, 1e3][r.random_range(0..6)];
    match r.random_range(0..3) {
        0 => (0..n).map(|_| scale * r.random::<f64>()).collect(),
        1 => (0..n).map(|_| scale * r.random_range(0..5) as f64 / 4.0).collect(),
        _ => {
            let mut x = scale;
            (0..n)
                .map(|_| {
                    x = (x + scale * (r.random::<f64>() - 0.5)).abs();
                    x
                })
                .collect()
        }
    }
}

/// Supremum of `Σ φ(|Δ|)` over every subsequence from the first to the last sample.
fn exhaustive(values: &[f64], phi: &VariationFunctional) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let interior = n - 2;
    let mut best = 0.0f64;
    for mask in 0u32..(1 << interior) {
        let mut prev = values[0];
        let mut total = 0.0;
        for i in 0..interior {
            if mask & (1 << i) != 0 {
                total += phi.eval((values[i + 1] - prev).abs());
                prev = values[i + 1];
            }
        }
        total += phi.eval((values[n - 1] - prev).abs());
        best = best.max(total);
    }
    best
}

fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let functionals = [
        VariationFunctional::power(0.5),
        VariationFunctional::power(1.0),
        VariationFunctional::power(2.0),
        VariationFunctional::power(2.5),
        VariationFunctional::TaylorPsi,
        VariationFunctional::DampedSquare,
    ];
    let mut r = rng(1);
    let mut worst = 0.0f64;
    let mut bad = 0;
    for _ in 0..500 {
        let n = r.random_range(2..=12);
        let path = uniform(random_values(&mut r, n));
        for phi in &functionals {
            let dp = var_phi(&path, phi).unwrap();
            let oracle = exhaustive(path.values(), phi);
            let e = rel_err(dp, oracle);
            worst = worst.max(e);
            if e > 1e-12 {
                bad += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    outcome(
        bad == 0 && elapsed < Duration::from_secs(10),
        format!("3000 cases, {bad} above 1e-12, worst rel err {worst:.2e}, {elapsed:.2?} (limit 10s)"),
    )
}

fn upcrossings(values: &[f64], a: f64, b: f64) -> u64 {
    let mut armed = false;
    let mut up = 0;
    for &x in values {
        if x <= a {
            armed = true;
        } else if armed && x >= b {
            up += 1;
            armed = false;
        }
    }
    up
}

fn doob_bound() -> Outcome {
    let started = Instant::now();
    let mut r = rng(2);
    let (mut negative, mut short, mut total_up) = (0, 0, 0u64);
    for _ in 0..1000 {
        let n = r.random_range(2..=200);
        let values: Vec<f64> = random_values(&mut r, n).into_iter().map(|x| x + 1e-9).collect();
        let hi = values.iter().cloned().fold(0.0, f64::max);
        let a = hi * r.random_range(0.05..0.7);
        let b = a + hi * r.random_range(0.01..0.5);
        let path = uniform(values);
        let trace = run_simple(&doob_strategy(a, b).unwrap(), &path).unwrap();
        let up = upcrossings(path.values(), a, b);
        total_up += up;
        if trace.capital.iter().any(|&k| k < 0.0) {
            negative += 1;
        }
        if trace.terminal() < (b - a) * up as f64 {
            short += 1;
        }
    }
    let elapsed = started.elapsed();
    outcome(
        negative == 0 && short == 0 && elapsed < Duration::from_secs(5),
        format!(
            "1000 paths, {total_up} upcrossings, {negative} with negative capital, {short} below (b-a)U, {elapsed:.2?} (limit 5s)"
        ),
    )
}

fn upper_prob_identities() -> Outcome {
    let (mut worst_factor, mut worst_forms) = (0.0f64, 0.0f64);
    for seed in 0..1000u64 {
        let path = generated(seed, 16 + (seed as usize * 7) % 300);
        let logs: Vec<f64> = path.values().iter().map(|x| x.ln()).collect();
        let plus: f64 = logs.windows(2).map(|w| (w[1] - w[0]).max(0.0)).sum();
        let expected = plus.exp();
        let (strategy, factor) = clairvoyant_strategy(&path).unwrap();
        let terminal = run_simple(&strategy, &path).unwrap().terminal();
        worst_factor = worst_factor.max(rel_err(factor, expected)).max(rel_err(terminal, expected));
        let (total, positive) = upper_prob_forms(&path).unwrap();
        worst_forms = worst_forms.max(rel_err(total, positive));
    }
    let line = generate(&GeneratorSpec::new(GeneratorKind::LinearDrift { epsilon: 1.0, start: 1.0 }, 1001, 0)).unwrap();
    let (u, _) = upper_prob_forms(&line).unwrap();
    let line_err = (u - 0.5).abs();
    outcome(
        worst_factor <= 1e-9 && worst_forms <= 1e-12 && line_err <= 1e-12,
        format!(
            "factor rel err {worst_factor:.2e} (1e-9), forms rel err {worst_forms:.2e} (1e-12), 1+t gives {u} (err {line_err:.1e})"
        ),
    )
}

fn prop3_grid() -> Outcome {
    let started = Instant::now();
    let params: Vec<(f64, f64, usize)> = [0.5, 1.0]
        .into_iter()
        .flat_map(|e| [0.5, 1.0].into_iter().flat_map(move |d| [64, 256, 1024].into_iter().map(move |n| (e, d, n))))
        .collect();
    let jobs: Vec<(f64, u64)> = [0.4, 0.5, 0.6].into_iter().flat_map(|h| (0..50).map(move |s| (h, s))).collect();
    let results: Vec<(usize, f64)> = jobs
        .par_iter()
        .map(|&(hurst, seed)| {
            let spec = GeneratorSpec::new(GeneratorKind::ExpFractional { hurst, sigma: 1.0, start: 1.0 }, 1025, seed);
            let path = generate(&spec).unwrap();
            let mut fails = 0;
            let mut worst = f64::INFINITY;
            for &(e, d, n) in &params {
                let r = prop3_case(&path, e, d, n).unwrap();
                worst = worst.min(r.terminal_capital - r.rhs);
                if !(r.terminal_capital > r.rhs) {
                    fails += 1;
                }
            }
            (fails, worst)
        })
        .collect();
    let mut fails: usize = results.iter().map(|r| r.0).sum();
    let mut worst = results.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let fixture = uniform(vec![0.0, 1.0, 0.0, 1.0]);
    for &(e, d, _) in &params {
        let r = prop3_case(&fixture, e, d, 3).unwrap();
        worst = worst.min(r.terminal_capital - r.rhs);
        if !(r.terminal_capital > r.rhs) {
            fails += 1;
        }
    }
    let cases = jobs.len() * params.len() + params.len();
    let elapsed = started.elapsed();
    outcome(
        fails == 0 && elapsed < Duration::from_secs(120),
        format!("{cases} cases, {fails} violations, smallest margin {worst:.4}, {elapsed:.2?} (limit 2min)"),
    )
}

/// Upcrossings of every grid interval `(kh, (k+1)h)` meeting the path's range, one interval at a time.
fn grid_upcrossings(values: &[f64], h: f64) -> u64 {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(0.0, f64::max);
    let (k0, k1) = (((lo / h).floor() as i64 - 1).max(0), (hi / h).ceil() as i64);
    (k0..=k1).map(|k| crossings(values, k as f64 * h, (k + 1) as f64 * h).unwrap().up).sum()
}

fn prop1_crossings() -> Outcome {
    const J_MAX: i32 = 10;
    let functionals =
        [VariationFunctional::power(2.5), VariationFunctional::power(3.0), VariationFunctional::DampedSquare];
    let mut r = rng(5);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..200 {
        let level = r.random_range(0..=2u32);
        let top = 2f64.powi(level as i32);
        let n = r.random_range(2..=100);
        let values: Vec<f64> = (0..n).map(|_| top * (1.0 - r.random::<f64>())).collect();
        let path = uniform(values);
        let counts: Vec<f64> = (0..=J_MAX).map(|j| grid_upcrossings(path.values(), 2f64.powi(-j)) as f64).collect();
        for phi in &functionals {
            let mixture = volatility_mixture(
                &VolatilityKind::Prop1 { phi: phi.clone(), level },
                ScalePolicy::Fixed { j_max: J_MAX },
                None,
            )
            .unwrap();
            let weights = DyadicWeights::for_gauge(phi).unwrap();
            let finest = mixture.components.len() - 1;
            let rhs: f64 = (0..=finest)
                .map(|j| weights.weight(j as u32) * 2f64.powi(-(level as i32) - 2 * j as i32) * counts[j])
                .sum();
            let terminal = run_mixture(&mixture, &path).unwrap().terminal();
            worst = worst.min(terminal - rhs);
            if terminal < rhs {
                violations += 1;
            }
        }
    }
    outcome(violations == 0, format!("600 cases, {violations} violations, smallest margin {worst:.3e}"))
}

fn variation_algebra() -> Outcome {
    let mut r = rng(6);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = r.random_range(2..=200);
        let path = uniform(random_values(&mut r, n));
        let v = path.values();
        let s = var_signed(v);
        let total = var_phi(&path, &VariationFunctional::power(1.0)).unwrap();
        worst = worst.max((total - (s.plus + s.minus)).abs()).max((s.plus - s.minus - (v[n - 1] - v[0])).abs());
    }
    let psi_ok = psi(1.0) == 0.5 && VariationFunctional::TaylorPsi.eval(1.0) == 0.5;
    let deltas: Vec<f64> = (0..10).map(|k| 2f64.powi(-k)).collect();
    let mut rising = 0;
    for seed in 0..100u64 {
        let path = generated(seed, 65);
        let q = qvar_profile(&path, &deltas).unwrap();
        rising += q.windows(2).filter(|w| w[1].value > w[0].value).count();
    }
    outcome(
        worst <= 1e-9 && psi_ok && rising == 0,
        format!("identity err {worst:.2e} (1e-9), psi(1)=0.5 {psi_ok}, qvar increases {rising}"),
    )
}

fn borrowing_audit() -> Outcome {
    let mut r = rng(7);
    let (mut flagged, mut missed) = (Vec::new(), 0);
    for seed in 0..500u64 {
        let path = generated(seed, 65);
        let (lo, hi) = (path.inf(), path.sup());
        let a = lo + (hi - lo) * r.random_range(0.1..0.5);
        let b = a + (hi - a) * r.random_range(0.1..0.9);
        let level = level_for(&path);
        let policy = ScalePolicy::Fixed { j_max: 6 };
        let doob = borrowing_free_check(&doob_strategy(a, b).unwrap(), &path).unwrap().ok;
        let clair = borrowing_free_check(&clairvoyant_strategy(&path).unwrap().0, &path).unwrap().ok;
        let p1 =
            volatility_mixture(&VolatilityKind::Prop1 { phi: VariationFunctional::power(3.0), level }, policy, None)
                .unwrap();
        let p3 = volatility_mixture(&VolatilityKind::Prop3 { epsilon: 1.0, delta: 1.0, levels: level }, policy, None)
            .unwrap();
        let p1 = borrowing_free_check_mixture(&p1, &path, 4096).unwrap().ok;
        let p3 = borrowing_free_check_mixture(&p3, &path, 4096).unwrap().ok;
        for (name, ok) in [("doob", doob), ("clairvoyant", clair), ("prop1", p1), ("prop3", p3)] {
            if !ok {
                flagged.push(format!("{name}@{seed}"));
            }
        }

        let short = SimpleStrategy::new(1.0, vec![Rule::units(Trigger::Immediately, -1.0)]);
        let leveraged =
            SimpleStrategy::new(1.0, vec![Rule::new(Trigger::Immediately, Sizing::CapitalFraction { fraction: 2.0 })]);
        for s in [short, leveraged] {
            let report = borrowing_free_check(&s, &path).unwrap();
            match report.first_violation {
                Some(v) if v.continuation_capital < 0.0 => {}
                _ => missed += 1,
            }
        }
    }
    outcome(
        flagged.is_empty() && missed == 0,
        format!(
            "500 paths x 4 strategies, {} flagged{}; 1000 violators, {missed} without a negative continuation",
            flagged.len(),
            flagged.first().map(|f| format!(" (first {f})")).unwrap_or_default()
        ),
    )
}

fn roughness_direction() -> Outcome {
    let ns = [256usize, 1024, 4096];
    let rows: Vec<Vec<(f64, f64)>> = (0..50u64)
        .into_par_iter()
        .map(|seed| {
            let spec =
                GeneratorSpec::new(GeneratorKind::ExpFractional { hurst: 0.4, sigma: 1.0, start: 1.0 }, 4097, seed);
            let path = generate(&spec).unwrap();
            ns.iter()
                .map(|&n| {
                    let omega = discretize(&path, n).unwrap();
                    let v = var_phi(&omega, &VariationFunctional::power(2.5)).unwrap();
                    let s = prop3_case(&path, 0.5, 0.5, n).unwrap().terminal_capital;
                    (v, s)
                })
                .collect()
        })
        .collect();
    let var: Vec<f64> = (0..ns.len()).map(|k| median(rows.iter().map(|r| r[k].0).collect())).collect();
    let cap: Vec<f64> = (0..ns.len()).map(|k| median(rows.iter().map(|r| r[k].1).collect())).collect();
    let pass = var.windows(2).all(|w| w[1] > w[0]) && cap.windows(2).all(|w| w[1] >= w[0]);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" < ");
    outcome(pass, format!("median var_2.5 {}; median S_T {}", fmt(&var), fmt(&cap)))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 oracle equivalence", oracle_equivalence),
        ("2 doob bound", doob_bound),
        ("3 upper probability identities", upper_prob_identities),
        ("4 level-mixture bound", prop3_grid),
        ("5 crossing inequality", prop1_crossings),
        ("6 variation algebra", variation_algebra),
        ("7 borrowing-free audit", borrowing_audit),
        ("8 roughness direction", roughness_direction),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| outcome(false, "panicked"));
        println!("[{}] criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
