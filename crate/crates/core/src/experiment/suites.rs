use std::collections::BTreeMap;

use super::{CaseReport, ExperimentError, ExperimentKind, ParameterGrid, Result};
use crate::numeric::close;
use crate::paths::PricePath;
use crate::strategies::{
    borrowing_free_check, borrowing_free_check_mixture, clairvoyant_strategy, doob_strategy, level_for, prop3_case,
    run_mixture, run_simple, upper_prob_forms, volatility_mixture, BorrowReport, DyadicWeights, Rule, ScalePolicy,
    SimpleStrategy, Sizing, Trigger, VolatilityKind, FORM_TOLERANCE,
};
use crate::variation::{
    brute_force_var_phi, crossings, grid_crossings, qvar_profile, var_phi, var_signed, variation_growth_profile,
    VariationFunctional, BRUTE_FORCE_LIMIT,
};

/// Doob grids with at most this many members are audited one by one.
const AUDIT_EXPAND_LIMIT: u64 = 4096;
const CAPITAL_TOLERANCE: f64 = 1e-12;

struct Cases {
    generator: usize,
    seed: u64,
    prefix: String,
    out: Vec<CaseReport>,
}

impl Cases {
    fn push(&mut self, label: &str, metrics: &[(&str, f64)], pass: bool, note: Option<String>) {
        self.out.push(CaseReport {
            key: format!("{}/{label}", self.prefix),
            generator: self.generator,
            seed: self.seed,
            metrics: metrics.iter().map(|&(k, v)| (k.to_string(), v)).collect::<BTreeMap<_, _>>(),
            pass,
            note,
        });
    }
}

fn default_functionals() -> Vec<VariationFunctional> {
    let mut v: Vec<_> = [0.5, 1.0, 2.0, 2.5, 3.0].into_iter().map(VariationFunctional::power).collect();
    v.push(VariationFunctional::TaylorPsi);
    v
}

fn policy(grid: &ParameterGrid) -> ScalePolicy {
    grid.j_max.map_or(ScalePolicy::FromPath, |j_max| ScalePolicy::Fixed { j_max })
}

/// All cases of one experiment kind on one generated path.
pub fn evaluate_path(
    kind: ExperimentKind,
    grid: &ParameterGrid,
    path: &PricePath,
    generator: usize,
    seed: u64,
) -> Result<Vec<CaseReport>> {
    let mut cases = Cases { generator, seed, prefix: format!("g{generator:02}/s{seed:08}"), out: Vec::new() };
    match kind {
        ExperimentKind::OracleSuite => oracle(grid, path, &mut cases)?,
        ExperimentKind::DoobSuite => doob(grid, path, &mut cases)?,
        ExperimentKind::Prop1Check => prop1(grid, path, &mut cases)?,
        ExperimentKind::Prop3Check => prop3(grid, path, &mut cases)?,
        ExperimentKind::UpperProbTable => upper_prob(path, &mut cases)?,
        ExperimentKind::GrowthProfile => growth(grid, path, &mut cases)?,
        ExperimentKind::BorrowAudit => audit(grid, path, &mut cases)?,
    }
    Ok(cases.out)
}

fn oracle(grid: &ParameterGrid, path: &PricePath, cases: &mut Cases) -> Result<()> {
    if path.len() > BRUTE_FORCE_LIMIT {
        return Err(ExperimentError::Config(format!("oracle-suite paths need at most {BRUTE_FORCE_LIMIT} samples")));
    }
    let functionals = if grid.functionals.is_empty() { default_functionals() } else { grid.functionals.clone() };
    for (i, phi) in functionals.iter().enumerate() {
        let dp = var_phi(path, phi)?;
        let brute = brute_force_var_phi(path, phi)?;
        let rel = (dp - brute).abs() / brute.abs().max(f64::MIN_POSITIVE);
        cases.push(
            &format!("f{i:02}"),
            &[("dp", dp), ("oracle", brute), ("rel_err", rel)],
            close(dp, brute, 1e-12),
            Some(phi.label()),
        );
    }
    Ok(())
}

fn doob(grid: &ParameterGrid, path: &PricePath, cases: &mut Cases) -> Result<()> {
    for (i, &(a, b)) in grid.intervals.iter().enumerate() {
        let trace = run_simple(&doob_strategy(a, b)?, path)?;
        let up = crossings(path.values(), a, b)?.up as f64;
        let rhs = (b - a) * up;
        let terminal = trace.terminal();
        let min = trace.min_capital();
        let pass = min >= 0.0 && terminal >= rhs - CAPITAL_TOLERANCE * terminal.abs().max(1.0);
        cases.push(
            &format!("i{i:03}"),
            &[
                ("a", a),
                ("b", b),
                ("initial_capital", trace.initial_capital),
                ("terminal_capital", terminal),
                ("upcrossings", up),
                ("rhs", rhs),
                ("margin", terminal - rhs),
                ("min_capital", min),
            ],
            pass,
            None,
        );
    }
    Ok(())
}

fn prop1(grid: &ParameterGrid, path: &PricePath, cases: &mut Cases) -> Result<()> {
    let level = grid.level.unwrap_or_else(|| level_for(path));
    let top = 2f64.powi(level as i32);
    for (i, phi) in grid.functionals.iter().enumerate() {
        let label = format!("f{i:02}");
        if path.sup() > top {
            cases.push(
                &label,
                &[("sup", path.sup()), ("level", level as f64)],
                true,
                Some("sup above 2^L, bound not applicable".into()),
            );
            continue;
        }
        let mixture = volatility_mixture(&VolatilityKind::Prop1 { phi: phi.clone(), level }, policy(grid), Some(path))?;
        let weights = DyadicWeights::for_gauge(phi)?;
        let trace = run_mixture(&mixture, path)?;
        let finest = mixture.components.len() as u32 - 1;
        let mut rhs = 0.0;
        for j in 0..=finest {
            let h = 2f64.powi(-(j as i32));
            let up = grid_crossings(path.values(), h)?.up as f64;
            rhs += weights.weight(j) * h * h / top * up;
        }
        let terminal = trace.terminal();
        let initial = mixture.initial_capital();
        let pass =
            terminal >= rhs - CAPITAL_TOLERANCE * terminal.abs().max(1.0) && initial <= top / 2.0 * (1.0 + 1e-15);
        cases.push(
            &label,
            &[
                ("level", level as f64),
                ("finest_scale", finest as f64),
                ("initial_capital", initial),
                ("terminal_capital", terminal),
                ("rhs", rhs),
                ("margin", terminal - rhs),
            ],
            pass,
            Some(phi.label()),
        );
    }
    Ok(())
}

fn prop3(grid: &ParameterGrid, path: &PricePath, cases: &mut Cases) -> Result<()> {
    for &eps in &grid.epsilon {
        for &delta in &grid.delta {
            for &n in &grid.n {
                let r = prop3_case(path, eps, delta, n)?;
                cases.push(
                    &format!("eps={eps}/delta={delta}/N={n:07}"),
                    &[
                        ("epsilon", eps),
                        ("delta", delta),
                        ("n", n as f64),
                        ("levels", r.levels as f64),
                        ("initial_capital", r.initial_capital),
                        ("terminal_capital", r.terminal_capital),
                        ("variation", r.variation),
                        ("sup", r.sup),
                        ("rhs", r.rhs),
                        ("margin", r.margin),
                    ],
                    r.pass,
                    None,
                );
            }
        }
    }
    Ok(())
}

fn upper_prob(path: &PricePath, cases: &mut Cases) -> Result<()> {
    let (total, positive) = upper_prob_forms(path)?;
    let (strategy, factor) = clairvoyant_strategy(path)?;
    let logs = path.log_values().expect("checked positive above");
    let exp_plus = var_signed(&logs).plus.exp();
    let realized = run_simple(&strategy, path)?.terminal();
    let pass = close(total, positive, FORM_TOLERANCE)
        && (factor - exp_plus).abs() <= 1e-9 * exp_plus
        && (realized - factor).abs() <= 1e-9 * factor;
    cases.push(
        "upper-prob",
        &[
            ("upper_prob", total),
            ("upper_prob_positive_form", positive),
            ("clairvoyant_factor", factor),
            ("exp_var_plus", exp_plus),
            ("clairvoyant_terminal", realized),
        ],
        pass,
        None,
    );
    Ok(())
}

fn growth(grid: &ParameterGrid, path: &PricePath, cases: &mut Cases) -> Result<()> {
    let profile = variation_growth_profile(path, &grid.p, &grid.n)?;
    for (row, &n) in profile.n_grid.iter().enumerate() {
        for (col, &p) in profile.p_grid.iter().enumerate() {
            cases.push(
                &format!("p={p}/N={n:07}"),
                &[("p", p), ("n", n as f64), ("var", profile.values[row][col])],
                true,
                None,
            );
        }
    }
    if !grid.mesh.is_empty() {
        for point in qvar_profile(path, &grid.mesh)? {
            cases.push(&format!("mesh={}", point.delta), &[("mesh", point.delta), ("qvar", point.value)], true, None);
        }
    }
    Ok(())
}

fn audit_case(cases: &mut Cases, label: &str, report: &BorrowReport, expect_ok: bool) {
    let v = report.first_violation.as_ref();
    let continuation = v.map_or(f64::NAN, |v| v.continuation_capital);
    let pass = if expect_ok { report.ok } else { v.is_some_and(|v| v.continuation_capital < 0.0) };
    cases.push(
        label,
        &[("ok", if report.ok { 1.0 } else { 0.0 }), ("continuation_capital", continuation)],
        pass,
        v.map(|v| format!("{:?} at sample {}", v.kind, v.sample)),
    );
}

fn audit(grid: &ParameterGrid, path: &PricePath, cases: &mut Cases) -> Result<()> {
    let x0 = path.first();
    let intervals =
        if grid.intervals.is_empty() { vec![(0.5 * x0, x0), (x0, 1.5 * x0 + 0.1)] } else { grid.intervals.clone() };
    for (i, &(a, b)) in intervals.iter().enumerate() {
        let r = borrowing_free_check(&doob_strategy(a, b)?, path)?;
        audit_case(cases, &format!("doob-{i:03}"), &r, true);
    }
    if path.inf() > 0.0 {
        let r = borrowing_free_check(&clairvoyant_strategy(path)?.0, path)?;
        audit_case(cases, "clairvoyant", &r, true);
    }
    let mixtures = [
        ("prop1", VolatilityKind::Prop1 { phi: VariationFunctional::power(3.0), level: level_for(path) }),
        ("prop3", VolatilityKind::Prop3 { epsilon: 1.0, delta: 1.0, levels: level_for(path) }),
    ];
    for (label, kind) in mixtures {
        let m = volatility_mixture(&kind, policy(grid), Some(path))?;
        let r = borrowing_free_check_mixture(&m, path, AUDIT_EXPAND_LIMIT)?;
        cases.push(
            label,
            &[("ok", if r.ok { 1.0 } else { 0.0 }), ("components", r.components_checked as f64)],
            r.ok,
            None,
        );
    }
    let short = SimpleStrategy::new(x0, vec![Rule::units(Trigger::Immediately, -1.0)]).described("short");
    audit_case(cases, "violator-short", &borrowing_free_check(&short, path)?, false);
    if x0 > 0.0 {
        let leveraged =
            SimpleStrategy::new(1.0, vec![Rule::new(Trigger::Immediately, Sizing::CapitalFraction { fraction: 2.0 })])
                .described("leveraged");
        audit_case(cases, "violator-leveraged", &borrowing_free_check(&leveraged, path)?, false);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn saw() -> PricePath {
        PricePath::uniform(vec![1.0, 0.5, 1.5, 0.5, 1.5, 0.9], 1.0).unwrap()
    }

    #[test]
    fn every_kind_passes_on_fixture() {
        let grid = ParameterGrid {
            p: vec![1.0, 2.0, 3.0],
            epsilon: vec![1.0],
            delta: vec![0.5],
            n: vec![2, 5],
            mesh: vec![0.5, 0.1],
            functionals: vec![VariationFunctional::power(3.0), VariationFunctional::DampedSquare],
            intervals: vec![(0.5, 1.5), (0.0, 1.0)],
            level: None,
            j_max: None,
        };
        for kind in [
            ExperimentKind::OracleSuite,
            ExperimentKind::DoobSuite,
            ExperimentKind::Prop1Check,
            ExperimentKind::Prop3Check,
            ExperimentKind::UpperProbTable,
            ExperimentKind::GrowthProfile,
            ExperimentKind::BorrowAudit,
        ] {
            let cases = evaluate_path(kind, &grid, &saw(), 0, 1).unwrap();
            assert!(!cases.is_empty(), "{kind:?}");
            for c in &cases {
                assert!(c.pass, "{kind:?} {c:?}");
            }
        }
    }

    #[test]
    fn audit_flags_violators() {
        let cases = evaluate_path(ExperimentKind::BorrowAudit, &ParameterGrid::default(), &saw(), 0, 0).unwrap();
        let short = cases.iter().find(|c| c.key.ends_with("violator-short")).unwrap();
        assert_eq!(short.metrics["ok"], 0.0);
        assert!(short.metrics["continuation_capital"] < 0.0);
    }
}
