//! Single-path commands behind the CLI subcommands.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::input::{load_json, PathInput, StrategySpec};
use super::{ExperimentError, Result};
use crate::numeric::close;
use crate::paths::PricePath;
use crate::strategies::{
    borrowing_free_check, clairvoyant_strategy, doob_strategy, prop3_case, run_mixture, run_simple,
    unboundedness_mixture, upper_prob_forms, FORM_TOLERANCE,
};
use crate::variation::{crossings, qvar_profile, var_phi, VariationFunctional};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Variation,
    Crossings,
    Qvar,
    Doob,
    Prop3,
    UpperProb,
    BorrowCheck,
    Unbounded,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Variation => "variation",
            Self::Crossings => "crossings",
            Self::Qvar => "qvar",
            Self::Doob => "doob",
            Self::Prop3 => "prop3",
            Self::UpperProb => "upper-prob",
            Self::BorrowCheck => "borrow-check",
            Self::Unbounded => "unbounded",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub format: Format,
    pub body: String,
    pub pass: bool,
}

/// Report of a single-path command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleRunReport {
    pub command: String,
    pub inputs: Value,
    pub seed: Option<u64>,
    pub initial_capital: f64,
    pub terminal_capital: f64,
    pub rhs: Option<f64>,
    pub margin: Option<f64>,
    pub pass: bool,
    #[serde(default)]
    pub details: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VariationConfig {
    path: PathInput,
    #[serde(default)]
    p: Vec<f64>,
    #[serde(default)]
    functionals: Vec<VariationFunctional>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CrossingsConfig {
    path: PathInput,
    step: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QvarConfig {
    path: PathInput,
    deltas: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DoobConfig {
    path: PathInput,
    a: f64,
    b: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Prop3Config {
    path: PathInput,
    epsilon: f64,
    delta: f64,
    n: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PathOnlyConfig {
    path: PathInput,
}

#[derive(Deserialize)]
struct BorrowConfig {
    path: PathInput,
    strategy: StrategySpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UnboundedConfig {
    path: PathInput,
    m_max: u32,
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let err = |e: csv::Error| ExperimentError::Config(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(&r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| ExperimentError::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn json_output(report: &SingleRunReport) -> Result<CommandOutput> {
    Ok(CommandOutput { format: Format::Json, body: serde_json::to_string_pretty(report)? + "\n", pass: report.pass })
}

fn load_path(input: &PathInput, base: &Path) -> Result<(PricePath, Option<u64>)> {
    Ok((input.load(base)?, input.seed()))
}

/// Runs `command` with the JSON config in `config_file`.
pub fn run_command(command: Command, config_file: &Path) -> Result<CommandOutput> {
    let raw: Value = load_json(config_file)?;
    let base = config_file.parent().unwrap_or(Path::new("."));
    let inputs = raw.clone();
    let config_err = |e: serde_json::Error| ExperimentError::Config(format!("{}: {e}", config_file.display()));
    let report = |seed, initial: f64, terminal: f64, rhs: Option<f64>, pass: bool, details: Value| SingleRunReport {
        command: command.name().to_string(),
        inputs: inputs.clone(),
        seed,
        initial_capital: initial,
        terminal_capital: terminal,
        rhs,
        margin: rhs.map(|r| terminal - r),
        pass,
        details,
    };

    match command {
        Command::Variation => {
            let c: VariationConfig = serde_json::from_value(raw).map_err(config_err)?;
            let (path, _) = load_path(&c.path, base)?;
            if c.p.is_empty() && c.functionals.is_empty() {
                return Err(ExperimentError::Config("variation needs p or functionals".into()));
            }
            let mut rows = Vec::new();
            for &p in &c.p {
                rows.push(vec![p.to_string(), var_phi(&path, &VariationFunctional::power(p))?.to_string()]);
            }
            for phi in &c.functionals {
                let label = match phi {
                    VariationFunctional::Power { p } => p.to_string(),
                    other => other.label(),
                };
                rows.push(vec![label, var_phi(&path, phi)?.to_string()]);
            }
            Ok(CommandOutput { format: Format::Csv, body: csv_text(&["p", "value"], rows)?, pass: true })
        }
        Command::Crossings => {
            let c: CrossingsConfig = serde_json::from_value(raw).map_err(config_err)?;
            let (path, _) = load_path(&c.path, base)?;
            if !(c.step > 0.0 && c.step.is_finite()) {
                return Err(ExperimentError::Config(format!("step {} must be positive", c.step)));
            }
            let top = (path.sup() / c.step).floor() as i64;
            let mut rows = Vec::new();
            for k in 0..=top {
                let a = k as f64 * c.step;
                let count = crossings(path.values(), a, a + c.step)?;
                rows.push(vec![k.to_string(), count.up.to_string(), count.down.to_string()]);
            }
            Ok(CommandOutput { format: Format::Csv, body: csv_text(&["k", "up", "down"], rows)?, pass: true })
        }
        Command::Qvar => {
            let c: QvarConfig = serde_json::from_value(raw).map_err(config_err)?;
            let (path, _) = load_path(&c.path, base)?;
            let rows =
                qvar_profile(&path, &c.deltas)?.into_iter().map(|q| vec![q.delta.to_string(), q.value.to_string()]);
            Ok(CommandOutput { format: Format::Csv, body: csv_text(&["delta", "value"], rows)?, pass: true })
        }
        Command::Doob => {
            let c: DoobConfig = serde_json::from_value(raw).map_err(config_err)?;
            let (path, seed) = load_path(&c.path, base)?;
            let trace = run_simple(&doob_strategy(c.a, c.b)?, &path)?;
            let up = crossings(path.values(), c.a, c.b)?.up;
            let rhs = (c.b - c.a) * up as f64;
            let pass = trace.min_capital() >= 0.0 && trace.terminal() >= rhs - 1e-12 * trace.terminal().abs().max(1.0);
            let details =
                json!({"upcrossings": up, "min_capital": trace.min_capital(), "firings": trace.firings.len()});
            json_output(&report(seed, trace.initial_capital, trace.terminal(), Some(rhs), pass, details))
        }
        Command::Prop3 => {
            let c: Prop3Config = serde_json::from_value(raw).map_err(config_err)?;
            let (path, seed) = load_path(&c.path, base)?;
            let r = prop3_case(&path, c.epsilon, c.delta, c.n)?;
            let details = json!({"variation": r.variation, "sup": r.sup, "levels": r.levels});
            json_output(&report(seed, r.initial_capital, r.terminal_capital, Some(r.rhs), r.pass, details))
        }
        Command::UpperProb => {
            let c: PathOnlyConfig = serde_json::from_value(raw).map_err(config_err)?;
            let (path, seed) = load_path(&c.path, base)?;
            let (total, positive) = upper_prob_forms(&path)?;
            let (strategy, factor) = clairvoyant_strategy(&path)?;
            let trace = run_simple(&strategy, &path)?;
            let pass = close(total, positive, FORM_TOLERANCE) && (trace.terminal() - factor).abs() <= 1e-9 * factor;
            let details =
                json!({"upper_prob": total, "upper_prob_positive_form": positive, "clairvoyant_factor": factor});
            json_output(&report(seed, trace.initial_capital, trace.terminal(), None, pass, details))
        }
        Command::BorrowCheck => {
            let c: BorrowConfig = serde_json::from_value(raw).map_err(config_err)?;
            let (path, seed) = load_path(&c.path, base)?;
            let strategy = c.strategy.build(&path)?;
            let trace = run_simple(&strategy, &path)?;
            let r = borrowing_free_check(&strategy, &path)?;
            let details = serde_json::to_value(&r)?;
            json_output(&report(seed, trace.initial_capital, trace.terminal(), None, r.ok, details))
        }
        Command::Unbounded => {
            let c: UnboundedConfig = serde_json::from_value(raw).map_err(config_err)?;
            let (path, seed) = load_path(&c.path, base)?;
            let m = unboundedness_mixture(c.m_max)?;
            let trace = run_mixture(&m, &path)?;
            let details = json!({"sup": path.sup(), "components": m.components.len()});
            json_output(&report(seed, m.initial_capital(), trace.terminal(), None, trace.min_capital() >= 0.0, details))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn with_config(json: &str, command: Command) -> Result<CommandOutput> {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(json.as_bytes()).unwrap();
        run_command(command, f.path())
    }

    #[test]
    fn variation_csv() {
        let out = with_config(r#"{"path":{"values":[1,2,1]},"p":[1,2]}"#, Command::Variation).unwrap();
        assert_eq!(out.body, "p,value\n1,2\n2,2\n");
    }

    #[test]
    fn crossings_csv() {
        let out = with_config(r#"{"path":{"values":[1,0.5,1.5,0.5,1.5]},"step":0.5}"#, Command::Crossings).unwrap();
        assert_eq!(out.body, "k,up,down\n0,0,0\n1,2,2\n2,2,1\n3,0,0\n");
    }

    #[test]
    fn doob_report() {
        let out = with_config(r#"{"path":{"values":[1,0.5,1.5,0.5,1.5]},"a":0.5,"b":1.5}"#, Command::Doob).unwrap();
        let r: SingleRunReport = serde_json::from_str(&out.body).unwrap();
        assert_eq!(r.terminal_capital, 2.5);
        assert_eq!(r.rhs, Some(2.0));
        assert!(r.pass);
    }

    #[test]
    fn borrow_failure_reported() {
        let out = with_config(
            r#"{"path":{"values":[1,1,1]},"strategy":{"strategy":"custom","initial_capital":1,"rules":[{"trigger":{"when":"immediately"},"sizing":{"size":"units","units":-1}}]}}"#,
            Command::BorrowCheck,
        )
        .unwrap();
        assert!(!out.pass);
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(matches!(
            with_config(r#"{"path":{"values":[1,2]},"a":0,"b":1,"c":2}"#, Command::Doob),
            Err(ExperimentError::Config(_))
        ));
    }
}
