use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use log::info;

use roughmarket::experiment::{
    emit_plot_data, load_json, run_command, run_experiment, Command, ExperimentConfig, ExperimentError, Format,
    RunReport,
};

#[derive(Parser)]
#[command(name = "roughmarket", version, about = "Variation, crossing and trading-strategy experiments on price paths")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Directory for output files; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Sub {
    /// var_p / var_φ of a path (CSV `p,value`).
    Variation(Common),
    /// Per-interval crossing counts on a grid (CSV `k,up,down`).
    Crossings(Common),
    /// Mesh-restricted Taylor variation (CSV `delta,value`).
    Qvar(Common),
    /// Doob's upcrossing strategy on one path.
    Doob(Common),
    /// Level-mixture capital against the variation bound.
    Prop3(Common),
    /// Upper probability of a single path.
    UpperProb(Common),
    /// Borrowing-free audit of one strategy.
    BorrowCheck(Common),
    /// Unboundedness mixture on one path.
    Unbounded(Common),
    /// Experiment suite over generators and seeds.
    Run(Common),
    /// CSV series from a saved suite report.
    Plot {
        #[command(flatten)]
        common: Common,
        /// Metric name, or `all`.
        #[arg(long, default_value = "all")]
        series: String,
    },
}

fn write_out(out: Option<&Path>, name: &str, body: &str) -> Result<(), ExperimentError> {
    match out {
        None => {
            print!("{body}");
            Ok(())
        }
        Some(dir) => {
            let io = |source| ExperimentError::Io { path: dir.to_path_buf(), source };
            std::fs::create_dir_all(dir).map_err(io)?;
            let file = dir.join(name);
            std::fs::write(&file, body).map_err(|source| ExperimentError::Io { path: file.clone(), source })?;
            info!("wrote {}", file.display());
            Ok(())
        }
    }
}

fn single(command: Command, common: &Common) -> Result<bool, ExperimentError> {
    let output = run_command(command, &common.config)?;
    let ext = match output.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    write_out(common.out.as_deref(), &format!("{}.{ext}", command.name()), &output.body)?;
    Ok(output.pass)
}

fn suite(common: &Common) -> Result<bool, ExperimentError> {
    let config: ExperimentConfig = load_json(&common.config)?;
    let started = Instant::now();
    let report = run_experiment(&config, common.jobs)?;
    info!("{} cases ({} failed) in {:.2?}", report.summary.cases, report.summary.failed, started.elapsed());
    let out = common.out.clone().or_else(|| config.output.clone());
    write_out(out.as_deref(), "report.json", &(serde_json::to_string_pretty(&report)? + "\n"))?;
    if let Some(dir) = out {
        write_out(Some(&dir), "cases.csv", &emit_plot_data(&report, "all")?)?;
    }
    for c in report.cases.iter().filter(|c| !c.pass) {
        log::warn!("failed: {}", c.key);
    }
    Ok(report.all_passed())
}

fn plot(common: &Common, series: &str) -> Result<bool, ExperimentError> {
    let report: RunReport = load_json(&common.config)?;
    let name = format!("{}.csv", series.replace(['/', '\\'], "_"));
    write_out(common.out.as_deref(), &name, &emit_plot_data(&report, series)?)?;
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Sub::Variation(c) => single(Command::Variation, c),
        Sub::Crossings(c) => single(Command::Crossings, c),
        Sub::Qvar(c) => single(Command::Qvar, c),
        Sub::Doob(c) => single(Command::Doob, c),
        Sub::Prop3(c) => single(Command::Prop3, c),
        Sub::UpperProb(c) => single(Command::UpperProb, c),
        Sub::BorrowCheck(c) => single(Command::BorrowCheck, c),
        Sub::Unbounded(c) => single(Command::Unbounded, c),
        Sub::Run(c) => suite(c),
        Sub::Plot { common, series } => plot(common, series),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
