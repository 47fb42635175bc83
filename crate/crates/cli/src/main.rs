use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use vibroprobe_core::io::{
    chart_from_csv, emit_chart, format_drift, format_extension, format_report_metrics, format_report_runs,
    format_report_stats, format_timeline, load_scenario, replay_estimate, report_series, write_csv, write_log,
    write_timeline, ChartSeries,
};
use vibroprobe_core::scenario::{run_bracing, run_exp1, run_motion_extension, run_probe, run_staircase, run_sweep};
use vibroprobe_core::{
    ExperimentReport, GroupName, IoError, LogHeader, PlantError, ScenarioConfig, ScenarioError, SensorLog, SweepDimension,
};

#[derive(Parser)]
#[command(name = "vibroprobe", version, about = "Vibration-based contact stability probing on a simulated tendon-driven robot")]
struct Cli {
    /// Run a single seed instead of the scenario's seed list
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress progress and summary lines
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the elbow staircase against every environment and record sensor logs and timelines
    Simulate {
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Replay a sensor log through the estimator
    Estimate {
        log: PathBuf,
        /// scenario file whose estimator settings are used
        #[arg(long)]
        config: Option<PathBuf>,
        /// timeline CSV path; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lean onto the first offered environment and report the stability ratio
    Probe { scenario: PathBuf },
    /// Run one of the scripted experiments and write its tables and charts
    Experiment {
        name: ExperimentName,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Render a timeline or stats CSV as SVG
    Chart {
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentName {
    /// environments
    Exp1,
    /// amplitude sweep
    Exp2,
    /// frequency sweep
    Exp3,
    /// grouping sweep
    Exp4,
    /// global posture hysteresis
    Exp5,
    Extension,
    Bracing,
}

impl ExperimentName {
    fn file_stem(self) -> &'static str {
        match self {
            ExperimentName::Exp1 => "exp1",
            ExperimentName::Exp2 => "exp2",
            ExperimentName::Exp3 => "exp3",
            ExperimentName::Exp4 => "exp4",
            ExperimentName::Exp5 => "exp5",
            ExperimentName::Extension => "extension",
            ExperimentName::Bracing => "bracing",
        }
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

/// Failures while loading or validating inputs are config errors.
fn config_err(e: IoError) -> CliError {
    match e {
        IoError::Io { .. } | IoError::Parse { .. } | IoError::Schema(_) | IoError::RateMismatch { .. } => CliError::Config(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    }
}

fn runtime_io(e: IoError) -> CliError {
    match e {
        IoError::RateMismatch { .. } => CliError::Config(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    }
}

fn scenario_err(e: ScenarioError) -> CliError {
    match e {
        ScenarioError::BadConfig(_) | ScenarioError::UnknownDimension(_) | ScenarioError::MissingEnvironment(_) => {
            CliError::Config(e.to_string())
        }
        ScenarioError::Rig(vibroprobe_core::RigError::Plant(PlantError::BadConfig(_))) => CliError::Config(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    }
}

struct Ctx {
    seed: Option<u64>,
    quiet: bool,
}

impl Ctx {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }

    fn warn(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("warning: {}", msg.as_ref());
        }
    }

    /// Scenario with the seed override applied.
    fn scenario(&self, path: Option<&Path>) -> Result<ScenarioConfig, CliError> {
        let mut cfg = match path {
            Some(p) => load_scenario(p).map_err(config_err)?,
            None => ScenarioConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seeds = vec![seed];
            cfg.repeats = 1;
        }
        cfg.validate().map_err(scenario_err)?;
        Ok(cfg)
    }
}

fn simulate(ctx: &Ctx, scenario: &Path, out: &Path) -> Result<(), CliError> {
    let cfg = ctx.scenario(Some(scenario))?;
    let seed = cfg.seeds[0];
    let groups = GroupName::BUILTIN.iter().map(|g| cfg.plant.group(g)).collect::<Vec<_>>();
    for env in cfg.placed_environments() {
        let label = vibroprobe_core::scenario::environment_label(&env);
        let run = run_staircase(&cfg, &env, seed, &label, true).map_err(scenario_err)?;
        let log = SensorLog {
            header: LogHeader { muscle_count: cfg.plant.muscle_count(), sample_rate: cfg.estimator.sample_rate, groups: groups.clone() },
            frames: run.frames.unwrap_or_default(),
        };
        let stem = label.to_lowercase();
        let log_path = out.join(format!("{stem}_log.csv"));
        let timeline_path = out.join(format!("{stem}_timeline.csv"));
        write_log(&log_path, &log).map_err(runtime_io)?;
        write_timeline(&timeline_path, &run.record.timeline).map_err(runtime_io)?;
        let stops: Vec<String> = run.record.stops.iter().map(|s| format!("{:.3}", s.value)).collect();
        ctx.say(format!("{label}: seed {seed}, E^ave at holds [{}] -> {}", stops.join(", "), log_path.display()));
    }
    Ok(())
}

fn estimate(ctx: &Ctx, log: &Path, config: Option<&Path>, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = ctx.scenario(config)?;
    let replay = replay_estimate(log, &cfg.estimator).map_err(|e| match e {
        IoError::Io { .. } => CliError::Runtime(e.to_string()),
        other => runtime_io(other),
    })?;
    for w in &replay.warnings {
        ctx.warn(w);
    }
    match out {
        Some(path) => {
            write_timeline(path, &replay.timeline).map_err(runtime_io)?;
            ctx.say(format!("{} timeline rows -> {}", replay.timeline.len(), path.display()));
        }
        None => print!("{}", format_timeline(&replay.timeline)),
    }
    Ok(())
}

fn probe(ctx: &Ctx, scenario: &Path) -> Result<(), CliError> {
    let cfg = ctx.scenario(Some(scenario))?;
    let seed = cfg.seeds[0];
    let r = run_probe(&cfg, seed).map_err(scenario_err)?;
    ctx.say(format!(
        "seed {seed}: E1 {:.4}, E2 {:.4}, S {:.4}, threshold {}, verdict {:?}",
        r.e1.value, r.e2.value, r.s, r.threshold, r.verdict
    ));
    Ok(())
}

fn combined_series(reports: &[ExperimentReport]) -> Vec<ChartSeries> {
    let single = reports.len() == 1;
    reports
        .iter()
        .flat_map(|r| {
            report_series(r).into_iter().map(move |mut s| {
                if !single {
                    s.label = format!("{} {}", r.name, s.label);
                }
                s
            })
        })
        .collect()
}

fn write_reports(ctx: &Ctx, dir: &Path, stem: &str, reports: &[ExperimentReport]) -> Result<(), CliError> {
    write_csv(&dir.join(format!("{stem}_stats.csv")), &format_report_stats(reports)).map_err(runtime_io)?;
    write_csv(&dir.join(format!("{stem}_runs.csv")), &format_report_runs(reports)).map_err(runtime_io)?;
    if reports.iter().any(|r| !r.metrics.is_empty()) {
        write_csv(&dir.join(format!("{stem}_metrics.csv")), &format_report_metrics(reports)).map_err(runtime_io)?;
    }
    emit_chart(&combined_series(reports), stem, &dir.join(format!("{stem}.svg"))).map_err(runtime_io)?;
    for r in reports {
        for s in &r.stats {
            let means: Vec<String> = s.mean.iter().map(|v| format!("{v:.3}")).collect();
            ctx.say(format!("{} {}: [{}]", r.name, s.label, means.join(", ")));
        }
        for m in &r.metrics {
            ctx.say(format!("{} {} seed {}: {} {:.4}", r.name, m.label, m.seed, m.name, m.value));
        }
    }
    Ok(())
}

fn experiment(ctx: &Ctx, name: ExperimentName, out: Option<&Path>, config: Option<&Path>) -> Result<(), CliError> {
    let cfg = ctx.scenario(config)?;
    let dir = out.map(Path::to_path_buf).or_else(|| cfg.outputs.dir.clone()).unwrap_or_else(|| PathBuf::from("results"));
    let stem = name.file_stem();
    let sweep = |dim: SweepDimension| run_sweep(&cfg, dim).map_err(scenario_err);
    match name {
        ExperimentName::Exp1 => write_reports(ctx, &dir, stem, &[run_exp1(&cfg).map_err(scenario_err)?])?,
        ExperimentName::Exp2 => write_reports(ctx, &dir, stem, &sweep(SweepDimension::Amplitude)?)?,
        ExperimentName::Exp3 => write_reports(ctx, &dir, stem, &sweep(SweepDimension::Frequency)?)?,
        ExperimentName::Exp4 => write_reports(ctx, &dir, stem, &sweep(SweepDimension::Grouping)?)?,
        ExperimentName::Exp5 => write_reports(ctx, &dir, stem, &sweep(SweepDimension::Posture)?)?,
        ExperimentName::Extension => {
            let traces = run_motion_extension(&cfg).map_err(scenario_err)?;
            write_csv(&dir.join("extension.csv"), &format_extension(&traces)).map_err(runtime_io)?;
            for t in &traces {
                let s: Vec<String> = t.attempts.iter().map(|a| format!("{} S={:.3} {:?}", a.environment, a.report.s, a.report.verdict)).collect();
                ctx.say(format!("seed {}: {} -> {} on {}", t.seed, s.join(", "), t.decision, t.attempts[t.chosen].environment));
            }
        }
        ExperimentName::Bracing => {
            let report = run_bracing(&cfg).map_err(scenario_err)?;
            write_csv(&dir.join("bracing.csv"), &format_drift(&report)).map_err(runtime_io)?;
            for &seed in &cfg.seeds {
                if let Some((free, braced)) = report.pair(seed) {
                    ctx.say(format!("seed {seed}: final drift {:.2} mm unbraced, {:.2} mm braced", free.final_drift, braced.final_drift));
                }
            }
        }
    }
    ctx.say(format!("wrote {}", dir.display()));
    Ok(())
}

fn chart(ctx: &Ctx, csv: &Path, out: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(csv).map_err(|e| CliError::Runtime(format!("{}: {e}", csv.display())))?;
    let series = chart_from_csv(&text).map_err(runtime_io)?;
    let title = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("chart");
    emit_chart(&series, title, out).map_err(runtime_io)?;
    ctx.say(format!("{} series -> {}", series.len(), out.display()));
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = Ctx { seed: cli.seed, quiet: cli.quiet };
    match &cli.command {
        Command::Simulate { scenario, out } => simulate(&ctx, scenario, out),
        Command::Estimate { log, config, out } => estimate(&ctx, log, config.as_deref(), out.as_deref()),
        Command::Probe { scenario } => probe(&ctx, scenario),
        Command::Experiment { name, out, config } => experiment(&ctx, *name, out.as_deref(), config.as_deref()),
        Command::Chart { csv, out } => chart(&ctx, csv, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            eprintln!("{line}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
