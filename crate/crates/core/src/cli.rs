//! Command-line front end: argument parsing, configuration merging and the
//! subcommands behind the `noisegate` binary.
//!
//! Precedence for every setting is command-line flag, then TOML config file,
//! then the `NOISEGATE_SEED` environment variable (seed only), then the
//! built-in default.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::complexity::{quanta_profile, ComplexityReport};
use crate::dataio::{bin_into_quanta, load_csv, save_csv, Dataset};
use crate::discretize::{
    discretize_with, estimate_noisy_area, extremes, noisy_area_at, ThresholdMethod,
};
use crate::error::{Error, Result};
use crate::learners::{tune, ClassifierKind};
use crate::pipeline::experiments::{noisy_to_extremes_experiment, oversample_experiment, OversampleConfig};
use crate::pipeline::report::{write_perf_curves, write_profile, write_ranks, ExperimentsReport, RunStatus};
use crate::pipeline::synthetic::{generate_synthetic, TARGET_COLUMN};
use crate::pipeline::{run_analysis, validate_report, AnalysisSettings};
use crate::preprocess::reduce;

pub const SEED_ENV: &str = "NOISEGATE_SEED";
pub const DEFAULT_OUT: &str = "noisegate-out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "noisegate", version, about = "Measure the impact of discretization noise on classifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full incremental analysis and write report.json plus CSVs.
    Analyze(RunArgs),
    /// Print cutpoint, limit and noisy share for every threshold method.
    Discretize(RunArgs),
    /// Write per-quantum complexity measures.
    Complexity {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        n_bins: Option<usize>,
    },
    /// Run the noisy-area experiments.
    Experiment {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = ExperimentKind::All)]
        kind: ExperimentKind,
        /// Comma-separated oversampling percentages.
        #[arg(long, value_delimiter = ',')]
        over_sample: Option<Vec<u32>>,
    },
    /// Write a synthetic dataset with a planted noisy band.
    Generate(GenerateArgs),
    /// Check a report.json against schema 1.
    ValidateReport { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentKind {
    Oversample,
    NoisyToExtremes,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Median,
    Ckmeans,
    Cart,
}

impl From<MethodArg> for ThresholdMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Median => ThresholdMethod::Median,
            MethodArg::Ckmeans => ThresholdMethod::Ckmeans,
            MethodArg::Cart => ThresholdMethod::CartStump,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassifierArg {
    Rf,
    Lr,
    Cart,
    Knn,
}

impl From<ClassifierArg> for ClassifierKind {
    fn from(c: ClassifierArg) -> Self {
        match c {
            ClassifierArg::Rf => ClassifierKind::RandomForest,
            ClassifierArg::Lr => ClassifierKind::LogisticRegression,
            ClassifierArg::Cart => ClassifierKind::Cart,
            ClassifierArg::Knn => ClassifierKind::Knn,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long, value_enum)]
    pub threshold_method: Option<MethodArg>,
    /// Expert cutpoint; skips threshold estimation.
    #[arg(long, allow_negative_numbers = true)]
    pub cutpoint: Option<f64>,
    /// Window increment in percent of the cutpoint.
    #[arg(long)]
    pub step_size: Option<f64>,
    /// Fraction of rows at each end treated as extremes.
    #[arg(long)]
    pub extremes: Option<f64>,
    #[arg(long, value_enum)]
    pub classifier: Option<ClassifierArg>,
    #[arg(long)]
    pub bootstraps: Option<usize>,
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Resampling repetitions for the rank-shift likelihood.
    #[arg(long)]
    pub rank_reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Spearman |ρ| at which features count as correlated.
    #[arg(long)]
    pub rho: Option<f64>,
    /// OLS R² at which a feature counts as redundant.
    #[arg(long)]
    pub r2: Option<f64>,
    /// Tune on the whole dataset only and reuse those parameters at every x.
    #[arg(long)]
    pub reuse_x0_params: bool,
    /// Test absolute instead of signed rank differences.
    #[arg(long)]
    pub absolute_rank_diff: bool,
    /// Also run the noisy-area experiments during `analyze`.
    #[arg(long)]
    pub with_experiments: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub p: usize,
    /// Half-width of the planted noisy band in percent of the median.
    #[arg(long, default_value_t = 10.0)]
    pub noise_band: f64,
    #[arg(long, default_value_t = 1.0)]
    pub signal: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: PathBuf,
}

/// Settings readable from a TOML config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub target: Option<String>,
    pub threshold_method: Option<ThresholdMethod>,
    pub cutpoint: Option<f64>,
    pub step_size: Option<f64>,
    pub extremes: Option<f64>,
    pub classifier: Option<ClassifierKind>,
    pub bootstraps: Option<usize>,
    pub top_k: Option<usize>,
    pub rank_reps: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub rho: Option<f64>,
    pub r2: Option<f64>,
    pub reuse_x0_params: Option<bool>,
    pub absolute_rank_diff: Option<bool>,
    pub experiments: Option<bool>,
    pub over_sample: Option<Vec<u32>>,
    pub n_bins: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved configuration of a run; echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: PathBuf,
    pub target: String,
    pub out: PathBuf,
    pub n_bins: usize,
    pub settings: AnalysisSettings,
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{SEED_ENV} must be an unsigned integer, got `{s}`"))),
        Err(_) => Ok(None),
    }
}

impl RunConfig {
    pub fn resolve(args: &RunArgs, n_bins: Option<usize>, over_sample: Option<Vec<u32>>) -> Result<Self> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let d = AnalysisSettings::default();
        let input = args
            .input
            .clone()
            .or(file.input)
            .ok_or_else(|| Error::Config("--input is required".into()))?;
        let target = args
            .target
            .clone()
            .or(file.target)
            .ok_or_else(|| Error::Config("--target is required".into()))?;
        let seed = match args.seed.or(file.seed) {
            Some(s) => s,
            None => env_seed()?.unwrap_or(d.seed),
        };
        let settings = AnalysisSettings {
            threshold_method: args.threshold_method.map(Into::into).or(file.threshold_method).unwrap_or(d.threshold_method),
            cutpoint: args.cutpoint.or(file.cutpoint),
            step_size_pct: args.step_size.or(file.step_size).unwrap_or(d.step_size_pct),
            extremes_fraction: args.extremes.or(file.extremes).unwrap_or(d.extremes_fraction),
            classifier: args.classifier.map(Into::into).or(file.classifier).unwrap_or(d.classifier),
            n_boot: args.bootstraps.or(file.bootstraps).unwrap_or(d.n_boot),
            top_k: args.top_k.or(file.top_k).unwrap_or(d.top_k),
            n_rep: args.rank_reps.or(file.rank_reps).unwrap_or(d.n_rep),
            seed,
            rho_threshold: args.rho.or(file.rho).unwrap_or(d.rho_threshold),
            r2_threshold: args.r2.or(file.r2).unwrap_or(d.r2_threshold),
            reuse_x0_params: args.reuse_x0_params || file.reuse_x0_params.unwrap_or(d.reuse_x0_params),
            absolute_rank_diff: args.absolute_rank_diff || file.absolute_rank_diff.unwrap_or(d.absolute_rank_diff),
            experiments: args.with_experiments || file.experiments.unwrap_or(d.experiments),
            oversample: OversampleConfig {
                over_sample_pcts: over_sample.or(file.over_sample).unwrap_or(d.oversample.over_sample_pcts),
            },
            grid: d.grid,
        };
        let cfg = RunConfig {
            input,
            target,
            out: args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            n_bins: n_bins.or(file.n_bins).unwrap_or(5),
            settings,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.settings;
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(s.step_size_pct > 0.0 && s.step_size_pct <= 100.0) {
            return bad("--step-size must lie in (0, 100]");
        }
        if !(s.extremes_fraction > 0.0 && s.extremes_fraction < 0.5) {
            return bad("--extremes must lie in (0, 0.5)");
        }
        if s.n_boot == 0 || s.top_k == 0 || s.n_rep == 0 {
            return bad("--bootstraps, --top-k and --rank-reps must be positive");
        }
        if !(s.rho_threshold > 0.0 && s.rho_threshold <= 1.0) || !(s.r2_threshold > 0.0 && s.r2_threshold <= 1.0) {
            return bad("--rho and --r2 must lie in (0, 1]");
        }
        if s.cutpoint.is_some_and(|c| !c.is_finite()) {
            return bad("--cutpoint must be finite");
        }
        if self.n_bins < 2 {
            return bad("--n-bins must be at least 2");
        }
        Ok(())
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_DATA,
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(io_err(path))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Analyze(args) => cmd_analyze(&RunConfig::resolve(&args, None, None)?, stdout),
        Command::Discretize(args) => cmd_discretize(&RunConfig::resolve(&args, None, None)?, stdout),
        Command::Complexity { run, n_bins } => cmd_complexity(&RunConfig::resolve(&run, n_bins, None)?, stdout),
        Command::Experiment { run, kind, over_sample } => {
            cmd_experiment(&RunConfig::resolve(&run, None, over_sample)?, kind, stdout)
        }
        Command::Generate(args) => cmd_generate(&args, stdout),
        Command::ValidateReport { path } => cmd_validate(&path, stdout),
    }
}

fn load(cfg: &RunConfig) -> Result<Dataset> {
    load_csv(&cfg.input, &cfg.target)
}

fn out_line(stdout: &mut dyn Write, text: &str) -> Result<()> {
    stdout.write_all(text.as_bytes()).map_err(io_err(Path::new("<stdout>")))
}

pub fn cmd_analyze(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    let data = load(cfg)?;
    let echo = serde_json::to_value(cfg)?;
    let outcome = run_analysis(&data, &cfg.target, &cfg.settings, echo)?;
    ensure_dir(&cfg.out)?;
    write_text(&cfg.out.join("report.json"), &outcome.report.to_json()?)?;
    write_perf_curves(&outcome.points, create(&cfg.out.join("perf_curves.csv"))?)?;
    write_ranks(&outcome.points, &outcome.feature_names, create(&cfg.out.join("ranks.csv"))?)?;
    write_profile(&outcome.noisy.profile, create(&cfg.out.join("noisy_profile.csv"))?)?;
    out_line(stdout, &outcome.report.summary())?;
    Ok(match outcome.report.status {
        RunStatus::Complete => EXIT_OK,
        RunStatus::NoNoisyArea | RunStatus::NoFeasibleStep => {
            eprintln!("analysis infeasible: {:?}; report written without impact tables", outcome.report.status);
            EXIT_INFEASIBLE
        }
    })
}

pub fn cmd_discretize(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    let data = load(cfg)?;
    let s = &cfg.settings;
    let mut rows: Vec<(String, Result<f64>)> = ThresholdMethod::ALL
        .iter()
        .map(|m| (m.short_name().to_string(), m.threshold(data.target())))
        .collect();
    if let Some(c) = s.cutpoint {
        rows.push(("expert".to_string(), Ok(c)));
    }
    let mut table = String::from("method,threshold,limit,noisy_pct,n_class1,n_class2\n");
    for (name, cut) in rows {
        let c = cut?;
        let spec = discretize_with(&data, c, None)?;
        let noisy = estimate_noisy_area(&data, c, s.step_size_pct, s.seed)?;
        let (c1, c2) = spec.counts();
        let limit = noisy.limit_pct().map(|l| l.to_string()).unwrap_or_else(|| "none".into());
        let pct = noisy
            .area
            .as_ref()
            .map(|a| format!("{:.2}", 100.0 * a.noisy_fraction))
            .unwrap_or_else(|| "none".into());
        table.push_str(&format!("{name},{c},{limit},{pct},{c1},{c2}\n"));
    }
    out_line(stdout, &table)?;
    if cfg.out.as_os_str() != DEFAULT_OUT || cfg.out.exists() {
        ensure_dir(&cfg.out)?;
        write_text(&cfg.out.join("discretization.csv"), &table)?;
    }
    Ok(EXIT_OK)
}

fn cutpoint_for(cfg: &RunConfig, data: &Dataset) -> Result<(f64, Option<ThresholdMethod>)> {
    match cfg.settings.cutpoint {
        Some(c) => Ok((c, None)),
        None => Ok((cfg.settings.threshold_method.threshold(data.target())?, Some(cfg.settings.threshold_method))),
    }
}

pub fn cmd_complexity(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<i32> {
    let data = load(cfg)?;
    let (c, method) = cutpoint_for(cfg, &data)?;
    let spec = discretize_with(&data, c, method)?;
    let quanta = bin_into_quanta(&data, &spec.labels, cfg.n_bins)?;
    let profile = quanta_profile(data.features(), &spec.labels, &quanta, cfg.settings.seed)?;
    let mut table = String::from("bin,measure,value,n_class1,n_class2,flags\n");
    for q in &profile {
        for (name, v) in ComplexityReport::MEASURES.iter().zip(q.report.values()) {
            table.push_str(&format!(
                "{},{},{},{},{},{}\n",
                q.bin,
                name,
                v,
                q.n_class1,
                q.n_class2,
                q.report.flags.join(";")
            ));
        }
    }
    ensure_dir(&cfg.out)?;
    write_text(&cfg.out.join("complexity.csv"), &table)?;
    out_line(stdout, &table)?;
    Ok(EXIT_OK)
}

pub fn cmd_experiment(cfg: &RunConfig, kind: ExperimentKind, stdout: &mut dyn Write) -> Result<i32> {
    let data = load(cfg)?;
    let s = &cfg.settings;
    let (reduced, _) = reduce(&data, s.rho_threshold, s.r2_threshold)?;
    let (c, method) = cutpoint_for(cfg, &reduced)?;
    let spec = discretize_with(&reduced, c, method)?;
    let noisy = estimate_noisy_area(&reduced, c, s.step_size_pct, s.seed)?;
    let Some(limit) = noisy.limit_pct() else {
        eprintln!("no noisy area found; experiments need one");
        return Ok(EXIT_INFEASIBLE);
    };
    let area = noisy_area_at(reduced.target(), c, limit);
    let ext = extremes(reduced.target(), s.extremes_fraction)?;
    let mut report = ExperimentsReport::default();
    let mut text = String::new();
    if matches!(kind, ExperimentKind::Oversample | ExperimentKind::All) {
        let rows = oversample_experiment(&reduced, &spec, &area, &ext, s.classifier, &s.oversample, s.n_boot, s.seed, &s.grid)?;
        text.push_str("over_sample_pct,n_train,noisy_share,median_auc,delta_auc\n");
        for r in &rows {
            text.push_str(&format!(
                "{},{},{:.4},{:.4},{:.4}\n",
                r.over_sample_pct, r.n_train, r.noisy_share, r.median_auc, r.delta_auc
            ));
        }
        report.oversample = Some(rows);
    }
    if matches!(kind, ExperimentKind::NoisyToExtremes | ExperimentKind::All) {
        let rows = area.rows(reduced.target());
        let labels: Vec<_> = rows.iter().map(|&i| spec.labels[i]).collect();
        let params = tune(
            ClassifierKind::RandomForest,
            &reduced.features().select_rows(&rows),
            &labels,
            &s.grid,
            s.seed,
        )?;
        let r = noisy_to_extremes_experiment(&reduced, &spec, &area, &ext, &params, s.n_boot, s.seed)?;
        text.push_str(&format!("noisy_to_extremes_median_auc,{:.4}\n", r.median_auc));
        report.noisy_to_extremes = Some(r);
    }
    ensure_dir(&cfg.out)?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    write_text(&cfg.out.join("experiments.json"), &json)?;
    out_line(stdout, &text)?;
    Ok(EXIT_OK)
}

pub fn cmd_generate(args: &GenerateArgs, stdout: &mut dyn Write) -> Result<i32> {
    let seed = match args.seed {
        Some(s) => s,
        None => env_seed()?.unwrap_or(0),
    };
    let data = generate_synthetic(args.n, args.p, args.noise_band, args.signal, seed).map_err(|e| Error::Config(e.to_string()))?;
    save_csv(&data, TARGET_COLUMN, &args.output)?;
    out_line(
        stdout,
        &format!("wrote {} rows × {} features to {}\n", data.n_rows(), data.n_features(), args.output.display()),
    )?;
    Ok(EXIT_OK)
}

pub fn cmd_validate(path: &Path, stdout: &mut dyn Write) -> Result<i32> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    validate_report(&value)?;
    out_line(stdout, &format!("{}: valid schema-1 report\n", path.display()))?;
    Ok(EXIT_OK)
}
