//! `gnbdim` command line: `ingest`, `density` and `dimension`.
//!
//! Exit codes: 0 success (including a non-converged balance), 2 input or
//! configuration fault, 3 infeasible radio model.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::balance::DimensioningResult;
use crate::config::{ConfigError, RunConfig, Window};
use crate::density::{DeploymentArea, GridSpec};
use crate::economics::CostReport;
use crate::identifiers::PlmnId;
use crate::opencellid::{self, Bbox, CellRecord, Filters, IngestReport, Radio};
use crate::pipeline::{self, NumerologyRow, PipelineError, LINK_DIRECTION, SCS_NOTE};

pub const LOG_ENV: &str = "GNBDIM_LOG";

#[derive(Debug, Parser)]
#[command(name = "gnbdim", version, about = "5G NR radio network dimensioning from cell-tower data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate and filter a cell-tower CSV; writes records.csv and prints the ingest report.
    Ingest(CommonArgs),
    /// Bin towers into a density grid and pick the deployment area; writes grid.csv and fivegda.geojson.
    Density(CommonArgs),
    /// Run the full dimensioning pipeline; writes summary.json and sites.geojson.
    Dimension(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub radio: Option<Radio>,
    #[arg(long)]
    pub plmn: Option<PlmnId>,
    /// minlon,minlat,maxlon,maxlat
    #[arg(long, allow_hyphen_values = true)]
    pub bbox: Option<Bbox>,
    /// Deployment-area size in tiles, WxH
    #[arg(long)]
    pub window: Option<Window>,
}

impl CommonArgs {
    fn merge_filters(&self, base: &Filters) -> Filters {
        Filters {
            radio: self.radio.or(base.radio),
            plmn: self.plmn.clone().or_else(|| base.plmn.clone()),
            bbox: self.bbox.or(base.bbox),
        }
    }
}

/// Everything `dimension` records about a run.
#[derive(Debug, Serialize)]
pub struct SummaryReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub generated_at: String,
    pub input_sha256: String,
    pub link_direction: &'static str,
    pub ingest: IngestReport,
    pub records_used: usize,
    pub grid: GridSpec,
    pub out_of_grid: u64,
    pub deployment_area: DeploymentArea,
    pub subscriber_density_per_km2: f64,
    pub numerology: Vec<NumerologyRow>,
    pub numerology_note: &'static str,
    pub dimensioning: DimensioningResult,
    pub cost: CostReport,
    pub config: RunConfig,
}

/// Process entry point: parses `args`, runs, and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Ingest(a) => cmd_ingest(a, stdout),
        Command::Density(a) => cmd_density(a, stdout),
        Command::Dimension(a) => cmd_dimension(a, stdout),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "gnbdim: {e}");
            e.exit_code()
        }
    }
}

pub fn init_logging() {
    let env = env_logger::Env::new().filter_or(LOG_ENV, "warn");
    let _ = env_logger::Builder::from_env(env).try_init();
}

/// Loads a config, resolving relative `input`/`out_dir` against its directory.
fn load_rebased(path: &Path) -> Result<RunConfig, PipelineError> {
    let (mut cfg, _) = RunConfig::load(path)?;
    let base = path.parent().unwrap_or(Path::new(""));
    for p in [&mut cfg.input, &mut cfg.out_dir].into_iter().flatten() {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    }
    Ok(cfg)
}

fn load_config(path: Option<&Path>) -> Result<Option<RunConfig>, PipelineError> {
    path.map(load_rebased).transpose()
}

fn input_path(args: &CommonArgs, cfg: Option<&RunConfig>) -> Result<PathBuf, PipelineError> {
    args.input
        .clone()
        .or_else(|| cfg.and_then(|c| c.input.clone()))
        .ok_or_else(|| {
            ConfigError::Invalid {
                section: "input",
                message: "no input file given (--input or \"input\" in the config)".into(),
            }
            .into()
        })
}

fn out_dir(args: &CommonArgs, cfg: Option<&RunConfig>) -> Result<PathBuf, PipelineError> {
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.and_then(|c| c.out_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|source| PipelineError::Output {
        path: dir.display().to_string(),
        source,
    })?;
    Ok(dir)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    fs::write(path, bytes).map_err(|source| PipelineError::Output {
        path: path.display().to_string(),
        source,
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn read_filtered(path: &Path, filters: &Filters) -> Result<(Vec<CellRecord>, IngestReport), PipelineError> {
    let (records, report) = opencellid::read_path(path)?;
    let kept = opencellid::filter_records(&records, filters)?;
    log::info!(
        "{}: {} rows, {} kept, {} rejected, {} after filters",
        path.display(),
        report.rows_read,
        report.rows_kept,
        report.rows_rejected,
        kept.len()
    );
    Ok((kept, report))
}

pub fn cmd_ingest(args: &CommonArgs, stdout: &mut dyn Write) -> Result<(), PipelineError> {
    let cfg = load_config(args.config.as_deref())?;
    let input = input_path(args, cfg.as_ref())?;
    let filters = args.merge_filters(&cfg.as_ref().map(|c| c.filters.clone()).unwrap_or_default());
    let (records, report) = read_filtered(&input, &filters)?;
    let dir = out_dir(args, cfg.as_ref())?;
    let mut buf = Vec::new();
    opencellid::write_csv(&mut buf, &records)?;
    write_file(&dir.join("records.csv"), &buf)?;
    let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&report).expect("serializable"));
    Ok(())
}

pub fn cmd_density(args: &CommonArgs, stdout: &mut dyn Write) -> Result<(), PipelineError> {
    let cfg = load_config(args.config.as_deref())?;
    let input = input_path(args, cfg.as_ref())?;
    let filters = args.merge_filters(&cfg.as_ref().map(|c| c.filters.clone()).unwrap_or_default());
    let grid_section = cfg.as_ref().map(|c| c.grid).unwrap_or_default();
    let window = args.window.or(cfg.as_ref().map(|c| c.window)).unwrap_or_default();
    let (records, _) = read_filtered(&input, &filters)?;
    let spec = grid_section.resolve(&records)?;
    let outcome = pipeline::locate_deployment_area(&records, &spec, window)?;
    let dir = out_dir(args, cfg.as_ref())?;

    let mut buf = Vec::new();
    outcome.grid.write_csv(&mut buf).map_err(opencellid::IngestError::from)?;
    write_file(&dir.join("grid.csv"), &buf)?;
    write_json(&dir.join("fivegda.geojson"), &outcome.area.to_geojson(&spec))?;
    let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&outcome.area).expect("serializable"));
    Ok(())
}

pub fn cmd_dimension(args: &CommonArgs, stdout: &mut dyn Write) -> Result<(), PipelineError> {
    let Some(config_path) = args.config.as_deref() else {
        return Err(ConfigError::Invalid {
            section: "config",
            message: "dimension needs --config".into(),
        }
        .into());
    };
    let mut run = load_rebased(config_path)?;
    // command-line flags override the file, and the echo records the result
    run.input = Some(input_path(args, Some(&run))?);
    run.filters = args.merge_filters(&run.filters);
    if let Some(w) = args.window {
        run.window = w;
    }
    if let Some(o) = &args.out {
        run.out_dir = Some(o.clone());
    }
    let cfg = run.validate()?;
    let input = cfg.run.input.clone().expect("set above");

    let input_bytes = fs::read(&input).map_err(|source| opencellid::IngestError::Open {
        path: input.display().to_string(),
        source,
    })?;
    let (records, ingest) = read_filtered(&input, &cfg.run.filters)?;
    let outcome = pipeline::plan(&records, &cfg)?;
    let spec = outcome.density.grid.spec;
    let dir = out_dir(args, Some(&cfg.run))?;

    let summary = SummaryReport {
        tool: "gnbdim",
        version: env!("CARGO_PKG_VERSION"),
        generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        input_sha256: hex::encode(Sha256::digest(&input_bytes)),
        link_direction: LINK_DIRECTION,
        ingest,
        records_used: records.len(),
        grid: spec,
        out_of_grid: outcome.density.grid.out_of_grid,
        deployment_area: outcome.density.area,
        subscriber_density_per_km2: outcome.rho,
        numerology: pipeline::numerology_rows(&cfg.nr),
        numerology_note: SCS_NOTE,
        dimensioning: outcome.result,
        cost: outcome.cost,
        config: cfg.run.clone(),
    };
    if !outcome.result.converged {
        log::warn!("load balance did not converge within {} iterations", cfg.run.balance.max_iter);
    }

    let mut grid_csv = Vec::new();
    outcome.density.grid.write_csv(&mut grid_csv).map_err(opencellid::IngestError::from)?;
    write_file(&dir.join("grid.csv"), &grid_csv)?;
    write_json(&dir.join("fivegda.geojson"), &outcome.density.area.to_geojson(&spec))?;
    write_json(
        &dir.join("sites.geojson"),
        &pipeline::sites_geojson(&spec, &outcome.density.area, outcome.result.deployment_radius_km),
    )?;
    write_json(&dir.join("summary.json"), &summary)?;

    let brief = serde_json::json!({
        "classification": outcome.result.classification,
        "n_sites_final": outcome.result.n_sites_final,
        "converged": outcome.result.converged,
        "cost_per_bit": outcome.cost.cost_per_bit,
        "summary": dir.join("summary.json"),
    });
    let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&brief).expect("serializable"));
    Ok(())
}

/// Drops the `generated_at` field so two summaries can be compared.
pub fn without_timestamp(mut summary: Value) -> Value {
    if let Some(obj) = summary.as_object_mut() {
        obj.remove("generated_at");
    }
    summary
}

