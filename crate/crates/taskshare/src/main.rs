use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use taskshare::analysis::TrendTimeScale;
use taskshare::config::PipelineConfig;
use taskshare::pipeline;
use taskshare::time::{MonthIndex, MonthWindow};
use taskshare::Result;

/// Monthly task-share pipeline: ingest postings, compute shares, fit trends
/// and ARIMA forecasts.
#[derive(Parser)]
#[command(name = "taskshare", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count postings into the sparse cube and interpolate annual statistics.
    Ingest(CommonArgs),
    /// Compute task-shares and both aggregations, with a mass-consistency check.
    Shares(CommonArgs),
    /// Trend regression coefficients over the smoothed aggregated series.
    Trend(CommonArgs),
    /// ARIMA one-step-ahead forecasts with 95% intervals and MAPE.
    Forecast(CommonArgs),
    /// Plain-text summary of shares, trends, pair statistics, and MAPE.
    Report(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file (TOML key-value text).
    #[arg(long)]
    config: Option<PathBuf>,

    /// Task taxonomy file (`task,cluster,family`).
    #[arg(long)]
    taxonomy: Option<PathBuf>,
    /// SOC family file (`soc,family_name`).
    #[arg(long)]
    soc_families: Option<PathBuf>,
    /// Postings file (JSONL, or CSV with an `__m_only__` sentinel).
    #[arg(long)]
    postings: Option<PathBuf>,
    /// Annual statistics file (`soc,year,hourly_wage,employment`).
    #[arg(long)]
    annual_stats: Option<PathBuf>,
    /// Artifact directory (also via TASKSHARE_OUT).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Window start, YYYY-MM.
    #[arg(long)]
    window_start: Option<MonthIndex>,
    /// Window end, YYYY-MM.
    #[arg(long)]
    window_end: Option<MonthIndex>,
    /// Moving-average smoothing window (odd).
    #[arg(long)]
    smoothing_window: Option<usize>,
    /// Training months for the forecast stage.
    #[arg(long)]
    train_months: Option<usize>,
    /// Fixed ARIMA order `p,d,q` instead of AIC selection.
    #[arg(long)]
    order: Option<String>,
    /// Trend regression time scale.
    #[arg(long, value_parser = parse_scale)]
    trend_time_scale: Option<TrendTimeScale>,
    /// Month annual statistics anchor to (1 = January).
    #[arg(long)]
    anchor_month: Option<u32>,
    /// Keep all-zero pair series.
    #[arg(long)]
    keep_zeros: bool,
    /// Forecast on raw rather than smoothed series.
    #[arg(long)]
    raw_series: bool,
    /// Seed recorded in the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_scale(s: &str) -> std::result::Result<TrendTimeScale, String> {
    match s {
        "unit" => Ok(TrendTimeScale::Unit),
        "month" => Ok(TrendTimeScale::Month),
        other => Err(format!("expected 'unit' or 'month', got '{other}'")),
    }
}

impl CommonArgs {
    fn build_config(&self) -> Result<PipelineConfig> {
        let mut config = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        if let Some(p) = &self.taxonomy {
            config.paths.taxonomy = p.clone();
        }
        if let Some(p) = &self.soc_families {
            config.paths.soc_families = p.clone();
        }
        if let Some(p) = &self.postings {
            config.paths.postings = p.clone();
        }
        if let Some(p) = &self.annual_stats {
            config.paths.annual_stats = p.clone();
        }
        if let Some(p) = &self.out {
            config.paths.out_dir = p.clone();
        }
        if let Ok(dir) = std::env::var("TASKSHARE_OUT") {
            config.paths.out_dir = PathBuf::from(dir);
        }
        if let (Some(start), Some(end)) = (self.window_start, self.window_end) {
            config.window = MonthWindow::new(start, end)?;
        } else if let Some(start) = self.window_start {
            config.window = MonthWindow::new(start, config.window.end)?;
        } else if let Some(end) = self.window_end {
            config.window = MonthWindow::new(config.window.start, end)?;
        }
        if let Some(v) = self.smoothing_window {
            config.smoothing_window = v;
        }
        if let Some(v) = self.train_months {
            config.train_months = v;
        }
        if let Some(v) = &self.order {
            config.order = Some(v.clone());
        }
        if let Some(v) = self.trend_time_scale {
            config.trend_time_scale = v;
        }
        if let Some(v) = self.anchor_month {
            config.anchor_month = v;
        }
        if self.keep_zeros {
            config.keep_zeros = true;
        }
        if self.raw_series {
            config.raw_forecast_series = true;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        config.validate()?;
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(args) => {
            let config = args.build_config()?;
            let report = pipeline::cmd_ingest(&config)?;
            println!(
                "ingested {} of {} postings (out of window: {}, unknown soc: {}, \
                 unknown task mentions: {}, unparseable: {})",
                report.postings_ingested,
                report.postings_read,
                report.out_of_window,
                report.unknown_soc,
                report.unknown_task_mentions,
                report.unparseable
            );
        }
        Command::Shares(args) => {
            let config = args.build_config()?;
            pipeline::cmd_shares(&config)?;
            println!("shares written; mass consistency verified");
        }
        Command::Trend(args) => {
            let config = args.build_config()?;
            let rows = pipeline::cmd_trend(&config)?;
            println!("trend coefficients written for {} series", rows.len());
        }
        Command::Forecast(args) => {
            let config = args.build_config()?;
            let result = pipeline::cmd_forecast(&config)?;
            println!(
                "forecasts written for {} series ({} skipped)",
                result.rows.len(),
                result.failures.len()
            );
        }
        Command::Report(args) => {
            let config = args.build_config()?;
            let report = pipeline::cmd_report(&config)?;
            print!("{report}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Machine-readable one-line error on stderr.
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
