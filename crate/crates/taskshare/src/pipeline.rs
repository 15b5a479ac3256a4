//! Subcommand orchestration over the persisted artifact directory.
//!
//! Stage order: `ingest` -> `shares` -> `trend` / `forecast` -> `report`.
//! Each stage reads the previous stage's files from the output directory and
//! rewrites its own outputs, so re-running any stage is idempotent.

use std::fmt::Write as _;
use std::fs::File;
use std::path::{Path, PathBuf};

use crate::analysis::{moving_average, rank_series, trend_coefficient, RankBy, TrendCoefficient};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::forecast::{forecast_suite, ArimaOrder, SuiteResult};
use crate::ingest::{
    ingest_postings, load_annual_stats, monthly_stats, parse_postings_csv, parse_postings_jsonl,
    IngestReport,
};
use crate::io;
use crate::shares::{
    aggregate_by_family, aggregate_by_tercile, check_mass_consistency, employment_share,
    occupation_task_share, pair_statistics, task_share, SeriesKey, SeriesLevel, SeriesSet,
};
use crate::taxonomy::{assign_terciles, load_taxonomy, TaxonomyIndex, WageTercile};

pub const MASS_TOLERANCE: f64 = 1e-9;

const COUNTS_FILE: &str = "counts.csv";
const POSTINGS_FILE: &str = "postings.csv";
const MONTHLY_STATS_FILE: &str = "monthly_stats.csv";
const INGEST_REPORT_FILE: &str = "ingest_report.json";
const SHARES_FILE: &str = "shares.csv";
const TREND_FILE: &str = "trend.csv";
const FORECAST_FILE: &str = "forecast.csv";
const EVALUATION_FILE: &str = "evaluation.csv";
const REPORT_FILE: &str = "report.txt";

fn artifact(config: &PipelineConfig, name: &str) -> PathBuf {
    config.paths.out_dir.join(name)
}

fn require_file(path: &Path) -> Result<()> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.display().to_string()));
    }
    Ok(())
}

/// Load the taxonomy files and derive terciles from the base-year wages in
/// the annual stats table.
fn load_index(config: &PipelineConfig) -> Result<TaxonomyIndex> {
    require_file(&config.paths.taxonomy)?;
    require_file(&config.paths.soc_families)?;
    require_file(&config.paths.annual_stats)?;
    let mut index = load_taxonomy(
        File::open(&config.paths.taxonomy)?,
        File::open(&config.paths.soc_families)?,
    )?;
    let wages = crate::taxonomy::load_wage_base(
        File::open(&config.paths.annual_stats)?,
        config.base_wage_year,
    )?;
    index.set_terciles(assign_terciles(&wages)?);
    Ok(index)
}

/// Ingest postings and annual statistics into the artifact directory.
pub fn cmd_ingest(config: &PipelineConfig) -> Result<IngestReport> {
    config.validate()?;
    require_file(&config.paths.postings)?;
    let index = load_index(config)?;
    std::fs::create_dir_all(&config.paths.out_dir)?;

    let postings_file = File::open(&config.paths.postings)?;
    let is_csv = config
        .paths
        .postings
        .extension()
        .is_some_and(|e| e == "csv");
    let (cube, report) = if is_csv {
        let (records, unparseable) = parse_postings_csv(postings_file)?;
        let (cube, mut report) =
            ingest_postings(records.into_iter().map(|r| Ok(Some(r))), &index, config.window)?;
        report.unparseable += unparseable;
        (cube, report)
    } else {
        ingest_postings(parse_postings_jsonl(postings_file), &index, config.window)?
    };
    if cube.is_empty() {
        log::warn!("no postings ingested; counts cube is empty");
    }

    let annual = load_annual_stats(File::open(&config.paths.annual_stats)?)?;
    let stats = monthly_stats(&annual, config.window, config.anchor_month)?;

    io::write_counts_cube(
        &cube,
        &artifact(config, COUNTS_FILE),
        &artifact(config, POSTINGS_FILE),
    )?;
    io::write_monthly_stats(&stats, &artifact(config, MONTHLY_STATS_FILE))?;
    io::write_ingest_report(&report, &artifact(config, INGEST_REPORT_FILE))?;
    Ok(report)
}

/// Compute and persist the series at all three aggregation levels.
pub fn cmd_shares(config: &PipelineConfig) -> Result<()> {
    config.validate()?;
    let index = load_index(config)?;
    let cube = io::read_counts_cube(
        &artifact(config, COUNTS_FILE),
        &artifact(config, POSTINGS_FILE),
    )?;
    let stats = io::read_monthly_stats(&artifact(config, MONTHLY_STATS_FILE))?;

    let (z, z_report) = occupation_task_share(&cube);
    if z_report.orphan_counts > 0 {
        log::warn!("{} task counts had no posting count", z_report.orphan_counts);
    }
    let e = employment_share(&stats, config.window)?;
    let (pairs, y_report) = task_share(&z, &e, config.window, config.keep_zeros);
    if y_report.missing_employment > 0 {
        log::warn!(
            "{} occupations missing from the employment table (treated as zero share)",
            y_report.missing_employment
        );
    }
    let by_family = aggregate_by_family(&pairs, &index, config.window)?;
    let by_tercile = aggregate_by_tercile(&pairs, &index, config.window)?;
    check_mass_consistency(&by_family, &by_tercile, config.window, MASS_TOLERANCE)?;

    io::write_series_set(
        &[&pairs, &by_family, &by_tercile],
        config.window,
        &artifact(config, SHARES_FILE),
    )?;
    Ok(())
}

/// Trend coefficients for the smoothed aggregated series.
pub fn cmd_trend(config: &PipelineConfig) -> Result<Vec<(SeriesKey, TrendCoefficient)>> {
    config.validate()?;
    let shares_path = artifact(config, SHARES_FILE);
    let mut rows = Vec::new();
    for level in [SeriesLevel::FamilyByOccFamily, SeriesLevel::FamilyByTercile] {
        let set = io::read_series_set(&shares_path, level, config.window)?;
        for (key, values) in set {
            let smoothed = moving_average(&values, config.smoothing_window)?;
            rows.push((key, trend_coefficient(&smoothed, config.trend_time_scale)?));
        }
    }
    io::write_trend(&rows, &artifact(config, TREND_FILE))?;
    Ok(rows)
}

/// Fit and roll ARIMA forecasts over the tercile-level series.
pub fn cmd_forecast(config: &PipelineConfig) -> Result<SuiteResult> {
    config.validate()?;
    let set = io::read_series_set(
        &artifact(config, SHARES_FILE),
        SeriesLevel::FamilyByTercile,
        config.window,
    )?;
    let input: SeriesSet = if config.raw_forecast_series {
        set
    } else {
        set.into_iter()
            .map(|(k, v)| Ok((k, moving_average(&v, config.smoothing_window)?)))
            .collect::<Result<_>>()?
    };
    let result = forecast_suite(
        &input,
        config.train_months,
        config.order_override()?,
        &ArimaOrder::default_grid(),
        config.window,
    );
    for (key, reason) in &result.failures {
        log::warn!("forecast skipped for {key}: {reason}");
    }
    io::write_forecasts(&result.points, &artifact(config, FORECAST_FILE))?;
    io::write_evaluation(&result.rows, &artifact(config, EVALUATION_FILE))?;
    Ok(result)
}

/// Concatenated plain-text summary: top task-share families per tercile,
/// trend tables, pair statistics, and the MAPE table.
pub fn cmd_report(config: &PipelineConfig) -> Result<String> {
    config.validate()?;
    let index = load_index(config)?;
    let cube = io::read_counts_cube(
        &artifact(config, COUNTS_FILE),
        &artifact(config, POSTINGS_FILE),
    )?;
    let shares_path = artifact(config, SHARES_FILE);
    let by_tercile = io::read_series_set(&shares_path, SeriesLevel::FamilyByTercile, config.window)?;

    let mut out = String::new();
    writeln!(out, "# Task-share summary ({} .. {})", config.window.start, config.window.end).unwrap();

    writeln!(out, "\n## Top task cluster families by mean task-share").unwrap();
    for tercile in WageTercile::ALL {
        let subset: SeriesSet = by_tercile
            .iter()
            .filter(|(k, _)| {
                matches!(k, SeriesKey::FamilyTercile { tercile: t, .. } if *t == tercile)
            })
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        writeln!(out, "\n{} wage occupations:", tercile).unwrap();
        if subset.is_empty() {
            writeln!(out, "  (no data)").unwrap();
            continue;
        }
        for key in rank_series(&subset, RankBy::MeanLevel, 5)? {
            let values = &subset[&key];
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let (family, _) = key.columns();
            writeln!(out, "  {family}: {mean:.6e}").unwrap();
        }
    }

    writeln!(out, "\n## Trend coefficients (smoothed series)").unwrap();
    let trend_rows = cmd_trend(config)?;
    for (key, tc) in trend_rows
        .iter()
        .filter(|(k, _)| k.level() == SeriesLevel::FamilyByTercile)
    {
        let (family, tercile) = key.columns();
        writeln!(out, "  {family} / {tercile}: slope {:+.3e}", tc.slope).unwrap();
    }

    writeln!(out, "\n## Occupation-task pair statistics").unwrap();
    let stats = pair_statistics(&cube, &index);
    let max_occs = stats.occs_per_task.values().max().copied().unwrap_or(0);
    let max_tasks = stats.tasks_per_occ.values().max().copied().unwrap_or(0);
    writeln!(out, "  tasks observed: {}", stats.occs_per_task.len()).unwrap();
    writeln!(out, "  occupations observed: {}", stats.tasks_per_occ.len()).unwrap();
    writeln!(out, "  max occupations per task: {max_occs}").unwrap();
    writeln!(out, "  max tasks per occupation: {max_tasks}").unwrap();

    writeln!(out, "\n## One-step forecast MAPE (train {} months)", config.train_months).unwrap();
    let suite = cmd_forecast(config)?;
    writeln!(out, "  family / tercile: MAPE% (n)").unwrap();
    for row in &suite.rows {
        let (family, tercile) = row.key.columns();
        writeln!(
            out,
            "  {family} / {tercile}: {:.2} ({})",
            row.mape, row.n_forecasts
        )
        .unwrap();
    }
    for (key, reason) in &suite.failures {
        let (family, tercile) = key.columns();
        writeln!(out, "  {family} / {tercile}: skipped ({reason})").unwrap();
    }

    std::fs::write(artifact(config, REPORT_FILE), &out)?;
    Ok(out)
}
