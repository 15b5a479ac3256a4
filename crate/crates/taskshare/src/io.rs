//! Delimited-text persistence for pipeline artifacts.
//!
//! All files are UTF-8 CSV with headers. Rows are written in sorted key
//! order so re-running a stage on the same inputs is byte-identical.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::forecast::{EvaluationRow, ForecastPoint};
use crate::ingest::{CountsCube, IngestReport, MonthlyStats};
use crate::shares::{SeriesKey, SeriesLevel, SeriesSet};
use crate::taxonomy::{SocCode, TaskId};
use crate::time::{MonthIndex, MonthWindow};

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    if !path.exists() {
        return Err(Error::MissingArtifact(path.display().to_string()));
    }
    Ok(BufReader::new(File::open(path)?))
}

/// Write `task_id,soc,month,count` and `soc,month,postings`.
pub fn write_counts_cube(cube: &CountsCube, counts_path: &Path, postings_path: &Path) -> Result<()> {
    let mut w = create(counts_path)?;
    writeln!(w, "task_id,soc,month,count")?;
    for ((task, soc, month), count) in &cube.n {
        writeln!(w, "{},{},{},{}", escape(task.as_str()), soc, month, count)?;
    }
    w.flush()?;

    let mut w = create(postings_path)?;
    writeln!(w, "soc,month,postings")?;
    for ((soc, month), count) in &cube.m {
        writeln!(w, "{},{},{}", soc, month, count)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct CountRow {
    task_id: String,
    soc: String,
    month: String,
    count: u64,
}

#[derive(Deserialize)]
struct PostingCountRow {
    soc: String,
    month: String,
    postings: u64,
}

pub fn read_counts_cube(counts_path: &Path, postings_path: &Path) -> Result<CountsCube> {
    let mut cube = CountsCube::default();
    let mut rdr = csv::Reader::from_reader(open(counts_path)?);
    for record in rdr.deserialize() {
        let row: CountRow = record?;
        let soc: SocCode = row.soc.parse()?;
        let month: MonthIndex = row.month.parse()?;
        cube.n
            .insert((TaskId::from_name(&row.task_id), soc, month), row.count);
    }
    let mut rdr = csv::Reader::from_reader(open(postings_path)?);
    for record in rdr.deserialize() {
        let row: PostingCountRow = record?;
        cube.m
            .insert((row.soc.parse()?, row.month.parse()?), row.postings);
    }
    Ok(cube)
}

/// Write `soc,month,hourly_wage,employment`.
pub fn write_monthly_stats(stats: &MonthlyStats, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "soc,month,hourly_wage,employment")?;
    for ((soc, month), wage) in &stats.wage {
        let employment = stats.employment.get(&(*soc, *month)).copied().unwrap_or(0.0);
        writeln!(w, "{soc},{month},{wage},{employment}")?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct MonthlyStatsRow {
    soc: String,
    month: String,
    hourly_wage: f64,
    employment: f64,
}

pub fn read_monthly_stats(path: &Path) -> Result<MonthlyStats> {
    let mut stats = MonthlyStats::default();
    let mut rdr = csv::Reader::from_reader(open(path)?);
    for record in rdr.deserialize() {
        let row: MonthlyStatsRow = record?;
        let soc: SocCode = row.soc.parse()?;
        let month: MonthIndex = row.month.parse()?;
        stats.wage.insert((soc, month), row.hourly_wage);
        stats.employment.insert((soc, month), row.employment);
    }
    Ok(stats)
}

/// Write `level,key1,key2,month,value`, one row per nonzero cell.
pub fn write_series_set(sets: &[&SeriesSet], window: MonthWindow, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "level,key1,key2,month,value")?;
    for set in sets {
        for (key, values) in set.iter() {
            let (key1, key2) = key.columns();
            for (i, value) in values.iter().enumerate() {
                if *value != 0.0 {
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        key.level().label(),
                        escape(&key1),
                        escape(&key2),
                        window.at(i),
                        value
                    )?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct SeriesRow {
    level: String,
    key1: String,
    key2: String,
    month: String,
    value: f64,
}

/// Read back the series at one aggregation level. Missing months are
/// implicit zeros.
pub fn read_series_set(path: &Path, level: SeriesLevel, window: MonthWindow) -> Result<SeriesSet> {
    let mut set = SeriesSet::new();
    let mut rdr = csv::Reader::from_reader(open(path)?);
    for record in rdr.deserialize() {
        let row: SeriesRow = record?;
        if row.level != level.label() {
            continue;
        }
        let key = match level {
            SeriesLevel::Pair => SeriesKey::Pair {
                task: TaskId::from_name(&row.key1),
                soc: row.key2.parse()?,
            },
            SeriesLevel::FamilyByOccFamily => SeriesKey::FamilyOcc {
                family: row.key1,
                occ_family: row.key2,
            },
            SeriesLevel::FamilyByTercile => SeriesKey::FamilyTercile {
                family: row.key1,
                tercile: row.key2.parse()?,
            },
        };
        let month: MonthIndex = row.month.parse()?;
        if let Some(ordinal) = window.ordinal(month) {
            set.entry(key).or_insert_with(|| vec![0.0; window.len()])[ordinal] = row.value;
        }
    }
    Ok(set)
}

/// Write `level,key1,key2,slope,intercept,n_points`.
pub fn write_trend(
    rows: &[(SeriesKey, crate::analysis::TrendCoefficient)],
    path: &Path,
) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "level,key1,key2,slope,intercept,n_points")?;
    for (key, tc) in rows {
        let (key1, key2) = key.columns();
        writeln!(
            w,
            "{},{},{},{},{},{}",
            key.level().label(),
            escape(&key1),
            escape(&key2),
            tc.slope,
            tc.intercept,
            tc.n_points
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Write `family,tercile,month,mean,lower95,upper95,actual`.
pub fn write_forecasts(points: &[(SeriesKey, Vec<ForecastPoint>)], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "family,tercile,month,mean,lower95,upper95,actual")?;
    for (key, series_points) in points {
        let (family, tercile) = key.columns();
        for p in series_points {
            let actual = p.actual.map(|a| a.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{}",
                escape(&family),
                tercile,
                p.month,
                p.mean,
                format_args!("{},{}", p.lower95, p.upper95),
                actual
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Write `family,tercile,mape,n_forecasts`.
pub fn write_evaluation(rows: &[EvaluationRow], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "family,tercile,mape,n_forecasts")?;
    for row in rows {
        let (family, tercile) = row.key.columns();
        writeln!(
            w,
            "{},{},{},{}",
            escape(&family),
            tercile,
            row.mape,
            row.n_forecasts
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ingest_report(report: &IngestReport, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, report)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Quote a field if it contains CSV metacharacters.
fn escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::WageTercile;
    use tempfile::tempdir;

    #[test]
    fn counts_cube_roundtrip() {
        let dir = tempdir().unwrap();
        let mut cube = CountsCube::default();
        let soc: SocCode = "15-1132".parse().unwrap();
        let m = MonthIndex::new(2010, 1).unwrap();
        cube.m.insert((soc, m), 4);
        cube.n.insert((TaskId::from_name("Python"), soc, m), 2);
        let counts = dir.path().join("counts.csv");
        let postings = dir.path().join("postings.csv");
        write_counts_cube(&cube, &counts, &postings).unwrap();
        assert_eq!(read_counts_cube(&counts, &postings).unwrap(), cube);
    }

    #[test]
    fn series_set_roundtrip_sparse() {
        let dir = tempdir().unwrap();
        let window = MonthWindow::default_analysis();
        let mut set = SeriesSet::new();
        let mut values = vec![0.0; 96];
        values[0] = 0.25;
        values[95] = 0.5;
        set.insert(
            SeriesKey::FamilyTercile {
                family: "Health Care".into(),
                tercile: WageTercile::High,
            },
            values,
        );
        let path = dir.path().join("shares.csv");
        write_series_set(&[&set], window, &path).unwrap();
        let back = read_series_set(&path, SeriesLevel::FamilyByTercile, window).unwrap();
        assert_eq!(back, set);
        // Other levels filtered out.
        let pairs = read_series_set(&path, SeriesLevel::Pair, window).unwrap();
        assert!(pairs.is_empty());
    }

    #[test]
    fn missing_artifact_error() {
        let dir = tempdir().unwrap();
        let err =
            read_counts_cube(&dir.path().join("nope.csv"), &dir.path().join("nope2.csv"))
                .unwrap_err();
        assert!(matches!(err, Error::MissingArtifact(_)));
    }

    #[test]
    fn escape_quotes_commas() {
        assert_eq!(escape("plain"), "plain");
        assert_eq!(escape("a,b"), "\"a,b\"");
        assert_eq!(escape("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
