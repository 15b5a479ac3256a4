//! Posting ingestion and annual-statistics interpolation.
//!
//! Postings stream into a sparse [`CountsCube`]: `m(j,t)` counts postings
//! per occupation-month and `n(i,j,t)` counts postings mentioning each task
//! (duplicate mentions within one posting count once). Annual BLS-style
//! wage/employment tables are expanded to monthly values by piecewise-linear
//! interpolation between January knots.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read};

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taxonomy::{SocCode, TaskId, TaxonomyIndex};
use crate::time::{MonthIndex, MonthWindow};

/// A parsed job posting record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostingRecord {
    pub posting_id: String,
    pub date: NaiveDate,
    pub soc: String,
    #[serde(default)]
    pub tasks: Vec<String>,
}

impl PostingRecord {
    pub fn month(&self) -> Result<MonthIndex> {
        MonthIndex::new(self.date.year(), self.date.month())
    }
}

/// Sparse task-mention counts `n(i,j,t)` and posting counts `m(j,t)`.
///
/// BTreeMap keys give a fixed iteration order, so downstream floating-point
/// summations are bit-reproducible.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountsCube {
    pub n: BTreeMap<(TaskId, SocCode, MonthIndex), u64>,
    pub m: BTreeMap<(SocCode, MonthIndex), u64>,
}

impl CountsCube {
    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    /// Merge another cube by count addition. Commutative and associative,
    /// so sharded ingestion can combine partial cubes in any order.
    pub fn merge(&mut self, other: CountsCube) {
        for (k, v) in other.n {
            *self.n.entry(k).or_insert(0) += v;
        }
        for (k, v) in other.m {
            *self.m.entry(k).or_insert(0) += v;
        }
    }
}

/// Tallies of skipped or degenerate records seen during ingestion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub postings_read: u64,
    pub postings_ingested: u64,
    pub out_of_window: u64,
    pub unknown_soc: u64,
    pub unknown_task_mentions: u64,
    pub unparseable: u64,
}

/// Sentinel task name marking a task-free posting row in the delimited format.
pub const M_ONLY_SENTINEL: &str = "__m_only__";

/// Parse newline-delimited JSON posting records. Unparseable lines are
/// yielded as `None` so the caller can tally them.
pub fn parse_postings_jsonl<R: Read>(
    source: R,
) -> impl Iterator<Item = Result<Option<PostingRecord>>> {
    BufReader::new(source).lines().filter_map(|line| match line {
        Err(e) => Some(Err(Error::Io(e))),
        Ok(l) if l.trim().is_empty() => None,
        Ok(l) => Some(Ok(serde_json::from_str::<PostingRecord>(&l).ok())),
    })
}

#[derive(Deserialize)]
struct PostingCsvRow {
    posting_id: String,
    date: String,
    soc: String,
    task: String,
}

/// Parse the delimited-text posting format: one row per (posting, task) with
/// header `posting_id,date,soc,task`, the [`M_ONLY_SENTINEL`] marking
/// task-free postings. Rows group by `posting_id` regardless of order.
pub fn parse_postings_csv<R: Read>(source: R) -> Result<(Vec<PostingRecord>, u64)> {
    let mut rdr = csv::Reader::from_reader(source);
    let mut grouped: BTreeMap<String, PostingRecord> = BTreeMap::new();
    let mut unparseable = 0u64;
    for record in rdr.deserialize() {
        let row: PostingCsvRow = match record {
            Ok(r) => r,
            Err(_) => {
                unparseable += 1;
                continue;
            }
        };
        let date = match NaiveDate::parse_from_str(&row.date, "%Y-%m-%d") {
            Ok(d) => d,
            Err(_) => {
                unparseable += 1;
                continue;
            }
        };
        let entry = grouped
            .entry(row.posting_id.clone())
            .or_insert_with(|| PostingRecord {
                posting_id: row.posting_id,
                date,
                soc: row.soc,
                tasks: Vec::new(),
            });
        if row.task != M_ONLY_SENTINEL {
            entry.tasks.push(row.task);
        }
    }
    Ok((grouped.into_values().collect(), unparseable))
}

/// Count postings into a cube over the analysis window.
///
/// Each in-window posting with a known SOC increments `m(soc, month)` once
/// and `n(task, soc, month)` once per distinct known task it mentions.
/// Unknown SOCs skip the whole posting; unknown tasks skip only the mention.
/// Both are tallied in the report.
pub fn ingest_postings<I>(
    postings: I,
    index: &TaxonomyIndex,
    window: MonthWindow,
) -> Result<(CountsCube, IngestReport)>
where
    I: IntoIterator<Item = Result<Option<PostingRecord>>>,
{
    let mut cube = CountsCube::default();
    let mut report = IngestReport::default();

    for item in postings {
        let Some(posting) = item? else {
            report.unparseable += 1;
            continue;
        };
        report.postings_read += 1;

        let month = match posting.month() {
            Ok(m) => m,
            Err(_) => {
                report.unparseable += 1;
                continue;
            }
        };
        if !window.contains(month) {
            report.out_of_window += 1;
            continue;
        }
        let soc: SocCode = match posting.soc.parse() {
            Ok(s) => s,
            Err(_) => {
                report.unknown_soc += 1;
                continue;
            }
        };

        *cube.m.entry((soc, month)).or_insert(0) += 1;
        report.postings_ingested += 1;

        // Distinct tasks per posting: duplicate mentions count once.
        let mut seen: BTreeSet<TaskId> = BTreeSet::new();
        for name in &posting.tasks {
            let id = TaskId::from_name(name);
            if index.task_by_id(&id).is_none() {
                report.unknown_task_mentions += 1;
                continue;
            }
            if seen.insert(id.clone()) {
                *cube.n.entry((id, soc, month)).or_insert(0) += 1;
            }
        }
    }

    Ok((cube, report))
}

/// Annual wage/employment statistics keyed by (soc, year).
pub type AnnualStats = BTreeMap<(SocCode, i32), AnnualRow>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnualRow {
    pub hourly_wage: f64,
    pub employment: f64,
}

#[derive(Deserialize)]
struct AnnualCsvRow {
    soc: String,
    year: i32,
    hourly_wage: f64,
    employment: f64,
}

/// Load the annual stats file, header `soc,year,hourly_wage,employment`.
pub fn load_annual_stats<R: Read>(source: R) -> Result<AnnualStats> {
    let mut rdr = csv::Reader::from_reader(source);
    {
        let headers = rdr
            .headers()
            .map_err(|_| Error::EmptyInput("annual stats".into()))?;
        for col in ["soc", "year", "hourly_wage", "employment"] {
            if !headers.iter().any(|h| h == col) {
                return Err(Error::MissingColumn {
                    column: col.into(),
                    what: "annual stats".into(),
                });
            }
        }
    }
    let mut stats = AnnualStats::new();
    for record in rdr.deserialize() {
        let row: AnnualCsvRow = record?;
        let soc: SocCode = row.soc.parse()?;
        for (field, value) in [("hourly_wage", row.hourly_wage), ("employment", row.employment)] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::NegativeValue {
                    field,
                    soc: row.soc.clone(),
                    year: row.year,
                    value,
                });
            }
        }
        if stats
            .insert(
                (soc, row.year),
                AnnualRow {
                    hourly_wage: row.hourly_wage,
                    employment: row.employment,
                },
            )
            .is_some()
        {
            return Err(Error::DuplicateKey {
                soc: row.soc,
                year: row.year,
            });
        }
    }
    if stats.is_empty() {
        return Err(Error::EmptyInput("annual stats".into()));
    }
    Ok(stats)
}

/// Interpolated monthly wage and employment per occupation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MonthlyStats {
    pub wage: BTreeMap<(SocCode, MonthIndex), f64>,
    pub employment: BTreeMap<(SocCode, MonthIndex), f64>,
}

/// Expand per-occupation annual values to monthly values.
///
/// Each annual value anchors at `anchor_month` of its year (January by
/// default). Months between consecutive knots interpolate linearly; months
/// outside the knot range hold the nearest knot value flat. Knot months
/// reproduce the annual inputs exactly.
pub fn interpolate_monthly(
    annual: &BTreeMap<(SocCode, i32), f64>,
    window: MonthWindow,
    anchor_month: u32,
) -> Result<BTreeMap<(SocCode, MonthIndex), f64>> {
    // Group knots per occupation, sorted by year via the BTreeMap order.
    let mut per_soc: BTreeMap<SocCode, Vec<(MonthIndex, f64)>> = BTreeMap::new();
    for ((soc, year), value) in annual {
        per_soc
            .entry(*soc)
            .or_default()
            .push((MonthIndex::new(*year, anchor_month)?, *value));
    }

    let mut out = BTreeMap::new();
    for (soc, knots) in per_soc {
        for month in window.iter() {
            out.insert((soc, month), interpolate_at(&knots, month));
        }
    }
    Ok(out)
}

/// Piecewise-linear evaluation at `month` over sorted knots, flat outside.
fn interpolate_at(knots: &[(MonthIndex, f64)], month: MonthIndex) -> f64 {
    debug_assert!(!knots.is_empty());
    if month <= knots[0].0 {
        return knots[0].1;
    }
    if month >= knots[knots.len() - 1].0 {
        return knots[knots.len() - 1].1;
    }
    let right = knots.partition_point(|(k, _)| *k < month);
    let (m0, v0) = knots[right - 1];
    let (m1, v1) = knots[right];
    if m1 == month {
        return v1;
    }
    let span = m1.months_since(m0) as f64;
    let offset = month.months_since(m0) as f64;
    v0 + offset * (v1 - v0) / span
}

/// Interpolate both wage and employment tables over the window.
pub fn monthly_stats(
    annual: &AnnualStats,
    window: MonthWindow,
    anchor_month: u32,
) -> Result<MonthlyStats> {
    let wages: BTreeMap<(SocCode, i32), f64> = annual
        .iter()
        .map(|(k, v)| (*k, v.hourly_wage))
        .collect();
    let employment: BTreeMap<(SocCode, i32), f64> = annual
        .iter()
        .map(|(k, v)| (*k, v.employment))
        .collect();
    Ok(MonthlyStats {
        wage: interpolate_monthly(&wages, window, anchor_month)?,
        employment: interpolate_monthly(&employment, window, anchor_month)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::load_taxonomy;
    use proptest::prelude::*;

    fn toy_index() -> TaxonomyIndex {
        let tasks = "task,cluster,family\n\
                     Python,Scripting Languages,Information Technology\n\
                     SQL,Databases,Information Technology\n";
        let socs = "soc,family_name\n15-1132,Computer and Mathematical\n";
        load_taxonomy(tasks.as_bytes(), socs.as_bytes()).unwrap()
    }

    fn posting(id: &str, date: &str, soc: &str, tasks: &[&str]) -> Result<Option<PostingRecord>> {
        Ok(Some(PostingRecord {
            posting_id: id.into(),
            date: NaiveDate::parse_from_str(date, "%Y-%m-%d").unwrap(),
            soc: soc.into(),
            tasks: tasks.iter().map(|s| s.to_string()).collect(),
        }))
    }

    #[test]
    fn single_posting_counts() {
        let index = toy_index();
        let window = MonthWindow::default_analysis();
        let (cube, report) = ingest_postings(
            vec![posting("p1", "2010-01-15", "15-1132", &["Python", "SQL"])],
            &index,
            window,
        )
        .unwrap();
        let jan = MonthIndex::new(2010, 1).unwrap();
        let soc: SocCode = "15-1132".parse().unwrap();
        assert_eq!(cube.m[&(soc, jan)], 1);
        assert_eq!(cube.n[&(TaskId::from_name("Python"), soc, jan)], 1);
        assert_eq!(cube.n[&(TaskId::from_name("SQL"), soc, jan)], 1);
        assert_eq!(report.postings_ingested, 1);
    }

    #[test]
    fn duplicate_mention_counts_once() {
        let index = toy_index();
        let window = MonthWindow::default_analysis();
        let (cube, _) = ingest_postings(
            vec![
                posting("p1", "2010-01-15", "15-1132", &["Python", "Python"]),
                posting("p2", "2010-01-20", "15-1132", &["Python"]),
            ],
            &index,
            window,
        )
        .unwrap();
        let jan = MonthIndex::new(2010, 1).unwrap();
        let soc: SocCode = "15-1132".parse().unwrap();
        assert_eq!(cube.m[&(soc, jan)], 2);
        assert_eq!(cube.n[&(TaskId::from_name("Python"), soc, jan)], 2);
    }

    #[test]
    fn out_of_window_posting_skipped() {
        let index = toy_index();
        let window = MonthWindow::default_analysis();
        let (cube, report) = ingest_postings(
            vec![posting("p1", "2009-12-15", "15-1132", &["Python"])],
            &index,
            window,
        )
        .unwrap();
        assert!(cube.is_empty());
        assert_eq!(report.out_of_window, 1);
    }

    #[test]
    fn unknown_soc_and_task_reported() {
        let index = toy_index();
        let window = MonthWindow::default_analysis();
        let (cube, report) = ingest_postings(
            vec![
                posting("p1", "2010-03-01", "99-0000", &["Python"]),
                posting("p2", "2010-03-01", "15-1132", &["Fortran", "Python"]),
            ],
            &index,
            window,
        )
        .unwrap();
        assert_eq!(report.unknown_soc, 1);
        assert_eq!(report.unknown_task_mentions, 1);
        let mar = MonthIndex::new(2010, 3).unwrap();
        let soc: SocCode = "15-1132".parse().unwrap();
        assert_eq!(cube.m[&(soc, mar)], 1);
        assert_eq!(cube.n.len(), 1);
        assert_eq!(cube.n[&(TaskId::from_name("Python"), soc, mar)], 1);
    }

    #[test]
    fn task_free_posting_counts_toward_m_only() {
        let index = toy_index();
        let (cube, _) = ingest_postings(
            vec![posting("p1", "2011-06-01", "15-1132", &[])],
            &index,
            MonthWindow::default_analysis(),
        )
        .unwrap();
        assert_eq!(cube.m.len(), 1);
        assert!(cube.n.is_empty());
    }

    #[test]
    fn jsonl_parse_tallies_bad_lines() {
        let src = "{\"posting_id\":\"a\",\"date\":\"2010-01-02\",\"soc\":\"15-1132\",\"tasks\":[\"Python\"]}\n\
                   not json\n\
                   \n";
        let items: Vec<_> = parse_postings_jsonl(src.as_bytes()).collect();
        assert_eq!(items.len(), 2);
        assert!(items[0].as_ref().unwrap().is_some());
        assert!(items[1].as_ref().unwrap().is_none());
    }

    #[test]
    fn csv_postings_group_by_id_in_any_order() {
        let src = "posting_id,date,soc,task\n\
                   p1,2010-01-02,15-1132,Python\n\
                   p2,2010-01-03,15-1132,__m_only__\n\
                   p1,2010-01-02,15-1132,SQL\n";
        let (records, unparseable) = parse_postings_csv(src.as_bytes()).unwrap();
        assert_eq!(unparseable, 0);
        assert_eq!(records.len(), 2);
        let p1 = records.iter().find(|r| r.posting_id == "p1").unwrap();
        assert_eq!(p1.tasks, vec!["Python", "SQL"]);
        let p2 = records.iter().find(|r| r.posting_id == "p2").unwrap();
        assert!(p2.tasks.is_empty());
    }

    #[test]
    fn ingest_is_order_independent() {
        let index = toy_index();
        let window = MonthWindow::default_analysis();
        let mk = || {
            vec![
                posting("p1", "2010-01-15", "15-1132", &["Python", "SQL"]),
                posting("p2", "2010-02-15", "15-1132", &["SQL"]),
                posting("p3", "2010-01-15", "11-1021", &["Python"]),
            ]
        };
        let (a, _) = ingest_postings(mk(), &index, window).unwrap();
        let mut rev = mk();
        rev.reverse();
        let (b, _) = ingest_postings(rev, &index, window).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn annual_stats_validation() {
        let good = "soc,year,hourly_wage,employment\n15-1132,2010,43.27,520000\n";
        let stats = load_annual_stats(good.as_bytes()).unwrap();
        let key = ("15-1132".parse().unwrap(), 2010);
        assert_eq!(stats[&key].hourly_wage, 43.27);

        let dup = "soc,year,hourly_wage,employment\n\
                   15-1132,2010,43.27,520000\n15-1132,2010,44.0,520001\n";
        assert!(matches!(
            load_annual_stats(dup.as_bytes()),
            Err(Error::DuplicateKey { .. })
        ));

        let neg = "soc,year,hourly_wage,employment\n15-1132,2010,43.27,-5\n";
        assert!(matches!(
            load_annual_stats(neg.as_bytes()),
            Err(Error::NegativeValue { .. })
        ));
    }

    #[test]
    fn interpolation_matches_hand_values() {
        let soc: SocCode = "15-1132".parse().unwrap();
        let annual = BTreeMap::from([((soc, 2010), 100.0), ((soc, 2011), 112.0)]);
        let window = MonthWindow::default_analysis();
        let monthly = interpolate_monthly(&annual, window, 1).unwrap();
        // 6 months past the January anchor.
        let jul = MonthIndex::new(2010, 7).unwrap();
        assert!((monthly[&(soc, jul)] - 106.0).abs() < 1e-12);
        // Knot reproduction, bit-exact.
        assert_eq!(monthly[&(soc, MonthIndex::new(2011, 1).unwrap())], 112.0);
        assert_eq!(monthly[&(soc, MonthIndex::new(2010, 1).unwrap())], 100.0);
        // Flat extension past the last knot.
        assert_eq!(monthly[&(soc, MonthIndex::new(2017, 12).unwrap())], 112.0);
    }

    #[test]
    fn single_knot_is_constant() {
        let soc: SocCode = "15-1132".parse().unwrap();
        let annual = BTreeMap::from([((soc, 2010), 50.0)]);
        let window = MonthWindow::default_analysis();
        let monthly = interpolate_monthly(&annual, window, 1).unwrap();
        assert!(monthly.values().all(|v| *v == 50.0));
        assert_eq!(monthly.len(), 96);
    }

    proptest! {
        #[test]
        fn interpolation_brackets_and_is_affine(
            values in proptest::collection::vec(0.0f64..1e6, 8),
        ) {
            let soc: SocCode = "15-1132".parse().unwrap();
            let annual: BTreeMap<(SocCode, i32), f64> = values
                .iter()
                .enumerate()
                .map(|(i, v)| ((soc, 2010 + i as i32), *v))
                .collect();
            let window = MonthWindow::default_analysis();
            let monthly = interpolate_monthly(&annual, window, 1).unwrap();
            let series: Vec<f64> = window.iter().map(|m| monthly[&(soc, m)]).collect();

            // Knots reproduce inputs exactly.
            for (i, v) in values.iter().enumerate() {
                prop_assert_eq!(series[12 * i], *v);
            }
            // Between knots the value lies between the bracketing knots, and
            // second differences vanish strictly inside an interval.
            for i in 0..values.len() - 1 {
                let (lo, hi) = (values[i].min(values[i + 1]), values[i].max(values[i + 1]));
                for k in 1..12 {
                    let t = 12 * i + k;
                    prop_assert!(series[t] >= lo - 1e-9 && series[t] <= hi + 1e-9);
                    if k >= 2 {
                        let dd = series[t] - 2.0 * series[t - 1] + series[t - 2];
                        prop_assert!(dd.abs() < 1e-9 * (1.0 + hi));
                    }
                }
            }
        }
    }
}
