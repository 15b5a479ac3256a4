//! Task-share computation and aggregation.
//!
//! From the counts cube and monthly statistics: the occupation-task share
//! `z = n / m`, the employment share `e = E / sum(E)`, their product the
//! task-share `y = e * z`, and the two aggregations of `y` over (task
//! cluster family, occupation family) and (task cluster family, wage
//! tercile). All structures are sparse; zeros are implicit. Iteration is
//! over sorted keys so summations are bit-reproducible.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{CountsCube, MonthlyStats};
use crate::taxonomy::{SocCode, TaskId, TaxonomyIndex, WageTercile};
use crate::time::{MonthIndex, MonthWindow};

/// Aggregation level of a task-share series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SeriesLevel {
    Pair,
    FamilyByOccFamily,
    FamilyByTercile,
}

impl SeriesLevel {
    pub fn label(self) -> &'static str {
        match self {
            SeriesLevel::Pair => "pair",
            SeriesLevel::FamilyByOccFamily => "family_occ_family",
            SeriesLevel::FamilyByTercile => "family_tercile",
        }
    }
}

/// Key of a task-share series at any aggregation level.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SeriesKey {
    Pair { task: TaskId, soc: SocCode },
    FamilyOcc { family: String, occ_family: String },
    FamilyTercile { family: String, tercile: WageTercile },
}

impl SeriesKey {
    pub fn level(&self) -> SeriesLevel {
        match self {
            SeriesKey::Pair { .. } => SeriesLevel::Pair,
            SeriesKey::FamilyOcc { .. } => SeriesLevel::FamilyByOccFamily,
            SeriesKey::FamilyTercile { .. } => SeriesLevel::FamilyByTercile,
        }
    }

    /// (key1, key2) column values for the delimited output format.
    pub fn columns(&self) -> (String, String) {
        match self {
            SeriesKey::Pair { task, soc } => (task.to_string(), soc.to_string()),
            SeriesKey::FamilyOcc { family, occ_family } => {
                (family.clone(), occ_family.clone())
            }
            SeriesKey::FamilyTercile { family, tercile } => {
                (family.clone(), tercile.to_string())
            }
        }
    }
}

impl fmt::Display for SeriesKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.columns();
        write!(f, "{}/{}", a, b)
    }
}

/// A monthly real-valued series over the analysis window.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskShareSeries {
    pub key: SeriesKey,
    pub values: Vec<f64>,
}

/// Ordered set of task-share series keyed by [`SeriesKey`].
pub type SeriesSet = BTreeMap<SeriesKey, Vec<f64>>;

/// Per-month employment shares summing to one.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmploymentShare {
    pub values: BTreeMap<(SocCode, MonthIndex), f64>,
}

/// Degenerate cases encountered while computing shares.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareReport {
    /// n > 0 with m = 0 — violates the cube invariant, entry omitted.
    pub orphan_counts: u64,
    /// Occupation present in z but absent from the employment table.
    pub missing_employment: u64,
}

/// z = n / m per (task, occupation, month). Entries with m = 0 are
/// omitted and tallied; absent n is an implicit zero.
pub fn occupation_task_share(
    cube: &CountsCube,
) -> (BTreeMap<(TaskId, SocCode, MonthIndex), f64>, ShareReport) {
    let mut z = BTreeMap::new();
    let mut report = ShareReport::default();
    for ((task, soc, month), n) in &cube.n {
        match cube.m.get(&(*soc, *month)) {
            Some(m) if *m > 0 => {
                z.insert((task.clone(), *soc, *month), *n as f64 / *m as f64);
            }
            _ => report.orphan_counts += 1,
        }
    }
    (z, report)
}

/// e = E / sum_j E per month over the window.
pub fn employment_share(stats: &MonthlyStats, window: MonthWindow) -> Result<EmploymentShare> {
    let mut totals: BTreeMap<MonthIndex, f64> = BTreeMap::new();
    for ((_, month), e) in &stats.employment {
        if window.contains(*month) {
            *totals.entry(*month).or_insert(0.0) += e;
        }
    }
    for month in window.iter() {
        match totals.get(&month) {
            Some(t) if *t > 0.0 => {}
            _ => return Err(Error::ZeroTotalEmployment(month.to_string())),
        }
    }
    let mut values = BTreeMap::new();
    for ((soc, month), e) in &stats.employment {
        if window.contains(*month) {
            values.insert((*soc, *month), e / totals[month]);
        }
    }
    Ok(EmploymentShare { values })
}

/// y = e * z, assembled into pair-level series over the window.
///
/// Occupations missing from the employment table are treated as e = 0 and
/// tallied. All-zero series are dropped unless `keep_zeros` is set.
pub fn task_share(
    z: &BTreeMap<(TaskId, SocCode, MonthIndex), f64>,
    e: &EmploymentShare,
    window: MonthWindow,
    keep_zeros: bool,
) -> (SeriesSet, ShareReport) {
    let mut report = ShareReport::default();
    let mut missing: BTreeSet<SocCode> = BTreeSet::new();
    let mut set = SeriesSet::new();
    for ((task, soc, month), zv) in z {
        let Some(ordinal) = window.ordinal(*month) else {
            continue;
        };
        let ev = match e.values.get(&(*soc, *month)) {
            Some(v) => *v,
            None => {
                missing.insert(*soc);
                0.0
            }
        };
        let key = SeriesKey::Pair {
            task: task.clone(),
            soc: *soc,
        };
        set.entry(key).or_insert_with(|| vec![0.0; window.len()])[ordinal] = ev * zv;
    }
    report.missing_employment = missing.len() as u64;
    if !keep_zeros {
        set.retain(|_, v| v.iter().any(|x| *x != 0.0));
    }
    (set, report)
}

/// ybar(p,q,t) — sum pair-level series over (task cluster family,
/// occupation family) groups.
pub fn aggregate_by_family(
    pairs: &SeriesSet,
    index: &TaxonomyIndex,
    window: MonthWindow,
) -> Result<SeriesSet> {
    aggregate(pairs, window, |task, soc| {
        let family = index
            .task_by_id(task)
            .ok_or_else(|| Error::Unresolvable {
                kind: "task",
                key: task.to_string(),
            })?
            .family
            .clone();
        let occ_family = index
            .occupation_family(soc)
            .ok_or_else(|| Error::Unresolvable {
                kind: "occupation",
                key: soc.to_string(),
            })?
            .to_string();
        Ok(SeriesKey::FamilyOcc { family, occ_family })
    })
}

/// ytilde(p,r,t) — sum pair-level series over (task cluster family,
/// wage tercile) groups.
pub fn aggregate_by_tercile(
    pairs: &SeriesSet,
    index: &TaxonomyIndex,
    window: MonthWindow,
) -> Result<SeriesSet> {
    aggregate(pairs, window, |task, soc| {
        let family = index
            .task_by_id(task)
            .ok_or_else(|| Error::Unresolvable {
                kind: "task",
                key: task.to_string(),
            })?
            .family
            .clone();
        let tercile = index.tercile(soc).ok_or_else(|| Error::Unresolvable {
            kind: "occupation tercile",
            key: soc.to_string(),
        })?;
        Ok(SeriesKey::FamilyTercile { family, tercile })
    })
}

fn aggregate<F>(pairs: &SeriesSet, window: MonthWindow, mut group: F) -> Result<SeriesSet>
where
    F: FnMut(&TaskId, &SocCode) -> Result<SeriesKey>,
{
    let mut out = SeriesSet::new();
    // BTreeMap iteration is sorted, so per-group addition order is fixed.
    for (key, values) in pairs {
        let SeriesKey::Pair { task, soc } = key else {
            continue;
        };
        let target = group(task, soc)?;
        let acc = out.entry(target).or_insert_with(|| vec![0.0; window.len()]);
        for (a, v) in acc.iter_mut().zip(values) {
            *a += v;
        }
    }
    out.retain(|_, v| v.iter().any(|x| *x != 0.0));
    Ok(out)
}

/// Occupation-task pair summary statistics.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairStats {
    /// Distinct occupations each task appears in, over the full window.
    pub occs_per_task: BTreeMap<TaskId, u64>,
    /// Distinct tasks each occupation mentions.
    pub tasks_per_occ: BTreeMap<SocCode, u64>,
    /// Distinct tasks per task cluster family.
    pub tasks_per_family: BTreeMap<String, u64>,
}

/// Count distinct task/occupation associations with any positive count.
pub fn pair_statistics(cube: &CountsCube, index: &TaxonomyIndex) -> PairStats {
    let mut task_occs: BTreeMap<TaskId, BTreeSet<SocCode>> = BTreeMap::new();
    let mut occ_tasks: BTreeMap<SocCode, BTreeSet<TaskId>> = BTreeMap::new();
    for ((task, soc, _), n) in &cube.n {
        if *n > 0 {
            task_occs.entry(task.clone()).or_default().insert(*soc);
            occ_tasks.entry(*soc).or_default().insert(task.clone());
        }
    }
    let mut family_tasks: BTreeMap<String, u64> = BTreeMap::new();
    for task in task_occs.keys() {
        if let Some(desc) = index.task_by_id(task) {
            *family_tasks.entry(desc.family.clone()).or_insert(0) += 1;
        }
    }
    PairStats {
        occs_per_task: task_occs
            .into_iter()
            .map(|(k, v)| (k, v.len() as u64))
            .collect(),
        tasks_per_occ: occ_tasks
            .into_iter()
            .map(|(k, v)| (k, v.len() as u64))
            .collect(),
        tasks_per_family: family_tasks,
    }
}

/// Check that both aggregations conserve mass per (family, month):
/// sum_q ybar(p,q,t) = sum_r ytilde(p,r,t) within `tol`.
pub fn check_mass_consistency(
    by_family: &SeriesSet,
    by_tercile: &SeriesSet,
    window: MonthWindow,
    tol: f64,
) -> Result<()> {
    let mut lhs: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (key, values) in by_family {
        if let SeriesKey::FamilyOcc { family, .. } = key {
            let acc = lhs
                .entry(family.as_str())
                .or_insert_with(|| vec![0.0; window.len()]);
            for (a, v) in acc.iter_mut().zip(values) {
                *a += v;
            }
        }
    }
    let mut rhs: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for (key, values) in by_tercile {
        if let SeriesKey::FamilyTercile { family, .. } = key {
            let acc = rhs
                .entry(family.as_str())
                .or_insert_with(|| vec![0.0; window.len()]);
            for (a, v) in acc.iter_mut().zip(values) {
                *a += v;
            }
        }
    }
    let zero = vec![0.0; window.len()];
    let families: BTreeSet<&str> = lhs.keys().chain(rhs.keys()).copied().collect();
    for family in families {
        let l = lhs.get(family).unwrap_or(&zero);
        let r = rhs.get(family).unwrap_or(&zero);
        for (i, (a, b)) in l.iter().zip(r).enumerate() {
            if (a - b).abs() > tol {
                return Err(Error::MassInconsistency {
                    family: family.to_string(),
                    month: window.at(i).to_string(),
                    lhs: *a,
                    rhs: *b,
                    tol,
                });
            }
        }
    }
    Ok(())
}
