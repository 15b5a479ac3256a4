//! Occupational and task classification hierarchies.
//!
//! Tasks nest in clusters which nest in task cluster families; occupations
//! are 6-digit SOC codes whose 2-digit prefix names the occupation family.
//! Occupations are additionally binned into wage terciles from base-year
//! average hourly wages. The [`TaxonomyIndex`] is immutable after
//! construction and safe to share across worker threads.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// SOC 2010 major groups and their occupation family names.
const MAJOR_GROUPS: &[(u8, &str)] = &[
    (11, "Management"),
    (13, "Business and Financial Operations"),
    (15, "Computer and Mathematical"),
    (17, "Architecture and Engineering"),
    (19, "Life, Physical, and Social Science"),
    (21, "Community and Social Service"),
    (23, "Legal"),
    (25, "Education, Training, and Library"),
    (27, "Arts, Design, Entertainment, Sports, and Media"),
    (29, "Healthcare Practitioners and Technical"),
    (31, "Healthcare Support"),
    (33, "Protective Service"),
    (35, "Food Preparation and Serving Related"),
    (37, "Building and Grounds Cleaning and Maintenance"),
    (39, "Personal Care and Service"),
    (41, "Sales and Related"),
    (43, "Office and Administrative Support"),
    (45, "Farming, Fishing, and Forestry"),
    (47, "Construction and Extraction"),
    (49, "Installation, Maintenance, and Repair"),
    (51, "Production"),
    (53, "Transportation and Material Moving"),
    (55, "Military Specific"),
];

/// A 6-digit Standard Occupational Classification code, canonical form
/// `NN-NNNN`. The 2-digit major group identifies the occupation family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SocCode {
    major: u8,
    detail: u16,
}

impl SocCode {
    pub fn new(major: u8, detail: u16) -> Result<Self> {
        if detail > 9999 {
            return Err(Error::MalformedSoc(format!("{major}-{detail}")));
        }
        if !MAJOR_GROUPS.iter().any(|(g, _)| *g == major) {
            return Err(Error::UnknownMajorGroup(format!("{major:02}")));
        }
        Ok(SocCode { major, detail })
    }

    pub fn major(&self) -> u8 {
        self.major
    }

    pub fn detail(&self) -> u16 {
        self.detail
    }

    /// Occupation family name derived from the major group.
    pub fn family(&self) -> &'static str {
        MAJOR_GROUPS
            .iter()
            .find(|(g, _)| *g == self.major)
            .map(|(_, name)| *name)
            .expect("constructor validated major group")
    }
}

impl fmt::Display for SocCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}-{:04}", self.major, self.detail)
    }
}

impl FromStr for SocCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let malformed = || Error::MalformedSoc(s.to_string());
        let (major, detail) = s.split_once('-').ok_or_else(malformed)?;
        if major.len() != 2
            || detail.len() != 4
            || !major.bytes().all(|b| b.is_ascii_digit())
            || !detail.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(malformed());
        }
        SocCode::new(major.parse().unwrap(), detail.parse().unwrap())
    }
}

impl TryFrom<String> for SocCode {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SocCode> for String {
    fn from(s: SocCode) -> String {
        s.to_string()
    }
}

/// Parse a SOC code string into canonical form.
pub fn parse_soc(text: &str) -> Result<SocCode> {
    text.parse()
}

/// Canonical task identifier: trimmed, internal whitespace collapsed,
/// lowercased. Raw names are retained on [`TaskDescriptor`] for display.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaskId(String);

impl TaskId {
    pub fn from_name(name: &str) -> Self {
        TaskId(canonicalize(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Trim, collapse internal whitespace, lowercase.
pub fn canonicalize(name: &str) -> String {
    name.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// A task with its position in the task -> cluster -> family hierarchy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskDescriptor {
    pub task_id: TaskId,
    /// Display name as it appeared in the taxonomy file.
    pub name: String,
    pub cluster: String,
    pub family: String,
}

/// Wage tercile from base-year average hourly wage.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum WageTercile {
    Low,
    Mid,
    High,
}

impl WageTercile {
    pub const ALL: [WageTercile; 3] = [WageTercile::Low, WageTercile::Mid, WageTercile::High];

    pub fn label(self) -> &'static str {
        match self {
            WageTercile::Low => "low",
            WageTercile::Mid => "mid",
            WageTercile::High => "high",
        }
    }
}

impl fmt::Display for WageTercile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for WageTercile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(WageTercile::Low),
            "mid" => Ok(WageTercile::Mid),
            "high" => Ok(WageTercile::High),
            other => Err(Error::InvalidConfig(format!("unknown tercile '{other}'"))),
        }
    }
}

/// Immutable index over tasks, occupations, and wage terciles.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TaxonomyIndex {
    tasks: BTreeMap<TaskId, TaskDescriptor>,
    occupations: BTreeMap<SocCode, String>,
    terciles: BTreeMap<SocCode, WageTercile>,
}

impl TaxonomyIndex {
    pub fn task(&self, name: &str) -> Option<&TaskDescriptor> {
        self.tasks.get(&TaskId::from_name(name))
    }

    pub fn task_by_id(&self, id: &TaskId) -> Option<&TaskDescriptor> {
        self.tasks.get(id)
    }

    /// Occupation family for a SOC, from the loaded table or the major group.
    pub fn occupation_family(&self, soc: &SocCode) -> Option<&str> {
        self.occupations
            .get(soc)
            .map(String::as_str)
            .or_else(|| Some(soc.family()))
    }

    pub fn tercile(&self, soc: &SocCode) -> Option<WageTercile> {
        self.terciles.get(soc).copied()
    }

    pub fn tasks(&self) -> impl Iterator<Item = &TaskDescriptor> {
        self.tasks.values()
    }

    pub fn families(&self) -> Vec<&str> {
        let mut fams: Vec<&str> = self.tasks.values().map(|t| t.family.as_str()).collect();
        fams.sort_unstable();
        fams.dedup();
        fams
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn set_terciles(&mut self, terciles: BTreeMap<SocCode, WageTercile>) {
        self.terciles = terciles;
    }
}

/// Load the task taxonomy (`task,cluster,family`) and SOC family table
/// (`soc,family_name`) into an index. Duplicate task rows are tolerated when
/// they agree; conflicting cluster assignments are an error.
pub fn load_taxonomy<R1: Read, R2: Read>(task_file: R1, soc_file: R2) -> Result<TaxonomyIndex> {
    let mut index = TaxonomyIndex::default();

    let mut rdr = csv::Reader::from_reader(task_file);
    require_columns(&mut rdr, &["task", "cluster", "family"], "task taxonomy")?;
    let mut rows = 0usize;
    for record in rdr.deserialize() {
        let row: TaskRow = record?;
        rows += 1;
        let id = TaskId::from_name(&row.task);
        if let Some(existing) = index.tasks.get(&id) {
            if existing.cluster != row.cluster {
                return Err(Error::DuplicateConflict {
                    task: row.task,
                    first: existing.cluster.clone(),
                    second: row.cluster,
                });
            }
            continue;
        }
        index.tasks.insert(
            id.clone(),
            TaskDescriptor {
                task_id: id,
                name: row.task.trim().to_string(),
                cluster: row.cluster,
                family: row.family,
            },
        );
    }
    if rows == 0 {
        return Err(Error::EmptyInput("task taxonomy".into()));
    }

    let mut rdr = csv::Reader::from_reader(soc_file);
    require_columns(&mut rdr, &["soc", "family_name"], "SOC family table")?;
    for record in rdr.deserialize() {
        let row: SocRow = record?;
        let soc: SocCode = row.soc.parse()?;
        index.occupations.insert(soc, row.family_name);
    }

    Ok(index)
}

#[derive(Deserialize)]
struct TaskRow {
    task: String,
    cluster: String,
    family: String,
}

#[derive(Deserialize)]
struct SocRow {
    soc: String,
    family_name: String,
}

#[derive(Deserialize)]
struct WageRow {
    soc: String,
    #[allow(dead_code)]
    year: i32,
    hourly_wage: f64,
}

fn require_columns<R: Read>(
    rdr: &mut csv::Reader<R>,
    columns: &[&str],
    what: &str,
) -> Result<()> {
    let headers = rdr
        .headers()
        .map_err(|_| Error::EmptyInput(what.to_string()))?;
    for col in columns {
        if !headers.iter().any(|h| h == *col) {
            return Err(Error::MissingColumn {
                column: col.to_string(),
                what: what.to_string(),
            });
        }
    }
    Ok(())
}

/// Read the wage base file (`soc,year,hourly_wage`) into a map for
/// [`assign_terciles`]. When multiple years are present the base year's rows
/// are selected; otherwise all rows must share one year.
pub fn load_wage_base<R: Read>(source: R, base_year: i32) -> Result<BTreeMap<SocCode, f64>> {
    let mut rdr = csv::Reader::from_reader(source);
    require_columns(&mut rdr, &["soc", "year", "hourly_wage"], "wage base file")?;
    let mut wages = BTreeMap::new();
    for record in rdr.deserialize() {
        let row: WageRow = record?;
        if row.year != base_year {
            continue;
        }
        let soc: SocCode = row.soc.parse()?;
        wages.insert(soc, row.hourly_wage);
    }
    if wages.is_empty() {
        return Err(Error::EmptyInput(format!(
            "wage base file has no rows for year {base_year}"
        )));
    }
    Ok(wages)
}

/// Assign equal-count wage terciles from base-year hourly wages.
///
/// Occupations sort ascending by wage (ties broken by canonical SOC string
/// order) and split into three bins; when the count is not divisible by 3
/// the remainder occupations go to the lower bins first.
pub fn assign_terciles(wages: &BTreeMap<SocCode, f64>) -> Result<BTreeMap<SocCode, WageTercile>> {
    if wages.is_empty() {
        return Err(Error::EmptyInput("wage table".into()));
    }
    for (soc, w) in wages {
        if !w.is_finite() || *w <= 0.0 {
            return Err(Error::InvalidWage {
                soc: soc.to_string(),
                value: *w,
            });
        }
    }
    let mut order: Vec<(&SocCode, f64)> = wages.iter().map(|(s, w)| (s, *w)).collect();
    order.sort_by(|a, b| {
        a.1.partial_cmp(&b.1)
            .unwrap()
            .then_with(|| a.0.to_string().cmp(&b.0.to_string()))
    });

    let n = order.len();
    let base = n / 3;
    let rem = n % 3;
    let low_size = base + usize::from(rem > 0);
    let mid_size = base + usize::from(rem > 1);

    let mut out = BTreeMap::new();
    for (rank, (soc, _)) in order.into_iter().enumerate() {
        let tercile = if rank < low_size {
            WageTercile::Low
        } else if rank < low_size + mid_size {
            WageTercile::Mid
        } else {
            WageTercile::High
        };
        out.insert(*soc, tercile);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn soc(s: &str) -> SocCode {
        s.parse().unwrap()
    }

    #[test]
    fn parse_soc_canonical() {
        let code = parse_soc("15-1132").unwrap();
        assert_eq!(code.major(), 15);
        assert_eq!(code.detail(), 1132);
        assert_eq!(code.family(), "Computer and Mathematical");
        assert_eq!(code.to_string(), "15-1132");

        let mgr = parse_soc("11-9199").unwrap();
        assert_eq!(mgr.family(), "Management");
    }

    #[test]
    fn parse_soc_rejects_malformed() {
        assert!(matches!(parse_soc("1-234"), Err(Error::MalformedSoc(_))));
        assert!(matches!(parse_soc("15-113a"), Err(Error::MalformedSoc(_))));
        assert!(matches!(parse_soc("151132"), Err(Error::MalformedSoc(_))));
        assert!(matches!(parse_soc(""), Err(Error::MalformedSoc(_))));
        assert!(matches!(
            parse_soc("99-1234"),
            Err(Error::UnknownMajorGroup(_))
        ));
    }

    #[test]
    fn load_taxonomy_resolves_task_to_family() {
        let tasks = "task,cluster,family\nPython,Scripting Languages,Information Technology\n";
        let socs = "soc,family_name\n15-1132,Computer and Mathematical\n";
        let index = load_taxonomy(tasks.as_bytes(), socs.as_bytes()).unwrap();
        let t = index.task("python").unwrap();
        assert_eq!(t.family, "Information Technology");
        assert_eq!(t.cluster, "Scripting Languages");
        // Case-insensitive after canonicalization.
        assert!(index.task("  PYTHON ").is_some());
        assert_eq!(index.num_tasks(), 1);
    }

    #[test]
    fn load_taxonomy_duplicate_conflict() {
        let tasks = "task,cluster,family\nPython,Scripting Languages,IT\nPython,Databases,IT\n";
        let socs = "soc,family_name\n";
        let err = load_taxonomy(tasks.as_bytes(), socs.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::DuplicateConflict { .. }));
    }

    #[test]
    fn load_taxonomy_agreeing_duplicate_ok() {
        let tasks = "task,cluster,family\nPython,Scripting Languages,IT\npython ,Scripting Languages,IT\n";
        let socs = "soc,family_name\n";
        let index = load_taxonomy(tasks.as_bytes(), socs.as_bytes()).unwrap();
        assert_eq!(index.num_tasks(), 1);
    }

    #[test]
    fn load_taxonomy_missing_column() {
        let tasks = "task,group\nPython,IT\n";
        let socs = "soc,family_name\n";
        let err = load_taxonomy(tasks.as_bytes(), socs.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::MissingColumn { .. }));
    }

    #[test]
    fn load_taxonomy_empty_file() {
        let tasks = "task,cluster,family\n";
        let socs = "soc,family_name\n";
        let err = load_taxonomy(tasks.as_bytes(), socs.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::EmptyInput(_)));
    }

    #[test]
    fn terciles_one_per_bin() {
        let wages = BTreeMap::from([
            (soc("11-1011"), 10.0),
            (soc("13-1011"), 20.0),
            (soc("15-1011"), 30.0),
        ]);
        let t = assign_terciles(&wages).unwrap();
        assert_eq!(t[&soc("11-1011")], WageTercile::Low);
        assert_eq!(t[&soc("13-1011")], WageTercile::Mid);
        assert_eq!(t[&soc("15-1011")], WageTercile::High);
    }

    #[test]
    fn terciles_tie_broken_by_code() {
        let wages = BTreeMap::from([
            (soc("11-1011"), 10.0),
            (soc("13-1011"), 10.0),
            (soc("15-1011"), 30.0),
        ]);
        let t = assign_terciles(&wages).unwrap();
        assert_eq!(t[&soc("11-1011")], WageTercile::Low);
        assert_eq!(t[&soc("13-1011")], WageTercile::Mid);
        assert_eq!(t[&soc("15-1011")], WageTercile::High);
    }

    #[test]
    fn terciles_964_occupations_split_322_321_321() {
        // Remainder rule applied to the full occupation count.
        let mut wages = BTreeMap::new();
        let mut i = 0u32;
        'outer: for (major, _) in MAJOR_GROUPS {
            for detail in 0..60u16 {
                if i == 964 {
                    break 'outer;
                }
                wages.insert(
                    SocCode::new(*major, 1000 + detail).unwrap(),
                    1.0 + i as f64,
                );
                i += 1;
            }
        }
        assert_eq!(wages.len(), 964);
        let t = assign_terciles(&wages).unwrap();
        let count = |tc| t.values().filter(|v| **v == tc).count();
        assert_eq!(count(WageTercile::Low), 322);
        assert_eq!(count(WageTercile::Mid), 321);
        assert_eq!(count(WageTercile::High), 321);
    }

    #[test]
    fn terciles_reject_bad_wages() {
        let wages = BTreeMap::from([(soc("11-1011"), -1.0)]);
        assert!(matches!(
            assign_terciles(&wages),
            Err(Error::InvalidWage { .. })
        ));
        let wages = BTreeMap::from([(soc("11-1011"), f64::NAN)]);
        assert!(assign_terciles(&wages).is_err());
    }

    proptest! {
        #[test]
        fn terciles_partition_and_are_monotone(
            raw in proptest::collection::btree_map(0u16..5000, 0.01f64..1000.0, 1..80)
        ) {
            let wages: BTreeMap<SocCode, f64> = raw
                .into_iter()
                .map(|(d, w)| (SocCode::new(11, d % 10000).unwrap(), w))
                .collect();
            let t = assign_terciles(&wages).unwrap();
            // Partition: total function over the wage table.
            prop_assert_eq!(t.len(), wages.len());
            let max_low = wages.iter()
                .filter(|(s, _)| t[s] == WageTercile::Low)
                .map(|(_, w)| *w)
                .fold(f64::NEG_INFINITY, f64::max);
            let min_mid = wages.iter()
                .filter(|(s, _)| t[s] == WageTercile::Mid)
                .map(|(_, w)| *w)
                .fold(f64::INFINITY, f64::min);
            let max_mid = wages.iter()
                .filter(|(s, _)| t[s] == WageTercile::Mid)
                .map(|(_, w)| *w)
                .fold(f64::NEG_INFINITY, f64::max);
            let min_high = wages.iter()
                .filter(|(s, _)| t[s] == WageTercile::High)
                .map(|(_, w)| *w)
                .fold(f64::INFINITY, f64::min);
            prop_assert!(max_low <= min_mid || min_mid == f64::INFINITY);
            prop_assert!(max_mid <= min_high || min_high == f64::INFINITY);
        }

        #[test]
        fn terciles_invariant_under_positive_scaling(
            raw in proptest::collection::btree_map(0u16..5000, 0.01f64..1000.0, 3..40),
            scale in 0.001f64..1000.0,
        ) {
            let wages: BTreeMap<SocCode, f64> = raw
                .into_iter()
                .map(|(d, w)| (SocCode::new(13, d % 10000).unwrap(), w))
                .collect();
            let scaled: BTreeMap<SocCode, f64> =
                wages.iter().map(|(s, w)| (*s, w * scale)).collect();
            prop_assert_eq!(
                assign_terciles(&wages).unwrap(),
                assign_terciles(&scaled).unwrap()
            );
        }

        #[test]
        fn soc_parse_display_identity(major_idx in 0usize..23, detail in 0u16..10000) {
            let code = SocCode::new(MAJOR_GROUPS[major_idx].0, detail).unwrap();
            prop_assert_eq!(parse_soc(&code.to_string()).unwrap(), code);
        }

        #[test]
        fn soc_parse_never_panics(s in "\\PC*") {
            let _ = parse_soc(&s);
        }
    }
}
