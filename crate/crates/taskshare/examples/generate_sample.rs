//! Regenerates the bundled synthetic sample dataset under `data/sample/`.
//!
//! Three task cluster families, six occupations spanning all wage terciles,
//! 96 months of postings. Fully deterministic for a given seed, so the
//! committed files can be reproduced with `cargo run --example
//! generate_sample`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use taskshare::time::MonthWindow;

const SEED: u64 = 42;

// (task, cluster, family)
const TASKS: &[(&str, &str, &str)] = &[
    ("Python", "Scripting Languages", "Information Technology"),
    ("Shell Scripting", "Scripting Languages", "Information Technology"),
    ("SQL", "SQL Databases and Programming", "Information Technology"),
    ("Database Design", "SQL Databases and Programming", "Information Technology"),
    ("Patient Care", "Patient Support", "Health Care"),
    ("Vital Signs Measurement", "Patient Support", "Health Care"),
    ("Medical Coding", "Health Information Management", "Health Care"),
    ("Clinical Documentation", "Health Information Management", "Health Care"),
    ("Scheduling", "Office Coordination", "Administration"),
    ("Data Entry", "Office Coordination", "Administration"),
    ("Filing", "Records Management", "Administration"),
    ("Record Keeping", "Records Management", "Administration"),
];

// (soc, family_name, base hourly wage, annual wage growth, base employment,
//  annual employment growth, task pool indices into TASKS)
#[allow(clippy::type_complexity)]
const OCCUPATIONS: &[(&str, &str, f64, f64, f64, f64, &[usize])] = &[
    ("15-1132", "Computer and Mathematical", 42.0, 1.2, 520_000.0, 18_000.0, &[0, 1, 2, 3, 8]),
    ("11-1021", "Management", 46.0, 1.0, 900_000.0, 5_000.0, &[2, 3, 8, 9, 10]),
    ("29-2061", "Healthcare Practitioners and Technical", 21.0, 0.6, 700_000.0, 9_000.0, &[4, 5, 6, 7]),
    ("43-4051", "Office and Administrative Support", 16.5, 0.4, 1_900_000.0, -12_000.0, &[8, 9, 10, 11, 6]),
    ("35-3021", "Food Preparation and Serving Related", 9.1, 0.25, 2_900_000.0, 30_000.0, &[8, 10]),
    ("39-9021", "Personal Care and Service", 10.2, 0.3, 1_300_000.0, 40_000.0, &[4, 5, 9, 11]),
];

fn main() {
    let out = Path::new("data/sample");
    fs::create_dir_all(out).expect("create data/sample");
    let window = MonthWindow::default_analysis();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    // Task taxonomy.
    let mut tasks_csv = String::from("task,cluster,family\n");
    for (task, cluster, family) in TASKS {
        writeln!(tasks_csv, "{task},{cluster},{family}").unwrap();
    }
    fs::write(out.join("tasks.csv"), tasks_csv).unwrap();

    // SOC family table.
    let mut soc_csv = String::from("soc,family_name\n");
    for (soc, family, ..) in OCCUPATIONS {
        writeln!(soc_csv, "{soc},{family}").unwrap();
    }
    fs::write(out.join("soc_families.csv"), soc_csv).unwrap();

    // Annual statistics 2010..2017 with linear drift.
    let mut annual_csv = String::from("soc,year,hourly_wage,employment\n");
    for (soc, _, wage0, wage_growth, emp0, emp_growth, _) in OCCUPATIONS {
        for offset in 0..8 {
            let year = 2010 + offset;
            let wage = wage0 + wage_growth * offset as f64;
            let employment = emp0 + emp_growth * offset as f64;
            writeln!(annual_csv, "{soc},{year},{wage},{employment}").unwrap();
        }
    }
    fs::write(out.join("annual_stats.csv"), annual_csv).unwrap();

    // Postings: a handful per occupation-month, each listing a random
    // subset of the occupation's task pool. A slow drift in the mention
    // probability gives the shares a trend to regress and forecast.
    let mut postings = String::new();
    let mut posting_seq = 0u64;
    for (i, month) in window.iter().enumerate() {
        let progress = i as f64 / (window.len() - 1) as f64;
        for (soc, _, _, _, _, _, pool) in OCCUPATIONS {
            let count = rng.gen_range(6..=10);
            for _ in 0..count {
                posting_seq += 1;
                let day = rng.gen_range(1..=28);
                let mut tasks: Vec<&str> = Vec::new();
                for (slot, &task_idx) in pool.iter().enumerate() {
                    // Earlier pool slots are core tasks; the last slot
                    // trends upward over the window.
                    let base = 0.75 - 0.12 * slot as f64;
                    let drift = if slot + 1 == pool.len() { 0.25 * progress } else { 0.0 };
                    if rng.gen_bool((base + drift).clamp(0.05, 0.95)) {
                        tasks.push(TASKS[task_idx].0);
                    }
                }
                let task_list = tasks
                    .iter()
                    .map(|t| format!("\"{t}\""))
                    .collect::<Vec<_>>()
                    .join(",");
                writeln!(
                    postings,
                    "{{\"posting_id\":\"p{posting_seq:06}\",\"date\":\"{month}-{day:02}\",\
                     \"soc\":\"{soc}\",\"tasks\":[{task_list}]}}"
                )
                .unwrap();
            }
        }
    }
    fs::write(out.join("postings.jsonl"), postings).unwrap();

    // Matching pipeline configuration.
    let config = "\
[paths]
taxonomy = \"data/sample/tasks.csv\"
soc_families = \"data/sample/soc_families.csv\"
postings = \"data/sample/postings.jsonl\"
annual_stats = \"data/sample/annual_stats.csv\"
out_dir = \"out/sample\"

[window]
start = \"2010-01\"
end = \"2017-12\"

smoothing_window = 3
train_months = 72
base_wage_year = 2010
seed = 42
";
    fs::write(out.join("config.toml"), config).unwrap();

    println!("wrote data/sample ({posting_seq} postings)");
}
