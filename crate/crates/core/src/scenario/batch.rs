//! Running every scenario file of a directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::{seed_override, Scenario, ScenarioReport, Status};
use crate::error::Result;

#[derive(Clone, Debug)]
pub struct BatchRow {
    pub file: PathBuf,
    /// Scenario name, or the file stem when the file did not parse.
    pub name: String,
    pub status: Status,
    pub outcome: String,
    pub final_length: Option<f64>,
    pub wall_time: f64,
    /// Why the row failed before running, if it did.
    pub message: Option<String>,
}

#[derive(Clone, Debug, Default)]
pub struct BatchReport {
    /// One row per `*.json` file, in file-name order.
    pub rows: Vec<BatchRow>,
}

impl BatchReport {
    /// Worst exit code over the rows; `0` for an empty batch.
    pub fn exit_code(&self) -> i32 {
        self.rows
            .iter()
            .map(|r| r.status.exit_code())
            .max()
            .unwrap_or(0)
    }

    /// Tab-separated table: name, status, outcome, final length, wall time.
    pub fn table(&self) -> String {
        let mut out = String::from("name\tstatus\toutcome\tfinal_length\twall_time_s\n");
        for r in &self.rows {
            let len = r
                .final_length
                .map_or_else(|| "-".to_string(), |l| format!("{l:.9}"));
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{:.3}",
                r.name,
                r.status.label(),
                r.outcome,
                len,
                r.wall_time
            );
        }
        out
    }
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .map_or_else(String::new, |s| s.to_string_lossy().into_owned())
}

fn invalid_row(file: PathBuf, name: String, message: String) -> BatchRow {
    BatchRow {
        file,
        name,
        status: Status::Invalid,
        outcome: "Invalid".into(),
        final_length: None,
        wall_time: 0.0,
        message: Some(message),
    }
}

/// Runs every `*.json` scenario in `dir` on a pool of `jobs` threads and
/// writes per-scenario artifacts plus `batch.tsv` into `out`. Files that do
/// not parse, and scenarios whose name repeats, become `FAIL(parse)` rows.
pub fn run_batch(dir: &Path, jobs: usize, out: Option<&Path>) -> Result<BatchReport> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let seed = seed_override()?;

    let parsed: Vec<(PathBuf, std::result::Result<Scenario, String>)> = files
        .into_iter()
        .map(|f| {
            let s = std::fs::read_to_string(&f)
                .map_err(|e| e.to_string())
                .and_then(|t| serde_json::from_str(&t).map_err(|e| format!("malformed JSON: {e}")))
                .and_then(|v| Scenario::from_json(&v, seed).map_err(|e| e.to_string()));
            (f, s)
        })
        .collect();
    let mut seen = BTreeMap::new();
    for (_, s) in parsed.iter() {
        if let Ok(s) = s {
            *seen.entry(s.name.clone()).or_insert(0usize) += 1;
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    let rows = pool.install(|| {
        parsed
            .into_par_iter()
            .map(|(file, s)| match s {
                Err(msg) => invalid_row(file.clone(), stem(&file), msg),
                Ok(s) if seen[&s.name] > 1 => invalid_row(
                    file,
                    s.name.clone(),
                    format!("scenario name `{}` is not unique", s.name),
                ),
                Ok(s) => {
                    let started = Instant::now();
                    match s.run(out) {
                        Ok(ScenarioReport {
                            status,
                            outcome,
                            final_length,
                            wall_time,
                            ..
                        }) => BatchRow {
                            file,
                            name: s.name.clone(),
                            status,
                            outcome,
                            final_length,
                            wall_time,
                            message: None,
                        },
                        Err(e) => BatchRow {
                            wall_time: started.elapsed().as_secs_f64(),
                            ..invalid_row(file, s.name.clone(), e.to_string())
                        },
                    }
                }
            })
            .collect::<Vec<_>>()
    });
    let report = BatchReport { rows };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("batch.tsv"), report.table())?;
    }
    Ok(report)
}
