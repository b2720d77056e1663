//! Report emission and re-ingestion.
//!
//! All files are byte-stable for fixed inputs: record order is
//! deterministic, maps are sorted, and floats use the shortest
//! round-trippable decimal form, so a results CSV read back with
//! [`read_results_csv`] reproduces the exact in-memory values.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::metrics::Notion;

use super::{
    AccuracyRecord, BoxStats, ExperimentRun, FailureRecord, GapRecord, HarnessError, Result,
    ResultsTable, Scope,
};

pub const RESULTS_CSV_HEADER: [&str; 8] = [
    "split",
    "model",
    "mitigation",
    "scope",
    "group",
    "notion",
    "value",
    "defined",
];

/// Format of the long-form results file; box statistics and the manifest
/// are always JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Paths written by [`emit_report`].
#[derive(Debug, Clone)]
pub struct ReportPaths {
    pub results: PathBuf,
    pub boxstats: PathBuf,
    pub manifest: PathBuf,
}

#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    version: &'static str,
    quartile_convention: &'static str,
    #[serde(flatten)]
    run: &'a ExperimentRun,
}

fn fmt_value(v: f64) -> String {
    format!("{v}")
}

/// Writes the long-form results CSV with the fixed header
/// `split,model,mitigation,scope,group,notion,value,defined`.
pub fn write_results_csv(results: &ResultsTable, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RESULTS_CSV_HEADER)?;
    for r in &results.gaps {
        w.write_record([
            r.split.to_string(),
            r.model.clone(),
            r.mitigation.clone(),
            r.scope.token().into(),
            r.group.clone(),
            r.notion.token().into(),
            r.value.map(fmt_value).unwrap_or_default(),
            r.value.is_some().to_string(),
        ])?;
    }
    for r in &results.accuracies {
        w.write_record([
            r.split.to_string(),
            r.model.clone(),
            r.mitigation.clone(),
            "overall".into(),
            "all".into(),
            "accuracy".into(),
            fmt_value(r.accuracy),
            "true".into(),
        ])?;
    }
    for r in &results.failures {
        w.write_record([
            r.split.to_string(),
            r.model.clone(),
            r.mitigation.clone(),
            "overall".into(),
            "all".into(),
            "error".into(),
            String::new(),
            "false".into(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes box statistics as a sorted JSON map.
pub fn write_boxstats(stats: &BTreeMap<String, BoxStats>, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(stats).expect("stats serialize");
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Writes the results file, per-cell box statistics, and the run manifest
/// into `out_dir`. Returns the written paths.
pub fn emit_report(
    run: &ExperimentRun,
    stats: &BTreeMap<String, BoxStats>,
    format: ReportFormat,
    out_dir: &Path,
) -> Result<ReportPaths> {
    fs::create_dir_all(out_dir)?;
    let results = match format {
        ReportFormat::Csv => {
            let path = out_dir.join("results.csv");
            write_results_csv(&run.results, &path)?;
            path
        }
        ReportFormat::Json => {
            let path = out_dir.join("results.json");
            let text = serde_json::to_string_pretty(&run.results).expect("results serialize");
            fs::write(&path, text + "\n")?;
            path
        }
    };
    let boxstats = out_dir.join("boxstats.json");
    write_boxstats(stats, &boxstats)?;

    let manifest_path = out_dir.join("manifest.json");
    let manifest = RunManifest {
        tool: "fairlens",
        version: env!("CARGO_PKG_VERSION"),
        quartile_convention: "type-7 linear interpolation of order statistics",
        run,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialize");
    fs::write(&manifest_path, text + "\n")?;

    Ok(ReportPaths {
        results,
        boxstats,
        manifest: manifest_path,
    })
}

/// Reads a long-form results CSV produced by [`emit_report`] back into a
/// [`ResultsTable`]. Values round-trip exactly.
pub fn read_results_csv(path: &Path) -> Result<ResultsTable> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if headers != RESULTS_CSV_HEADER {
        return Err(HarnessError::MalformedResults {
            row: 0,
            reason: format!("unexpected header {headers:?}"),
        });
    }
    let mut results = ResultsTable::default();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = idx + 1;
        let bad = |reason: String| HarnessError::MalformedResults { row, reason };
        let field = |i: usize| record.get(i).unwrap_or("").to_string();
        let split: u32 = field(0)
            .parse()
            .map_err(|_| bad(format!("bad split `{}`", field(0))))?;
        let model = field(1);
        let mitigation = field(2);
        let scope = match field(3).as_str() {
            "subgroup" => Scope::Subgroup,
            "aggregate" => Scope::Aggregate,
            "overall" => Scope::Overall,
            other => return Err(bad(format!("bad scope `{other}`"))),
        };
        let group = field(4);
        let notion = field(5);
        let defined = match field(7).as_str() {
            "true" => true,
            "false" => false,
            other => return Err(bad(format!("bad defined flag `{other}`"))),
        };
        let value: Option<f64> = if defined {
            Some(
                field(6)
                    .parse()
                    .map_err(|_| bad(format!("bad value `{}`", field(6))))?,
            )
        } else {
            None
        };
        match notion.as_str() {
            "accuracy" => results.accuracies.push(AccuracyRecord {
                split,
                model,
                mitigation,
                accuracy: value.ok_or_else(|| bad("accuracy row without value".into()))?,
            }),
            "error" => results.failures.push(FailureRecord {
                split,
                model,
                mitigation,
                error: String::new(),
            }),
            token => {
                let notion: Notion = token
                    .parse()
                    .map_err(|e: String| bad(e))?;
                results.gaps.push(GapRecord {
                    split,
                    model,
                    mitigation,
                    scope,
                    group,
                    notion,
                    value,
                });
            }
        }
    }
    Ok(results)
}
