//! Command-line entry point for the fairlens toolkit.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
//! invalid input files), 3 runtime failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use fairlens::dataset::{load_csv, synth_spec_from_json_file, Dataset, Schema, SynthSpec};
use fairlens::harness::{
    boxplot_stats, emit_report, read_results_csv, run_experiment, write_boxstats, write_results_csv,
    ExperimentConfig, ReportFormat, ResultsTable, Scope,
};
use fairlens::metrics::{self, Focal, GapValue, Notion};
use fairlens::mitigation::BinaryGroupMap;
use fairlens::models::{cross_validate, default_grid, fit, ModelKind};

#[derive(Parser)]
#[command(
    name = "fairlens",
    version,
    about = "Fairness auditing and bias mitigation for binary classifiers"
)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a calibrated synthetic dataset as CSV plus schema manifest.
    Synth {
        /// `table1` for the built-in five-group preset, or a path to a
        /// synthesis spec JSON.
        #[arg(long, default_value = "table1")]
        spec: String,
        /// Number of rows to generate.
        #[arg(long)]
        n: usize,
        /// Overrides the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Schema manifest path (default: `<out>.schema.json`).
        #[arg(long)]
        schema_out: Option<PathBuf>,
    },
    /// Print the per-group outcome distribution of a dataset.
    Summarize {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
    },
    /// Train one baseline model on a single split and report its gaps.
    Audit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// Model kind: DT, RF, LR, or SVM.
        #[arg(long, default_value = "RF")]
        model: String,
        #[arg(long, default_value_t = 0.8)]
        ratio: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Select hyperparameters by 5-fold grid search instead of the
        /// first default-grid entry.
        #[arg(long)]
        cv: bool,
        /// Privileged groups for the aggregate audit.
        #[arg(long, value_delimiter = ',', default_value = "White,Asian")]
        privileged: Vec<String>,
        /// Write gaps CSV, fitted model JSON, and manifest here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full repeated-split experiment described by a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's number of splits.
        #[arg(long)]
        n_splits: Option<u32>,
        /// Long-form results format.
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Recompute box statistics from a previously written results CSV.
    Report {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

enum CliError {
    Usage(String),
    Data(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Runtime(m) => m,
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn data_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Data(e.to_string())
}

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    #[cfg(feature = "parallel")]
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: --jobs: {e}");
            std::process::exit(1);
        }
    }
    #[cfg(not(feature = "parallel"))]
    if cli.jobs.is_some() {
        eprintln!("warning: built without the `parallel` feature; --jobs ignored");
    }

    match run(cli.command) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {}", e.message());
            std::process::exit(e.code());
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Synth {
            spec,
            n,
            seed,
            out,
            schema_out,
        } => cmd_synth(&spec, n, seed, &out, schema_out.as_deref()),
        Command::Summarize { data, schema } => cmd_summarize(&data, &schema),
        Command::Audit {
            data,
            schema,
            model,
            ratio,
            seed,
            cv,
            privileged,
            out,
        } => cmd_audit(&data, &schema, &model, ratio, seed, cv, privileged, out.as_deref()),
        Command::Experiment {
            config,
            out,
            seed,
            n_splits,
            format,
        } => cmd_experiment(&config, &out, seed, n_splits, format),
        Command::Report { results, out } => cmd_report(&results, &out),
    }
}

#[derive(Serialize)]
struct SynthManifest<'a> {
    command: &'static str,
    version: &'static str,
    spec: &'a SynthSpec,
    n: usize,
    data: &'a Path,
    schema: &'a Path,
}

fn cmd_synth(
    spec_arg: &str,
    n: usize,
    seed: Option<u64>,
    out: &Path,
    schema_out: Option<&Path>,
) -> Result<(), CliError> {
    let mut spec = if spec_arg == "table1" {
        SynthSpec::table1()
    } else {
        synth_spec_from_json_file(spec_arg).map_err(data_err)?
    };
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let dataset = spec.generate(n).map_err(data_err)?;
    dataset.write_csv(out).map_err(runtime)?;
    let schema_path = schema_out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| out.with_extension("schema.json"));
    dataset.schema().to_json_file(&schema_path).map_err(runtime)?;

    let manifest = SynthManifest {
        command: "synth",
        version: env!("CARGO_PKG_VERSION"),
        spec: &spec,
        n,
        data: out,
        schema: &schema_path,
    };
    let manifest_path = out.with_extension("manifest.json");
    fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n",
    )
    .map_err(runtime)?;

    println!(
        "wrote {} rows to {} (schema {}, manifest {})",
        dataset.n_rows(),
        out.display(),
        schema_path.display(),
        manifest_path.display()
    );
    Ok(())
}

fn load_dataset(data: &Path, schema: &Path) -> Result<Dataset, CliError> {
    let schema = Schema::from_json_file(schema).map_err(data_err)?;
    let raw = load_csv(data, &schema).map_err(data_err)?;
    let clean = raw.drop_missing().map_err(data_err)?;
    clean.one_hot_encode().map_err(data_err)
}

fn cmd_summarize(data: &Path, schema: &Path) -> Result<(), CliError> {
    let dataset = load_dataset(data, schema)?;
    let table = dataset.summarize().map_err(data_err)?;
    print!("{table}");
    Ok(())
}

fn format_gap(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:+.4}"),
        None => "undef".into(),
    }
}

fn gap_table(rows: &[(Scope, String, Vec<GapValue>)]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:<28} {:>8} {:>8} {:>8} {:>8}",
        "scope", "group", "SP", "EOpp", "PE", "EOdds"
    );
    for (scope, group, gaps) in rows {
        let by_notion = |n: Notion| {
            gaps.iter()
                .find(|g| g.notion == n)
                .map(|g| format_gap(g.value))
                .unwrap_or_else(|| "-".into())
        };
        let _ = writeln!(
            out,
            "{:<10} {:<28} {:>8} {:>8} {:>8} {:>8}",
            scope.token(),
            group,
            by_notion(Notion::StatisticalParity),
            by_notion(Notion::EqualOpportunity),
            by_notion(Notion::PredictiveEquality),
            by_notion(Notion::EqualizedOdds),
        );
    }
    out
}

#[derive(Serialize)]
struct AuditManifest<'a> {
    command: &'static str,
    version: &'static str,
    data: &'a Path,
    schema: &'a Path,
    model: &'a str,
    ratio: f64,
    seed: u64,
    cv: bool,
    privileged: &'a [String],
    accuracy: f64,
    chosen_hyperparams: &'a fairlens::models::Hyperparams,
}

#[allow(clippy::too_many_arguments)]
fn cmd_audit(
    data: &Path,
    schema: &Path,
    model: &str,
    ratio: f64,
    seed: u64,
    cv: bool,
    privileged: Vec<String>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let kind: ModelKind = model.parse().map_err(usage)?;
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(CliError::Usage(format!("--ratio {ratio} outside (0, 1)")));
    }
    let dataset = load_dataset(data, schema)?;
    let pair = dataset.stratified_split(ratio, seed).map_err(data_err)?;

    let grid = default_grid(kind);
    let hp = if cv {
        cross_validate(kind, &grid, &pair.train, 5, seed).map_err(runtime)?
    } else {
        grid[0].clone()
    };
    let fitted = fit(kind, &hp, &pair.train, seed).map_err(runtime)?;
    let pred = fitted.predict_all(&pair.test).map_err(runtime)?;

    let y_true = pair.test.outcome();
    let group = pair.test.group();
    let accuracy = metrics::accuracy(y_true, &pred).map_err(runtime)?;
    let subgroup = metrics::subgroup_audit(y_true, &pred, group).map_err(runtime)?;
    let map = BinaryGroupMap::new(privileged.clone());
    let codes = map.privileged_codes(&pair.test).map_err(data_err)?;
    let aggregate = metrics::aggregate_audit(y_true, &pred, group, &codes).map_err(runtime)?;

    let mut rows: Vec<(Scope, String, Vec<GapValue>)> = Vec::new();
    for gap in subgroup {
        let name = match gap.focal {
            Focal::Group(code) => pair.test.group_names()[usize::from(code)].clone(),
            Focal::Privileged => "privileged".into(),
        };
        match rows.iter_mut().find(|(s, g, _)| *s == Scope::Subgroup && g == &name) {
            Some((_, _, gaps)) => gaps.push(gap),
            None => rows.push((Scope::Subgroup, name, vec![gap])),
        }
    }
    rows.push((Scope::Aggregate, "privileged".into(), aggregate.clone()));

    println!(
        "model {} seed {seed} ratio {ratio}: test accuracy {accuracy:.4}",
        kind.token()
    );
    print!("{}", gap_table(&rows));

    if let Some(out_dir) = out {
        fs::create_dir_all(out_dir).map_err(runtime)?;
        let mut results = ResultsTable::default();
        for (scope, group_name, gaps) in &rows {
            for gap in gaps {
                results.gaps.push(fairlens::harness::GapRecord {
                    split: 0,
                    model: kind.token().into(),
                    mitigation: "Baseline".into(),
                    scope: *scope,
                    group: group_name.clone(),
                    notion: gap.notion,
                    value: gap.value,
                });
            }
        }
        results.accuracies.push(fairlens::harness::AccuracyRecord {
            split: 0,
            model: kind.token().into(),
            mitigation: "Baseline".into(),
            accuracy,
        });
        write_results_csv(&results, &out_dir.join("results.csv")).map_err(runtime)?;
        fs::write(out_dir.join("model.json"), fitted.to_json() + "\n").map_err(runtime)?;
        let manifest = AuditManifest {
            command: "audit",
            version: env!("CARGO_PKG_VERSION"),
            data,
            schema,
            model: kind.token(),
            ratio,
            seed,
            cv,
            privileged: &privileged,
            accuracy,
            chosen_hyperparams: &hp,
        };
        fs::write(
            out_dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n",
        )
        .map_err(runtime)?;
        println!("wrote results.csv, model.json, manifest.json to {}", out_dir.display());
    }
    Ok(())
}

/// On-disk experiment description: the harness config plus a data source.
#[derive(Debug, Serialize, Deserialize)]
struct ExperimentFile {
    data: DataSource,
    #[serde(flatten)]
    config: ExperimentConfig,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum DataSource {
    File { csv: PathBuf, schema: PathBuf },
    Synth { synth: SynthSpec, n: usize },
}

fn cmd_experiment(
    config_path: &Path,
    out: &Path,
    seed: Option<u64>,
    n_splits: Option<u32>,
    format: OutputFormat,
) -> Result<(), CliError> {
    let text = fs::read_to_string(config_path).map_err(data_err)?;
    let mut file: ExperimentFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("config parse error: {e}")))?;
    if let Some(seed) = seed {
        file.config.base_seed = seed;
    }
    if let Some(n) = n_splits {
        file.config.n_splits = n;
    }

    let dataset = match &file.data {
        DataSource::File { csv, schema } => load_dataset(csv, schema)?,
        DataSource::Synth { synth, n } => synth.generate(*n).map_err(data_err)?,
    };

    let run = run_experiment(&file.config, &dataset).map_err(data_err)?;
    let stats = boxplot_stats(&run.results).map_err(runtime)?;
    let report_format = match format {
        OutputFormat::Csv => ReportFormat::Csv,
        OutputFormat::Json => ReportFormat::Json,
    };
    let paths = emit_report(&run, &stats, report_format, out).map_err(runtime)?;
    // resolved config echo, so a run can be reproduced from its output alone
    fs::write(
        out.join("run_config.json"),
        serde_json::to_string_pretty(&file).expect("config serializes") + "\n",
    )
    .map_err(runtime)?;

    println!(
        "experiment complete: {} gap records, {} accuracy records, {} failures",
        run.results.gaps.len(),
        run.results.accuracies.len(),
        run.results.failures.len()
    );
    println!(
        "wrote {}, {}, {}, run_config.json",
        paths.results.display(),
        paths.boxstats.display(),
        paths.manifest.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct ReportManifest<'a> {
    command: &'static str,
    version: &'static str,
    results: &'a Path,
    quartile_convention: &'static str,
}

fn cmd_report(results_path: &Path, out: &Path) -> Result<(), CliError> {
    let results = read_results_csv(results_path).map_err(data_err)?;
    let stats = boxplot_stats(&results).map_err(data_err)?;
    fs::create_dir_all(out).map_err(runtime)?;
    write_boxstats(&stats, &out.join("boxstats.json")).map_err(runtime)?;
    let manifest = ReportManifest {
        command: "report",
        version: env!("CARGO_PKG_VERSION"),
        results: results_path,
        quartile_convention: "type-7 linear interpolation of order statistics",
    };
    fs::write(
        out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n",
    )
    .map_err(runtime)?;
    println!(
        "wrote boxstats.json and manifest.json to {} ({} cells)",
        out.display(),
        stats.len()
    );
    Ok(())
}
