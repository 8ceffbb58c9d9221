//! Non-interactive subcommand implementations. Every command loads inputs,
//! hands the work to the core crate, and renders the outcome; no metric or
//! statistical computation lives in this module.

use std::collections::BTreeMap;
use std::path::Path;

use crucible_core::analysis::{class_distribution, describe, export_plot, ClassShare, FeatureStats, PlotKind};
use crucible_core::compare::{
    compare, mean_metric, metric_direction, rank_models, MetricSamples, Scenario, METRIC_IDS,
};
use crucible_core::data::{load_dataset, Manifest};
use crucible_core::error::Error;
use crucible_core::evaluate::RunRecord;
use crucible_core::runner::{
    config_hash, generate_report, read_records, run_batch, store_path, BatchConfig, BatchSummary,
    ExperimentConfig, RecordFilter,
};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_EXECUTION: i32 = 3;

/// Overrides the config's base seed for ad-hoc runs when set.
pub const SEED_ENV: &str = "PROPHETIC_SEED";

/// A failed command: the process exit code plus the message for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match &e {
            Error::Io { .. } => EXIT_USAGE,
            Error::Experiment { .. } | Error::Other(_) => EXIT_EXECUTION,
            _ => EXIT_VALIDATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

pub type CmdResult = Result<(), Failure>;

pub fn feature_table(stats: &[FeatureStats]) -> String {
    let width = stats.iter().map(|s| s.name.len()).max().unwrap_or(4).max(7);
    let mut out = format!(
        "{:width$}  {:>10}  {:>10}  {:>10}  {:>10}  {:>10}  {:>8}\n",
        "feature",
        "mean",
        "std",
        "min",
        "median",
        "max",
        "distinct",
        width = width
    );
    for s in stats {
        out.push_str(&format!(
            "{:width$}  {:>10.4}  {:>10.4}  {:>10.4}  {:>10.4}  {:>10.4}  {:>8}\n",
            s.name,
            s.mean,
            s.std,
            s.min,
            s.median,
            s.max,
            s.distinct_count,
            width = width
        ));
    }
    out
}

pub fn class_table(shares: &[ClassShare]) -> String {
    let width = shares.iter().map(|s| s.name.len()).max().unwrap_or(5).max(5);
    let mut out = format!(
        "{:width$}  {:>7}  {:>9}\n",
        "class",
        "count",
        "fraction",
        width = width
    );
    for s in shares {
        out.push_str(&format!(
            "{:width$}  {:>7}  {:>9.4}\n",
            s.name,
            s.count,
            s.fraction,
            width = width
        ));
    }
    out
}

pub fn analyze(dataset_path: &Path, manifest_path: &Path, plots: Option<&Path>) -> CmdResult {
    let manifest = Manifest::from_file(manifest_path)?;
    let loaded = load_dataset(dataset_path, &manifest)?;
    for warning in &loaded.warnings {
        println!("warning: {}", warning);
    }
    let ds = &loaded.dataset;
    println!(
        "{}: {} rows, {} features",
        dataset_path.display(),
        ds.n_rows(),
        ds.n_features()
    );
    println!();
    print!("{}", feature_table(&describe(ds)));
    match class_distribution(ds) {
        Ok(shares) => {
            println!();
            print!("{}", class_table(&shares));
        }
        Err(_) => println!("\nno label column; class distribution skipped"),
    }
    if let Some(dir) = plots {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        let names: Vec<String> = ds.feature_meta.iter().map(|f| f.name.clone()).collect();
        let artifacts = export_plot(ds, PlotKind::Boxplot, &names, &dir.join("features_box"))?;
        println!("wrote {}", artifacts.csv.display());
        println!("wrote {}", artifacts.svg.display());
        if names.len() >= 2 {
            let pair = [names[0].clone(), names[1].clone()];
            let artifacts = export_plot(ds, PlotKind::Scatter, &pair, &dir.join("scatter"))?;
            println!("wrote {}", artifacts.csv.display());
            println!("wrote {}", artifacts.svg.display());
        }
    }
    Ok(())
}

/// Replaces the config's base seed with the environment override, returning
/// the seed when one was applied so callers can echo it.
pub fn apply_prophetic_seed(config: &mut ExperimentConfig) -> Result<Option<u64>, Failure> {
    match std::env::var(SEED_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(std::env::VarError::NotUnicode(_)) => Err(Failure {
            code: EXIT_VALIDATION,
            message: format!("{} is not valid unicode", SEED_ENV),
        }),
        Ok(text) => match text.trim().parse::<u64>() {
            Ok(seed) => {
                config.cv.base_seed = seed;
                Ok(Some(seed))
            }
            Err(_) => Err(Failure {
                code: EXIT_VALIDATION,
                message: format!("{} must be an unsigned integer, got '{}'", SEED_ENV, text),
            }),
        },
    }
}

fn fail_on_batch_failures(summary: &BatchSummary) -> CmdResult {
    if let Some(first) = summary.failures.first() {
        return Err(Failure {
            code: EXIT_EXECUTION,
            message: format!(
                "{} of {} configs failed; first: {}",
                summary.failures.len(),
                summary.configs_run + summary.failures.len(),
                first.message
            ),
        });
    }
    Ok(())
}

pub fn run(config_path: &Path, out_dir: &Path) -> CmdResult {
    let mut config = ExperimentConfig::from_file(config_path)?;
    if let Some(seed) = apply_prophetic_seed(&mut config)? {
        println!("{} active: base_seed = {}", SEED_ENV, seed);
    }
    println!("config {}", config_hash(&config));
    let document = serde_json::to_value(&config).map_err(|e| Failure {
        code: EXIT_EXECUTION,
        message: format!("cannot serialize config: {}", e),
    })?;
    let summary = run_batch(
        &BatchConfig {
            workers: 1,
            document,
        },
        out_dir,
    )?;
    print!("{}", summary.render_text());
    println!("store: {}", store_path(out_dir).display());
    fail_on_batch_failures(&summary)
}

pub fn batch(batch_path: &Path, out_dir: &Path) -> CmdResult {
    let batch = BatchConfig::from_file(batch_path)?;
    let summary = run_batch(&batch, out_dir)?;
    print!("{}", summary.render_text());
    println!("store: {}", store_path(out_dir).display());
    fail_on_batch_failures(&summary)
}

fn known_metric_list() -> String {
    let ids: Vec<&str> = METRIC_IDS.iter().map(|(id, _)| *id).collect();
    ids.join(", ")
}

fn distinct_hashes(records: &[RunRecord]) -> Vec<String> {
    let mut hashes: Vec<String> = records.iter().map(|r| r.config_hash.clone()).collect();
    hashes.sort();
    hashes.dedup();
    hashes
}

/// The compare flow shared by the subcommand and the interactive session,
/// returning the rendered comparison report.
pub fn compare_flow(
    store: &Path,
    metric: &str,
    models: &[String],
    alpha: f64,
) -> Result<String, Failure> {
    if metric_direction(metric).is_none() {
        return Err(Failure {
            code: EXIT_VALIDATION,
            message: format!(
                "unknown metric '{}'; known metrics: {}",
                metric,
                known_metric_list()
            ),
        });
    }
    for (i, model) in models.iter().enumerate() {
        if models[..i].contains(model) {
            return Err(Failure {
                code: EXIT_VALIDATION,
                message: format!("model list repeats {}", model),
            });
        }
    }
    let records = read_records(store, &RecordFilter::default())?;
    let available = distinct_hashes(&records);
    let missing: Vec<String> = models
        .iter()
        .filter(|m| !available.contains(m))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(Failure {
            code: EXIT_VALIDATION,
            message: format!(
                "store has no records for {}; available configs: {}",
                missing.join(", "),
                available.join(", ")
            ),
        });
    }
    let groups: Vec<(String, Vec<RunRecord>)> = models
        .iter()
        .map(|m| {
            (
                m.clone(),
                records
                    .iter()
                    .filter(|r| &r.config_hash == m)
                    .cloned()
                    .collect(),
            )
        })
        .collect();
    let samples = MetricSamples::from_records(metric, &groups)?;
    let report = compare(&samples, alpha)?;
    Ok(report.render_text())
}

pub fn compare_cmd(store: &Path, metric: &str, models: &[String], alpha: f64) -> CmdResult {
    print!("{}", compare_flow(store, metric, models, alpha)?);
    Ok(())
}

/// The rank flow shared by the subcommand and the interactive session,
/// returning the rendered ranking.
pub fn rank_flow(store: &Path, scenario_path: &Path) -> Result<String, Failure> {
    let scenario = Scenario::from_file(scenario_path)?;
    let records = read_records(store, &RecordFilter::default())?;
    if records.is_empty() {
        return Err(Failure {
            code: EXIT_VALIDATION,
            message: format!("store {} holds no records", store.display()),
        });
    }
    let mut summaries: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for hash in distinct_hashes(&records) {
        let group: Vec<RunRecord> = records
            .iter()
            .filter(|r| r.config_hash == hash)
            .cloned()
            .collect();
        let mut means = BTreeMap::new();
        for (id, _) in METRIC_IDS {
            if let Some(mean) = mean_metric(&group, id) {
                means.insert(id.to_string(), mean);
            }
        }
        summaries.insert(hash, means);
    }
    let ranking = rank_models(&scenario, &summaries)?;
    let mut out = format!("scenario: {}\n", scenario.name);
    for (i, (model, score)) in ranking.iter().enumerate() {
        out.push_str(&format!("{:>3}. {}  score {:.4}\n", i + 1, model, score));
    }
    Ok(out)
}

pub fn rank_cmd(store: &Path, scenario_path: &Path) -> CmdResult {
    print!("{}", rank_flow(store, scenario_path)?);
    Ok(())
}

pub fn report_cmd(store: &Path, out_dir: &Path, configs: &[String]) -> CmdResult {
    let selection = if configs.is_empty() {
        let records = read_records(store, &RecordFilter::default())?;
        let hashes = distinct_hashes(&records);
        if hashes.is_empty() {
            return Err(Failure {
                code: EXIT_VALIDATION,
                message: format!("store {} holds no records", store.display()),
            });
        }
        hashes
    } else {
        configs.to_vec()
    };
    let artifacts = generate_report(store, &selection, out_dir)?;
    for artifact in &artifacts {
        println!("wrote {}", artifact.display());
    }
    Ok(())
}
