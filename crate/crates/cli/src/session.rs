//! The interactive menu session. Screens collect input and echo state
//! changes; all real work is delegated to the core crate through the same
//! flows the subcommands use.

use std::io::{BufRead, Write};
use std::path::PathBuf;

use crucible_core::analysis::{class_distribution, describe};
use crucible_core::canon::canonical_json;
use crucible_core::compare::{mean_metric, METRIC_IDS};
use crucible_core::data::{load_dataset, Dataset, Manifest};
use crucible_core::learn::{Algorithm, ModelSpec};
use crucible_core::runner::{
    config_hash, read_records, run_batch, store_path, BatchConfig, CvConfig, DatasetRef,
    ExperimentConfig, RecordFilter,
};
use crucible_core::transform::{ResampleMethod, TransformSpec};

use crate::commands::{
    apply_prophetic_seed, class_table, compare_flow, feature_table, rank_flow, SEED_ENV,
};

pub fn interactive() -> i32 {
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let mut input = stdin.lock();
    let mut out = stdout.lock();
    run_session(&mut input, &mut out)
}

struct LoadedData {
    csv: String,
    manifest: String,
    dataset: Dataset,
}

struct Session {
    data: Option<LoadedData>,
    transforms: Vec<TransformSpec>,
    model: Option<ModelSpec>,
    cv: CvConfig,
    store: Option<PathBuf>,
    selection: Vec<String>,
    dirty: bool,
}

impl Session {
    fn new() -> Session {
        Session {
            data: None,
            transforms: Vec::new(),
            model: None,
            cv: CvConfig {
                k: 5,
                runs: 1,
                base_seed: 0,
                grouped: false,
            },
            store: None,
            selection: Vec::new(),
            dirty: false,
        }
    }

    /// The draft as an executable config, when every required piece is set.
    fn build_config(&self) -> Option<ExperimentConfig> {
        let data = self.data.as_ref()?;
        let model = self.model.clone()?;
        Some(ExperimentConfig {
            dataset: DatasetRef {
                path: data.csv.clone(),
                manifest: data.manifest.clone(),
            },
            transforms: self.transforms.clone(),
            model,
            cv: self.cv.clone(),
            label: None,
        })
    }
}

fn say(out: &mut dyn Write, text: &str) {
    let _ = writeln!(out, "{}", text);
}

fn prompt(input: &mut dyn BufRead, out: &mut dyn Write, text: &str) -> Option<String> {
    let _ = write!(out, "{}", text);
    let _ = out.flush();
    let mut buf = String::new();
    match input.read_line(&mut buf) {
        Ok(0) | Err(_) => None,
        Ok(_) => Some(buf.trim().to_string()),
    }
}

/// Prompts until the answer parses. Blank takes the default when one exists,
/// otherwise re-prompts. Returns None only on end of input.
fn prompt_parse<T: std::str::FromStr>(
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    text: &str,
    default: Option<T>,
) -> Option<T> {
    let mut default = default;
    loop {
        let answer = prompt(input, out, text)?;
        if answer.is_empty() {
            if let Some(d) = default.take() {
                return Some(d);
            }
            say(out, "a value is required");
            continue;
        }
        match answer.parse::<T>() {
            Ok(v) => return Some(v),
            Err(_) => say(out, "not a valid number, try again"),
        }
    }
}

fn prompt_yn(
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    text: &str,
    default: bool,
) -> Option<bool> {
    loop {
        let answer = prompt(input, out, text)?;
        match answer.as_str() {
            "" => return Some(default),
            "y" | "yes" => return Some(true),
            "n" | "no" => return Some(false),
            _ => say(out, "answer y or n"),
        }
    }
}

fn transform_name(spec: &TransformSpec) -> &'static str {
    match spec {
        TransformSpec::Zscore => "zscore",
        TransformSpec::Minmax => "minmax",
        TransformSpec::VarianceFilter { .. } => "variance_filter",
        TransformSpec::CorrelationFilter { .. } => "correlation_filter",
        TransformSpec::Pca { .. } => "pca",
        TransformSpec::Window { .. } => "window",
        TransformSpec::Resample { .. } => "resample",
    }
}

pub fn run_session(input: &mut dyn BufRead, out: &mut dyn Write) -> i32 {
    let mut session = Session::new();
    say(
        out,
        "crucible interactive session (pick an option by number, q quits)",
    );
    loop {
        render_menu(&session, out);
        let Some(choice) = prompt(input, out, "> ") else {
            return 0;
        };
        let flow = match choice.as_str() {
            "q" | "quit" => match quit_screen(&mut session, input, out) {
                None | Some(true) => return 0,
                Some(false) => Some(()),
            },
            "1" => load_screen(&mut session, input, out),
            "2" => analysis_screen(&session, out),
            "3" => transforms_screen(&mut session, input, out),
            "4" => model_screen(&mut session, input, out),
            "5" => cv_screen(&mut session, input, out),
            "6" => run_screen(&mut session, input, out),
            "7" => results_screen(&session, out),
            "8" => compare_screen(&session, input, out),
            "9" => rank_screen(&session, input, out),
            "10" => save_screen(&mut session, input, out),
            _ => {
                say(out, "enter a number from 1 to 10, or q to quit");
                Some(())
            }
        };
        if flow.is_none() {
            return 0;
        }
    }
}

fn render_menu(session: &Session, out: &mut dyn Write) {
    let needs_data = if session.data.is_some() {
        ""
    } else {
        "  (needs a loaded dataset)"
    };
    let needs_run = if session.store.is_some() {
        ""
    } else {
        "  (needs a completed run)"
    };
    say(out, "");
    say(out, "== main menu ==");
    match &session.data {
        Some(data) => say(
            out,
            &format!(
                " 1) load dataset  [{}: {} rows]",
                data.csv,
                data.dataset.n_rows()
            ),
        ),
        None => say(out, " 1) load dataset"),
    }
    say(out, &format!(" 2) view analysis{}", needs_data));
    say(
        out,
        &format!(" 3) edit transform chain  [{} steps]", session.transforms.len()),
    );
    match &session.model {
        Some(model) => say(
            out,
            &format!(" 4) choose model  [{}]", model.algorithm.id()),
        ),
        None => say(out, " 4) choose model"),
    }
    say(
        out,
        &format!(
            " 5) set cross-validation  [k = {}, runs = {}, seed = {}, grouped = {}]",
            session.cv.k, session.cv.runs, session.cv.base_seed, session.cv.grouped
        ),
    );
    say(out, &format!(" 6) run experiment{}", needs_data));
    say(out, &format!(" 7) view results{}", needs_run));
    say(out, " 8) compare models");
    say(out, " 9) rank models");
    say(out, "10) save config as JSON");
    say(out, " q) quit");
}

fn load_screen(
    session: &mut Session,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Option<()> {
    let csv = prompt(input, out, "csv path (blank to go back): ")?;
    if csv.is_empty() {
        return Some(());
    }
    let manifest_path = prompt(input, out, "manifest path: ")?;
    let manifest = match Manifest::from_file(manifest_path.as_ref()) {
        Ok(m) => m,
        Err(e) => {
            say(out, &format!("error: {}", e));
            return Some(());
        }
    };
    match load_dataset(csv.as_ref(), &manifest) {
        Ok(loaded) => {
            for warning in &loaded.warnings {
                say(out, &format!("warning: {}", warning));
            }
            let classes = if loaded.dataset.labels.is_some() {
                format!(", {} classes", loaded.dataset.n_classes())
            } else {
                String::new()
            };
            say(
                out,
                &format!(
                    "loaded {}: {} rows, {} features{}",
                    csv,
                    loaded.dataset.n_rows(),
                    loaded.dataset.n_features(),
                    classes
                ),
            );
            session.data = Some(LoadedData {
                csv,
                manifest: manifest_path,
                dataset: loaded.dataset,
            });
            session.dirty = true;
        }
        Err(e) => say(out, &format!("error: {}", e)),
    }
    Some(())
}

fn analysis_screen(session: &Session, out: &mut dyn Write) -> Option<()> {
    let Some(data) = &session.data else {
        say(out, "load a dataset first (option 1)");
        return Some(());
    };
    let _ = write!(out, "{}", feature_table(&describe(&data.dataset)));
    match class_distribution(&data.dataset) {
        Ok(shares) => {
            say(out, "");
            let _ = write!(out, "{}", class_table(&shares));
        }
        Err(_) => say(out, "no label column; class distribution skipped"),
    }
    Some(())
}

fn transforms_screen(
    session: &mut Session,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Option<()> {
    loop {
        if session.transforms.is_empty() {
            say(out, "transform chain: (empty)");
        } else {
            say(out, "transform chain:");
            for (i, spec) in session.transforms.iter().enumerate() {
                say(out, &format!("  {}) {}", i + 1, transform_name(spec)));
            }
        }
        let choice = prompt(input, out, "a) append  d) drop last  c) clear  b) back: ")?;
        match choice.as_str() {
            "b" | "" => return Some(()),
            "a" => append_transform(session, input, out)?,
            "d" => match session.transforms.pop() {
                Some(spec) => {
                    session.dirty = true;
                    say(
                        out,
                        &format!(
                            "dropped {} (chain length {})",
                            transform_name(&spec),
                            session.transforms.len()
                        ),
                    );
                }
                None => say(out, "the chain is already empty"),
            },
            "c" => {
                session.transforms.clear();
                session.dirty = true;
                say(out, "cleared the transform chain");
            }
            _ => say(out, "enter a, d, c, or b"),
        }
    }
}

fn append_transform(
    session: &mut Session,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Option<()> {
    say(
        out,
        "kinds: 1) zscore  2) minmax  3) variance_filter  4) correlation_filter  5) pca  6) window  7) resample",
    );
    let kind = prompt(input, out, "kind: ")?;
    let spec = match kind.as_str() {
        "1" | "zscore" => TransformSpec::Zscore,
        "2" | "minmax" => TransformSpec::Minmax,
        "3" | "variance_filter" => TransformSpec::VarianceFilter {
            threshold: prompt_parse(input, out, "variance threshold: ", None)?,
        },
        "4" | "correlation_filter" => TransformSpec::CorrelationFilter {
            threshold: prompt_parse(input, out, "correlation threshold: ", None)?,
        },
        "5" | "pca" => {
            let answer = prompt(input, out, "components (blank to pick by variance ratio): ")?;
            if answer.is_empty() {
                let ratio =
                    prompt_parse(input, out, "variance ratio to keep (blank keeps all): ", Some(f64::NAN))?;
                let variance_ratio = if ratio.is_nan() { None } else { Some(ratio) };
                TransformSpec::Pca {
                    components: None,
                    variance_ratio,
                }
            } else {
                match answer.parse::<usize>() {
                    Ok(components) => TransformSpec::Pca {
                        components: Some(components),
                        variance_ratio: None,
                    },
                    Err(_) => {
                        say(out, "not a valid number, nothing added");
                        return Some(());
                    }
                }
            }
        }
        "6" | "window" => TransformSpec::Window {
            width: prompt_parse(input, out, "window width: ", None)?,
            stride: prompt_parse(input, out, "window stride: ", None)?,
        },
        "7" | "resample" => {
            let method = prompt(input, out, "method: 1) undersample  2) oversample  3) smote: ")?;
            let method = match method.as_str() {
                "1" | "undersample" => ResampleMethod::Undersample,
                "2" | "oversample" => ResampleMethod::Oversample,
                "3" | "smote" => ResampleMethod::Smote,
                _ => {
                    say(out, "unknown method, nothing added");
                    return Some(());
                }
            };
            let answer = prompt(input, out, "resample seed (blank uses the model seed): ")?;
            let seed = if answer.is_empty() {
                None
            } else {
                match answer.parse::<u64>() {
                    Ok(s) => Some(s),
                    Err(_) => {
                        say(out, "not a valid number, nothing added");
                        return Some(());
                    }
                }
            };
            TransformSpec::Resample { method, seed }
        }
        _ => {
            say(out, "unknown kind, nothing added");
            return Some(());
        }
    };
    // chain-shape rules the engine enforces, surfaced at edit time
    if matches!(spec, TransformSpec::Window { .. }) && !session.transforms.is_empty() {
        say(out, "window must be the first step in the chain");
        return Some(());
    }
    if matches!(
        session.transforms.last(),
        Some(TransformSpec::Resample { .. })
    ) {
        say(out, "resample must stay the last step; drop it first");
        return Some(());
    }
    if let Err(e) = spec.validate() {
        say(out, &format!("error: {}", e));
        return Some(());
    }
    session.transforms.push(spec);
    session.dirty = true;
    say(
        out,
        &format!(
            "added {} (chain length {})",
            transform_name(session.transforms.last().expect("just pushed")),
            session.transforms.len()
        ),
    );
    Some(())
}

fn model_screen(
    session: &mut Session,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Option<()> {
    say(
        out,
        "algorithms: 1) knn  2) gnb  3) tree  4) logreg  5) kmeans  6) dbscan",
    );
    let pick = prompt(input, out, "algorithm (blank to go back): ")?;
    let algorithm = match pick.as_str() {
        "" => return Some(()),
        "1" | "knn" => Algorithm::Knn,
        "2" | "gnb" => Algorithm::Gnb,
        "3" | "tree" => Algorithm::Tree,
        "4" | "logreg" => Algorithm::Logreg,
        "5" | "kmeans" => Algorithm::Kmeans,
        "6" | "dbscan" => Algorithm::Dbscan,
        _ => {
            say(out, "unknown algorithm");
            return Some(());
        }
    };
    let params = prompt(
        input,
        out,
        "hyperparameters as a JSON object (blank for defaults): ",
    )?;
    let hyperparameters = if params.is_empty() {
        serde_json::Map::new()
    } else {
        match serde_json::from_str::<serde_json::Map<String, serde_json::Value>>(&params) {
            Ok(map) => map,
            Err(e) => {
                say(out, &format!("invalid JSON object: {}", e));
                return Some(());
            }
        }
    };
    let seed = prompt_parse(input, out, "model seed [0]: ", Some(0u64))?;
    let spec = ModelSpec {
        algorithm,
        hyperparameters,
        seed,
    };
    if let Err(e) = spec.validate() {
        say(out, &format!("error: {}", e));
        return Some(());
    }
    say(
        out,
        &format!("model set: {} (seed {})", spec.algorithm.id(), spec.seed),
    );
    session.model = Some(spec);
    session.dirty = true;
    Some(())
}

fn cv_screen(session: &mut Session, input: &mut dyn BufRead, out: &mut dyn Write) -> Option<()> {
    let k = prompt_parse(
        input,
        out,
        &format!("folds k [{}]: ", session.cv.k),
        Some(session.cv.k),
    )?;
    if k < 2 {
        say(out, "k must be at least 2; cross-validation unchanged");
        return Some(());
    }
    let runs = prompt_parse(
        input,
        out,
        &format!("runs [{}]: ", session.cv.runs),
        Some(session.cv.runs),
    )?;
    if runs < 1 {
        say(out, "runs must be at least 1; cross-validation unchanged");
        return Some(());
    }
    let base_seed = prompt_parse(
        input,
        out,
        &format!("base seed [{}]: ", session.cv.base_seed),
        Some(session.cv.base_seed),
    )?;
    let grouped = prompt_yn(
        input,
        out,
        &format!(
            "grouped folds? y/n [{}]: ",
            if session.cv.grouped { "y" } else { "n" }
        ),
        session.cv.grouped,
    )?;
    session.cv = CvConfig {
        k,
        runs,
        base_seed,
        grouped,
    };
    session.dirty = true;
    say(
        out,
        &format!(
            "cross-validation set: k = {}, runs = {}, base seed = {}, grouped = {}",
            k, runs, base_seed, grouped
        ),
    );
    Some(())
}

fn run_screen(session: &mut Session, input: &mut dyn BufRead, out: &mut dyn Write) -> Option<()> {
    if session.data.is_none() {
        say(out, "load a dataset first (option 1)");
        return Some(());
    }
    let Some(mut config) = session.build_config() else {
        say(out, "choose a model first (option 4)");
        return Some(());
    };
    if let Err(e) = config.validate() {
        say(out, &format!("draft is invalid: {}", e));
        return Some(());
    }
    match apply_prophetic_seed(&mut config) {
        Ok(Some(seed)) => say(out, &format!("{} active: base_seed = {}", SEED_ENV, seed)),
        Ok(None) => {}
        Err(failure) => {
            say(out, &format!("error: {}", failure.message));
            return Some(());
        }
    }
    let out_dir = loop {
        let answer = prompt(input, out, "output directory: ")?;
        if !answer.is_empty() {
            break PathBuf::from(answer);
        }
        say(out, "a directory is required");
    };
    let hash = config_hash(&config);
    say(
        out,
        &format!(
            "running config {}: {} folds x {} runs",
            hash, config.cv.k, config.cv.runs
        ),
    );
    let document = match serde_json::to_value(&config) {
        Ok(v) => v,
        Err(e) => {
            say(out, &format!("error: cannot serialize config: {}", e));
            return Some(());
        }
    };
    match run_batch(
        &BatchConfig {
            workers: 1,
            document,
        },
        &out_dir,
    ) {
        Ok(summary) => {
            let _ = write!(out, "{}", summary.render_text());
            say(out, &format!("store: {}", store_path(&out_dir).display()));
            session.store = Some(store_path(&out_dir));
            session.selection = vec![hash];
        }
        Err(e) => say(out, &format!("error: {}", e)),
    }
    Some(())
}

fn results_screen(session: &Session, out: &mut dyn Write) -> Option<()> {
    let Some(store) = &session.store else {
        say(out, "run an experiment first (option 6)");
        return Some(());
    };
    for hash in &session.selection {
        let filter = RecordFilter {
            config_hash: Some(hash.clone()),
            ..RecordFilter::default()
        };
        match read_records(store, &filter) {
            Ok(records) => {
                say(out, &format!("config {}: {} records", hash, records.len()));
                for (id, _) in METRIC_IDS {
                    if let Some(mean) = mean_metric(&records, id) {
                        say(out, &format!("  mean {}: {:.4}", id, mean));
                    }
                }
            }
            Err(e) => say(out, &format!("error: {}", e)),
        }
    }
    Some(())
}

fn prompt_store(
    session: &Session,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Option<Option<PathBuf>> {
    let default = session
        .store
        .as_ref()
        .map(|p| format!(" [{}]", p.display()))
        .unwrap_or_default();
    loop {
        let answer = prompt(input, out, &format!("store path{}: ", default))?;
        if !answer.is_empty() {
            return Some(Some(PathBuf::from(answer)));
        }
        match &session.store {
            Some(p) => return Some(Some(p.clone())),
            None => say(out, "no store from this session yet; enter a path"),
        }
    }
}

fn compare_screen(
    session: &Session,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Option<()> {
    let store = prompt_store(session, input, out)??;
    let metric = loop {
        let answer = prompt(input, out, "metric id: ")?;
        if !answer.is_empty() {
            break answer;
        }
        say(out, "a metric is required");
    };
    let models: Vec<String> = loop {
        let answer = prompt(input, out, "model config hashes, space-separated: ")?;
        let models: Vec<String> = answer.split_whitespace().map(str::to_string).collect();
        if models.len() >= 2 {
            break models;
        }
        say(out, "enter at least two hashes");
    };
    let alpha = prompt_parse(input, out, "alpha [0.05]: ", Some(0.05))?;
    match compare_flow(&store, &metric, &models, alpha) {
        Ok(text) => {
            let _ = write!(out, "{}", text);
        }
        Err(failure) => say(out, &format!("error: {}", failure.message)),
    }
    Some(())
}

fn rank_screen(session: &Session, input: &mut dyn BufRead, out: &mut dyn Write) -> Option<()> {
    let store = prompt_store(session, input, out)??;
    let scenario = loop {
        let answer = prompt(input, out, "scenario path: ")?;
        if !answer.is_empty() {
            break PathBuf::from(answer);
        }
        say(out, "a scenario file is required");
    };
    match rank_flow(&store, &scenario) {
        Ok(text) => {
            let _ = write!(out, "{}", text);
        }
        Err(failure) => say(out, &format!("error: {}", failure.message)),
    }
    Some(())
}

fn save_screen(session: &mut Session, input: &mut dyn BufRead, out: &mut dyn Write) -> Option<()> {
    if session.data.is_none() {
        say(out, "load a dataset first (option 1)");
        return Some(());
    }
    if session.model.is_none() {
        say(out, "choose a model first (option 4)");
        return Some(());
    }
    let path = loop {
        let answer = prompt(input, out, "save path: ")?;
        if !answer.is_empty() {
            break answer;
        }
        say(out, "a path is required");
    };
    match save_config(session, &path) {
        Ok(hash) => say(out, &format!("saved config {} to {}", hash, path)),
        Err(message) => say(out, &format!("error: {}", message)),
    }
    Some(())
}

/// Writes the draft as canonical JSON and marks it saved. Returns the
/// config hash.
fn save_config(session: &mut Session, path: &str) -> Result<String, String> {
    let config = session
        .build_config()
        .ok_or("draft is incomplete: load a dataset (1) and choose a model (4) first")?;
    config.validate().map_err(|e| e.to_string())?;
    let value = serde_json::to_value(&config).map_err(|e| e.to_string())?;
    let text = canonical_json(&value) + "\n";
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {}", path, e))?;
    session.dirty = false;
    Ok(config_hash(&config))
}

/// Returns None on end of input, Some(true) to quit, Some(false) to stay.
fn quit_screen(
    session: &mut Session,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Option<bool> {
    if !session.dirty {
        return Some(true);
    }
    if session.build_config().is_none() {
        say(out, "draft is incomplete and was not saved");
        return Some(true);
    }
    let answer = prompt(
        input,
        out,
        "save draft config before quitting? enter a path to save it, or leave blank to discard: ",
    )?;
    if answer.is_empty() {
        return Some(true);
    }
    match save_config(session, &answer) {
        Ok(hash) => {
            say(out, &format!("saved config {} to {}", hash, answer));
            Some(true)
        }
        Err(message) => {
            say(out, &format!("error: {}", message));
            Some(false)
        }
    }
}
