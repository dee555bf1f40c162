//! Config-driven runs: `gen`, `train`, `predict`, `eval`.
//!
//! Every command reads one TOML [`RunConfig`]; command-line flags override
//! its keys, and the effective config is written to `<out>/config.toml`.
//! Relative paths in the config resolve against the config file's
//! directory. Outputs land only under the output directory:
//!
//! ```text
//! <out>/config.toml
//! <out>/data/{train,test}_{labels,features}.csv, readers.csv, provenance.json   (gen)
//! <out>/model/ensemble.json, hierarchy.csv, member-NN/{stage1,stage2|flat}.json, loss.csv   (train)
//! <out>/predictions.csv                                                        (predict, eval)
//! <out>/report/report.txt, report.csv, summary.csv, roc/<label>.csv            (eval)
//! ```
//!
//! Exit codes: 0 success, 1 usage or config error, 2 data error, 3 numeric
//! failure.

use std::collections::{BTreeMap, HashMap};
use std::ffi::OsString;
use std::fs;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::data::{
    generate_synthetic, inject_uncertainty, load_csv, load_dataset, load_features, Label, SyntheticSpec,
};
use crate::error::{Error, Result};
use crate::eval::{
    load_reader_points, reader_study, simulate_readers, write_reader_points, EvalReport, LabelScores,
    ReaderSkill, DEFAULT_SUBSET,
};
use crate::grid::Grid;
use crate::hierarchy::LabelTree;
use crate::model::{encode_checkpoint, Mlp, OptimizerConfig};
use crate::pipeline::{train_ensemble, EnsembleModel, Mode, TrainPlan};
use crate::policy::{LsrParams, PolicyKind, UncertaintyPolicy};
use crate::rng;

const ENSEMBLE_FORMAT: &str = "hierlabel-ensemble";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            kind: PolicyKind::OnesLsr,
            a: None,
            b: None,
        }
    }
}

impl PolicyConfig {
    /// Missing bounds fall back to the kind's defaults.
    pub fn policy(&self) -> Result<UncertaintyPolicy> {
        let defaults = UncertaintyPolicy::with_defaults(self.kind);
        let lsr = match (defaults.lsr, self.a, self.b) {
            (Some(d), a, b) => Some(LsrParams::new(a.unwrap_or(d.a), b.unwrap_or(d.b))?),
            (None, None, None) => None,
            (None, _, _) => {
                return Err(Error::Config(format!(
                    "policy `{}` takes no smoothing bounds",
                    self.kind
                )))
            }
        };
        UncertaintyPolicy::new(self.kind, lsr)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingConfig {
    /// Defaults to `optimizer.iterations`.
    pub stage1_iterations: Option<usize>,
    /// Defaults to `optimizer.iterations`.
    pub stage2_iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub train_rows: usize,
    pub test_rows: usize,
    #[serde(default = "default_features")]
    pub features: usize,
    #[serde(default = "default_noise")]
    pub noise: f64,
    /// Fraction of training cells turned uncertain.
    #[serde(default)]
    pub uncertainty_rate: f64,
    /// Per-label `P(positive | parent positive)`, keyed by label id.
    pub theta: BTreeMap<String, f64>,
    #[serde(default)]
    pub readers: Vec<ReaderSkill>,
}

fn default_features() -> usize {
    16
}

fn default_noise() -> f64 {
    0.5
}

/// Explicit input files. Unset entries fall back to `<out>/data/...`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPaths {
    pub train_labels: Option<PathBuf>,
    pub train_features: Option<PathBuf>,
    pub test_labels: Option<PathBuf>,
    pub test_features: Option<PathBuf>,
    pub readers: Option<PathBuf>,
    /// Evaluate this predictions file instead of running the model.
    pub predictions: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    /// Hierarchy file; the shipped 14-label forest when unset.
    pub hierarchy: Option<PathBuf>,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default = "default_ensemble")]
    pub ensemble_size: usize,
    #[serde(default = "default_threads")]
    pub threads: usize,
    #[serde(default = "default_hidden")]
    pub hidden: Vec<usize>,
    #[serde(default = "default_subset")]
    pub eval_subset: Vec<String>,
    #[serde(default)]
    pub missing_as_negative: bool,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub training: TrainingConfig,
    pub synthetic: Option<SyntheticConfig>,
    #[serde(default)]
    pub data: DataPaths,
}

fn default_mode() -> Mode {
    Mode::Conditional
}

fn default_ensemble() -> usize {
    6
}

fn default_threads() -> usize {
    1
}

fn default_hidden() -> Vec<usize> {
    vec![32]
}

fn default_subset() -> Vec<String> {
    DEFAULT_SUBSET.iter().map(|s| s.to_string()).collect()
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let abs = std::path::absolute(path).map_err(|e| Error::io(path, e))?;
        let base = abs.parent().unwrap_or(Path::new("/"));
        Self::parse(&text, base)
    }

    /// Parses TOML and resolves relative paths against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.resolve(base);
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.out);
        fix(&mut self.hierarchy);
        let d = &mut self.data;
        for p in [
            &mut d.train_labels,
            &mut d.train_features,
            &mut d.test_labels,
            &mut d.test_features,
            &mut d.readers,
            &mut d.predictions,
        ] {
            fix(p);
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("`seed` is required (config key or --seed)".into()))
    }

    pub fn out_dir(&self) -> Result<&Path> {
        self.out
            .as_deref()
            .ok_or_else(|| Error::Config("`out` is required (config key or --out)".into()))
    }

    pub fn tree(&self) -> Result<LabelTree> {
        match &self.hierarchy {
            Some(p) => LabelTree::load(p),
            None => Ok(LabelTree::chexpert()),
        }
    }

    pub fn plan(&self) -> Result<TrainPlan> {
        let mut plan = TrainPlan::new(self.policy.policy()?, self.optimizer.clone(), self.mode);
        if let Some(n) = self.training.stage1_iterations {
            plan.stage1_iterations = n;
        }
        if let Some(n) = self.training.stage2_iterations {
            plan.stage2_iterations = n;
        }
        plan.policy_seed = self.seed()?;
        plan.missing_as_negative = self.missing_as_negative;
        plan.validate()?;
        Ok(plan)
    }

    pub fn synthetic_spec(&self, tree: &LabelTree) -> Result<(SyntheticSpec, &SyntheticConfig)> {
        let syn = self
            .synthetic
            .as_ref()
            .ok_or_else(|| Error::Config("missing [synthetic] section".into()))?;
        if let Some(unknown) = syn.theta.keys().find(|k| tree.index_of(k).is_err()) {
            return Err(Error::Config(format!("theta names unknown label `{unknown}`")));
        }
        let theta = tree
            .ids()
            .map(|id| {
                syn.theta
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::Config(format!("theta missing for label `{id}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = SyntheticSpec {
            tree: tree.clone(),
            theta,
            feature_noise: syn.noise,
            features: syn.features,
        };
        spec.validate()?;
        if syn.train_rows == 0 || syn.test_rows == 0 {
            return Err(Error::Config("train_rows and test_rows must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&syn.uncertainty_rate) {
            return Err(Error::Config(format!(
                "uncertainty_rate {} outside [0, 1]",
                syn.uncertainty_rate
            )));
        }
        for r in &syn.readers {
            if !(0.0..=1.0).contains(&r.sensitivity) || !(0.0..=1.0).contains(&r.specificity) {
                return Err(Error::Config("reader sensitivity/specificity outside [0, 1]".into()));
            }
        }
        Ok((spec, syn))
    }

    fn data_path(&self, explicit: &Option<PathBuf>, default_name: &str) -> Result<PathBuf> {
        match explicit {
            Some(p) => Ok(p.clone()),
            None => Ok(self.out_dir()?.join("data").join(default_name)),
        }
    }

    fn threads(&self) -> NonZeroUsize {
        NonZeroUsize::new(self.threads).unwrap_or(NonZeroUsize::MIN)
    }
}

/// Maps an error onto the process exit code.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Policy(_) | Error::Hierarchy(_) | Error::Range(_) => 1,
        Error::NonFinite(_) => 3,
        _ => 2,
    }
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn snapshot(cfg: &RunConfig) -> Result<()> {
    write(&cfg.out_dir()?.join("config.toml"), cfg.to_toml()?)
}

#[derive(Debug, Serialize)]
struct Provenance<'a> {
    seed: u64,
    hierarchy: String,
    synthetic: &'a SyntheticConfig,
    true_marginals: BTreeMap<&'a str, f64>,
}

/// Generates the synthetic train/test split, injected uncertainty and
/// simulated reader points.
pub fn cmd_gen(cfg: &RunConfig) -> Result<()> {
    let seed = cfg.seed()?;
    let out = cfg.out_dir()?;
    let tree = cfg.tree()?;
    let (spec, syn) = cfg.synthetic_spec(&tree)?;

    let (all, marginals) = generate_synthetic(&spec, syn.train_rows + syn.test_rows, seed)?;
    let (train, test) = all.split_at(syn.train_rows);
    let train = inject_uncertainty(&train, syn.uncertainty_rate, rng::derive(seed, &[1]))?;
    let ids: Vec<&str> = tree.ids().collect();
    let readers = simulate_readers(&test.labels, &ids, &syn.readers, seed)?;

    let dir = out.join("data");
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    train.write_labels_csv(&tree, dir.join("train_labels.csv"))?;
    train.write_features_csv(dir.join("train_features.csv"))?;
    test.write_labels_csv(&tree, dir.join("test_labels.csv"))?;
    test.write_features_csv(dir.join("test_features.csv"))?;
    write_reader_points(dir.join("readers.csv"), &readers)?;
    let prov = Provenance {
        seed,
        hierarchy: tree.to_csv(),
        synthetic: syn,
        true_marginals: ids.iter().copied().zip(marginals).collect(),
    };
    let json = serde_json::to_string_pretty(&prov).map_err(|e| Error::Data(e.to_string()))?;
    write(&dir.join("provenance.json"), json + "\n")?;
    snapshot(cfg)
}

#[derive(Debug, Serialize, Deserialize)]
struct EnsembleManifest {
    format: String,
    version: u32,
    mode: Mode,
    policy: String,
    seed: u64,
    members: Vec<String>,
}

/// Trains the ensemble and writes checkpoints and loss logs to
/// `<out>/model`. Nothing is left behind on failure.
pub fn cmd_train(cfg: &RunConfig) -> Result<()> {
    let seed = cfg.seed()?;
    let out = cfg.out_dir()?.to_path_buf();
    let tree = cfg.tree()?;
    let plan = cfg.plan()?;
    if cfg.ensemble_size == 0 {
        return Err(Error::Config("ensemble_size must be >= 1".into()));
    }
    let labels = cfg.data_path(&cfg.data.train_labels, "train_labels.csv")?;
    let features = cfg.data_path(&cfg.data.train_features, "train_features.csv")?;
    let data = load_dataset(&labels, &features, &tree)?;
    if data.is_empty() {
        return Err(Error::Data(format!("{}: no rows", labels.display())));
    }
    let mut dims = vec![data.feature_dim()];
    dims.extend(&cfg.hidden);
    dims.push(tree.len());
    Mlp::zeros(&dims).map_err(|e| Error::Config(e.to_string()))?;

    let runs = train_ensemble(&data, &tree, &plan, &dims, cfg.ensemble_size, seed, cfg.threads())?;

    let staging = out.join("model.partial");
    let finished = out.join("model");
    let result = (|| -> Result<()> {
        if staging.exists() {
            fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
        }
        let mut members = Vec::new();
        for (i, run) in runs.iter().enumerate() {
            let dir = format!("member-{i:02}");
            if let Some(s1) = &run.stage1 {
                write(
                    &staging.join(&dir).join("stage1.json"),
                    encode_checkpoint(&s1.model, Some(&s1.state))?,
                )?;
            }
            let name = if run.stage1.is_some() { "stage2.json" } else { "flat.json" };
            write(
                &staging.join(&dir).join(name),
                encode_checkpoint(&run.last.model, Some(&run.last.state))?,
            )?;
            let mut log = String::from("stage,epoch,steps,lr,mean_loss\n");
            for e in run.log() {
                log.push_str(&format!("{},{},{},{},{}\n", e.stage, e.epoch, e.steps, e.lr, e.mean_loss));
            }
            write(&staging.join(&dir).join("loss.csv"), log)?;
            members.push(format!("{dir}/{name}"));
        }
        write(&staging.join("hierarchy.csv"), tree.to_csv())?;
        let manifest = EnsembleManifest {
            format: ENSEMBLE_FORMAT.into(),
            version: 1,
            mode: plan.mode(),
            policy: plan.policy.to_string(),
            seed,
            members,
        };
        let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Data(e.to_string()))?;
        write(&staging.join("ensemble.json"), json + "\n")?;
        if finished.exists() {
            fs::remove_dir_all(&finished).map_err(|e| Error::io(&finished, e))?;
        }
        fs::rename(&staging, &finished).map_err(|e| Error::io(&finished, e))
    })();
    if result.is_err() {
        let _ = fs::remove_dir_all(&staging);
        return result;
    }
    snapshot(cfg)
}

/// Loads `<dir>/ensemble.json` and its members.
pub fn load_ensemble(dir: impl AsRef<Path>) -> Result<(EnsembleModel, LabelTree)> {
    let dir = dir.as_ref();
    let path = dir.join("ensemble.json");
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: EnsembleManifest =
        serde_json::from_slice(&bytes).map_err(|e| Error::Checkpoint(e.to_string()))?;
    if manifest.format != ENSEMBLE_FORMAT || manifest.version != 1 {
        return Err(Error::Checkpoint(format!("{}: not a version-1 ensemble", path.display())));
    }
    let members = manifest
        .members
        .iter()
        .map(|m| Mlp::load(dir.join(m)).map(|(model, _)| model))
        .collect::<Result<Vec<_>>>()?;
    let tree = LabelTree::load(dir.join("hierarchy.csv"))?;
    Ok((EnsembleModel::new(members, manifest.mode == Mode::Conditional)?, tree))
}

fn predictions_csv(ids: &[String], tree: &LabelTree, preds: &Grid<f64>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let map = |e: csv::Error| Error::Data(e.to_string());
    let mut header = vec!["id".to_string()];
    header.extend(tree.ids().map(str::to_string));
    w.write_record(&header).map_err(map)?;
    for (id, row) in ids.iter().zip(preds.iter_rows()) {
        let mut rec = vec![id.clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(map)?;
    }
    w.into_inner().map_err(|e| Error::Data(e.to_string()))
}

fn run_predict(cfg: &RunConfig) -> Result<PathBuf> {
    let out = cfg.out_dir()?;
    let (ensemble, tree) = load_ensemble(out.join("model"))?;
    let features = cfg.data_path(&cfg.data.test_features, "test_features.csv")?;
    let (ids, x) = load_features(&features)?;
    let preds = ensemble.predict_all(&tree, &x)?;
    let path = out.join("predictions.csv");
    write(&path, predictions_csv(&ids, &tree, &preds)?)?;
    Ok(path)
}

/// Writes `<out>/predictions.csv` for the test features.
pub fn cmd_predict(cfg: &RunConfig) -> Result<()> {
    run_predict(cfg)?;
    snapshot(cfg)
}

/// Reads `id, <label>...` probability rows, keyed by id, columns in tree order.
pub fn load_predictions(path: &Path, tree: &LabelTree) -> Result<HashMap<String, Vec<f64>>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let id_col = headers
        .iter()
        .position(|h| h == "id")
        .ok_or_else(|| Error::Data(format!("{}: missing `id` column", path.display())))?;
    let cols = tree
        .ids()
        .map(|id| {
            headers.iter().position(|h| h == id).ok_or_else(|| {
                Error::Data(format!("{}: missing label column `{id}`", path.display()))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = HashMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let id = rec.get(id_col).unwrap_or("").to_string();
        let row = cols
            .iter()
            .map(|&c| {
                let cell = rec.get(c).unwrap_or("");
                cell.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|p| (0.0..=1.0).contains(p))
                    .ok_or_else(|| Error::Data(format!("{}: bad probability `{cell}`", path.display())))
            })
            .collect::<Result<Vec<_>>>()?;
        out.insert(id, row);
    }
    Ok(out)
}

fn file_stem_for(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect()
}

/// Scores predictions against ground truth and writes the report.
pub fn cmd_eval(cfg: &RunConfig) -> Result<EvalReport> {
    let out = cfg.out_dir()?.to_path_buf();
    let tree = match (&cfg.data.predictions, &cfg.hierarchy) {
        (Some(_), _) | (None, Some(_)) => cfg.tree()?,
        (None, None) => load_ensemble(out.join("model"))?.1,
    };
    let pred_path = match &cfg.data.predictions {
        Some(p) => p.clone(),
        None => run_predict(cfg)?,
    };
    let preds = load_predictions(&pred_path, &tree)?;
    let truth_path = cfg.data_path(&cfg.data.test_labels, "test_labels.csv")?;
    let truth = load_csv(&truth_path, &tree)?;

    let mut per_label = Vec::with_capacity(tree.len());
    for (k, id) in tree.ids().enumerate() {
        let mut scores = Vec::new();
        let mut labels = Vec::new();
        for (i, row_id) in truth.ids.iter().enumerate() {
            let positive = match truth.labels.get(i, k) {
                Label::Pos => true,
                Label::Neg => false,
                _ => continue,
            };
            let p = preds
                .get(row_id)
                .ok_or_else(|| Error::Data(format!("no prediction for row `{row_id}`")))?;
            scores.push(p[k]);
            labels.push(positive);
        }
        per_label.push(LabelScores {
            label: id.to_string(),
            scores,
            truth: labels,
        });
    }

    let readers_path = match &cfg.data.readers {
        Some(p) => Some(p.clone()),
        None => Some(out.join("data").join("readers.csv")).filter(|p| p.exists()),
    };
    let points = match readers_path {
        Some(p) => load_reader_points(p)?,
        None => Vec::new(),
    };
    let report = reader_study(&per_label, &points, &cfg.eval_subset)?;

    let dir = out.join("report");
    write(&dir.join("report.txt"), report.to_text())?;
    write(&dir.join("report.csv"), report.to_csv()?)?;
    write(&dir.join("summary.csv"), report.summary_csv())?;
    for (label, curve) in report.labels.iter().zip(&report.curves) {
        write(&dir.join("roc").join(format!("{}.csv", file_stem_for(label))), curve.to_csv())?;
    }
    snapshot(cfg)?;
    Ok(report)
}

#[derive(Debug, Parser)]
#[command(name = "hierlabel", version, about = "Hierarchy-aware multi-label training and evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic hierarchical dataset
    Gen(RunArgs),
    /// Train the ensemble (two-stage conditional or flat)
    Train(RunArgs),
    /// Write ensemble predictions for the test features
    Predict(RunArgs),
    /// Evaluate predictions: AUC, ROC points, reader comparison
    Eval(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// conditional | flat
    #[arg(long)]
    pub mode: Option<String>,
    /// ignore | ones | zeros | ones-lsr | zeros-lsr
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long)]
    pub lsr_a: Option<f64>,
    #[arg(long)]
    pub lsr_b: Option<f64>,
    #[arg(long)]
    pub threads: Option<usize>,
}

impl RunArgs {
    pub fn config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(&self.config).map_err(|e| match e {
            Error::Io { .. } => Error::Config(e.to_string()),
            other => other,
        })?;
        if let Some(s) = self.seed {
            cfg.seed = Some(s);
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        if let Some(m) = &self.mode {
            cfg.mode = m.parse()?;
        }
        if let Some(p) = &self.policy {
            cfg.policy = PolicyConfig {
                kind: p.parse()?,
                a: None,
                b: None,
            };
        }
        if self.lsr_a.is_some() {
            cfg.policy.a = self.lsr_a;
        }
        if self.lsr_b.is_some() {
            cfg.policy.b = self.lsr_b;
        }
        if let Some(t) = self.threads {
            cfg.threads = t;
        }
        Ok(cfg)
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(&a.config()?),
        Command::Train(a) => cmd_train(&a.config()?),
        Command::Predict(a) => cmd_predict(&a.config()?),
        Command::Eval(a) => {
            let report = cmd_eval(&a.config()?)?;
            print!("{}", report.to_text());
            Ok(())
        }
    }
}

/// Parses arguments, runs the command, and reports errors on stderr.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
