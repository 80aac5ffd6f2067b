//! `hgnet` command line: `gen`, `train` and `inspect`.
//!
//! Data goes to files (or stdout); progress and diagnostics go to stderr.
//! JSON artifacts are written with sorted keys and floats rounded to nine
//! significant digits. Exit codes: 0 success, 1 runtime failure, 2 usage.

use std::ffi::OsString;
use std::fs::File;
use std::hash::Hasher;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fnv::FnvHasher;
use log::{error, info};
use serde::Serialize;
use serde_json::Value;

use crate::autodiff::AdamConfig;
use crate::coarsen::{EdgeScoreParams, PoolOptions};
use crate::datasets::{
    generate_color_connectivity_with, load_citation_csv, make_homophilous_sbm_with, read_dataset,
    sanitized_resample, write_dataset, ColorDataset, GenerationConfig, NodeTask, SbmConfig, SplitCounts, Topology,
};
use crate::error::{Error, Result};
use crate::graph::{load_road_network, Graph};
use crate::hierarchy::{build_hierarchy, hierarchy_stats_with, verify_bounds_with, EdgePoolParams, HierarchySpec, RoutingProbe};
use crate::models::{
    cross_validate, stratified_split, train_graph_classifier, train_node_classifier, GraphDataset, Head, ModelConfig,
    ModelKind, RunResult,
};
use crate::tensor::Matrix;

#[derive(Debug, Parser)]
#[command(name = "hgnet", version, about = "Hierarchical graph networks: data generation, training and hierarchy inspection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a color-connectivity dataset (JSON Lines).
    Gen(GenArgs),
    /// Train a model and write its run report.
    Train(TrainArgs),
    /// Build a hierarchy and report its size and routing bounds.
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    /// grid16, grid32, euroroad, minnesota or file:PATH
    #[arg(long)]
    topology: String,
    /// Number of samples (even)
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Directory holding road-network edge lists [env: HGNET_DATA]
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Give up after this many draws per requested sample
    #[arg(long, default_value_t = 1000)]
    attempts_per_sample: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Task {
    Graph,
    Node,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Gcn,
    GcnVn,
    HgnetEdgepool,
    HgnetLouvain,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Gcn => ModelKind::Gcn,
            ModelArg::GcnVn => ModelKind::GcnVn,
            ModelArg::HgnetEdgepool => ModelKind::HgnetEdgePool,
            ModelArg::HgnetLouvain => ModelKind::HgnetLouvain,
        }
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long, value_enum, default_value_t = Task::Graph)]
    task: Task,
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Hierarchy levels (HGNet) or stacked layers (baselines)
    #[arg(long, visible_alias = "layers", default_value_t = 2)]
    levels: usize,
    #[arg(long, default_value_t = 32)]
    hidden: usize,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Graph task: dataset JSONL. Node task: directory with nodes.csv and
    /// edges.csv, or sbm:N_PER_CLASS,CLASSES,P_IN,P_OUT[,NOISE]
    #[arg(long)]
    data: Option<String>,
    /// Graph task: generate the dataset instead of reading --data
    #[arg(long, conflicts_with = "data")]
    topology: Option<String>,
    /// Samples to generate with --topology
    #[arg(long, requires = "topology")]
    n: Option<usize>,
    /// Seed for dataset generation with --topology (default: --seed)
    #[arg(long, requires = "topology")]
    data_seed: Option<u64>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Stratified K-fold cross-validation (graph task)
    #[arg(long)]
    cv: Option<usize>,
    /// Folds trained concurrently
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Node task: sanitization radius of the resampled split
    #[arg(long, default_value_t = 0)]
    k_hop: usize,
    #[arg(long, default_value_t = 20)]
    train_per_class: usize,
    #[arg(long, default_value_t = 500)]
    val: usize,
    #[arg(long, default_value_t = 1000)]
    test: usize,
    /// Seed of the data split (default: --seed)
    #[arg(long)]
    split_seed: Option<u64>,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    /// Hidden width of the graph-task MLP head
    #[arg(long, default_value_t = 128)]
    mlp_hidden: usize,
    #[arg(long)]
    share_pool_params: bool,
    /// Record wall-clock seconds in the report (makes it run-dependent)
    #[arg(long)]
    timing: bool,
    /// Report path; stdout when absent. Cross-validation also writes PATH.csv
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Edgepool,
    Louvain,
}

#[derive(Debug, Args)]
struct InspectArgs {
    /// grid16, grid32, euroroad, minnesota or file:PATH
    #[arg(long)]
    topology: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Edgepool)]
    method: MethodArg,
    /// Coarsening rounds; until the graph stops shrinking when absent
    #[arg(long)]
    levels: Option<usize>,
    /// Matched-fraction parameter of the bound check
    #[arg(long, default_value_t = 2.0)]
    m: f64,
    /// Louvain seed, or the seed of random EdgePool scoring with --random-scores
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Score edges from seeded random features and weights instead of
    /// uniform scores
    #[arg(long)]
    random_scores: bool,
    /// Routed-hop check on this many sampled pairs instead of all pairs
    #[arg(long)]
    sample_pairs: Option<usize>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and maps the
/// outcome to an exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let command_line: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let res = match cli.command {
        Command::Gen(a) => cmd_gen(&a, &command_line),
        Command::Train(a) => cmd_train(&a, &command_line),
        Command::Inspect(a) => cmd_inspect(&a, &command_line),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Usage(_)) => {
            error!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            error!("{e}");
            ExitCode::from(1)
        }
    }
}

/// Rounds a float to nine significant digits.
fn round_sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

fn canonicalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            serde_json::Number::from_f64(round_sig9(n.as_f64().unwrap())).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(canonicalize).collect()),
        // serde_json's map is ordered by key
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonicalize(v))).collect()),
        other => other,
    }
}

/// Pretty JSON with sorted keys and nine-significant-digit floats.
pub fn canonical_json(value: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&canonicalize(serde_json::to_value(value)?))?;
    s.push('\n');
    Ok(s)
}

/// 64-bit FNV-1a digest of a file, as 16 hex digits.
pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let mut h = FnvHasher::default();
    h.write(&bytes);
    Ok(format!("{:016x}", h.finish()))
}

#[derive(Serialize)]
struct FileRecord {
    digest: String,
    path: String,
}

#[derive(Serialize)]
struct RunManifest {
    artifacts: Vec<FileRecord>,
    command_line: Vec<String>,
    config: Value,
    inputs: Vec<FileRecord>,
    seeds: Vec<u64>,
    tool_version: String,
}

fn record(path: &Path) -> Result<FileRecord> {
    Ok(FileRecord { digest: file_digest(path)?, path: path.display().to_string() })
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_manifest(
    out: &Path,
    command_line: &[String],
    config: Value,
    seeds: Vec<u64>,
    inputs: &[&Path],
    artifacts: &[&Path],
) -> Result<()> {
    let m = RunManifest {
        artifacts: artifacts.iter().map(|p| record(p)).collect::<Result<_>>()?,
        command_line: command_line.to_vec(),
        config,
        inputs: inputs.iter().map(|p| record(p)).collect::<Result<_>>()?,
        seeds,
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
    };
    let path = manifest_path(out);
    std::fs::write(&path, canonical_json(&m)?)?;
    info!("manifest written to {}", path.display());
    Ok(())
}

fn data_dir(arg: &Option<PathBuf>) -> Option<PathBuf> {
    arg.clone().or_else(|| std::env::var_os("HGNET_DATA").map(PathBuf::from))
}

fn load_topology(spec: &str, dir: &Option<PathBuf>) -> Result<(Topology, Graph)> {
    let t = Topology::parse(spec).map_err(|e| Error::usage(e.to_string()))?;
    let g = t.load(data_dir(dir).as_deref())?;
    Ok((t, g))
}

fn topology_inputs(t: &Topology, dir: &Option<PathBuf>) -> Vec<PathBuf> {
    match t {
        Topology::File(p) => vec![p.clone()],
        Topology::Euroroad | Topology::Minnesota => data_dir(dir)
            .map(|d| {
                vec![d.join(if *t == Topology::Euroroad { "road-euroroad.edges" } else { "road-minnesota.edges" })]
            })
            .unwrap_or_default(),
        _ => Vec::new(),
    }
}

fn generate(spec: &str, n: usize, seed: u64, dir: &Option<PathBuf>, attempts: usize) -> Result<(ColorDataset, Vec<PathBuf>)> {
    if !n.is_multiple_of(2) {
        return Err(Error::usage(format!("--n {n} must be even")));
    }
    let (t, g) = load_topology(spec, dir)?;
    let topology = Arc::new(g);
    info!("generating {n} samples over {} ({} nodes, {} edges)", t, topology.num_nodes(), topology.num_edges());
    let cfg = GenerationConfig { attempts_per_sample: attempts };
    let samples = generate_color_connectivity_with(&topology, n, seed, &cfg)?;
    Ok((ColorDataset { topology_id: t.to_string(), topology, samples }, topology_inputs(&t, dir)))
}

fn cmd_gen(a: &GenArgs, command_line: &[String]) -> Result<()> {
    let (ds, inputs) = generate(&a.topology, a.n, a.seed, &a.data_dir, a.attempts_per_sample)?;
    let mut w = BufWriter::new(File::create(&a.out)?);
    write_dataset(&ds, &mut w)?;
    drop(w);
    info!("wrote {} samples to {}", ds.samples.len(), a.out.display());
    let config = serde_json::json!({
        "attempts_per_sample": a.attempts_per_sample,
        "n": a.n,
        "topology": a.topology,
    });
    let inputs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    write_manifest(&a.out, command_line, config, vec![a.seed], &inputs, &[&a.out])
}

fn model_config(a: &TrainArgs) -> ModelConfig {
    let head = match a.task {
        Task::Graph => Head::GraphMlp(a.mlp_hidden),
        Task::Node => Head::NodeLinear,
    };
    let mut c = ModelConfig::new(a.model.into(), a.levels, head);
    c.hidden = a.hidden;
    c.epochs = a.epochs;
    c.seed = a.seed;
    c.batch_size = a.batch_size;
    c.optimizer = AdamConfig { lr: a.lr, ..AdamConfig::default() };
    c.share_pool_params = a.share_pool_params;
    c
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut o = std::io::stdout().lock();
            o.write_all(text.as_bytes())?;
            o.flush()?;
        }
    }
    Ok(())
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn cv_csv(results: &[RunResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["fold", "seed", "selected_epoch", "val_metric", "test_metric"]).map_err(csv_err)?;
    let f = |x: f64| format!("{}", round_sig9(x));
    for (i, r) in results.iter().enumerate() {
        let val = r.val_trace.get(r.selected_epoch.saturating_sub(1)).copied().unwrap_or(0.0);
        w.write_record([i.to_string(), r.seed.to_string(), r.selected_epoch.to_string(), f(val), f(r.test_metric)])
            .map_err(csv_err)?;
    }
    let vals: Vec<f64> =
        results.iter().map(|r| r.val_trace.get(r.selected_epoch.saturating_sub(1)).copied().unwrap_or(0.0)).collect();
    let tests: Vec<f64> = results.iter().map(|r| r.test_metric).collect();
    let (vm, vs) = mean_std(&vals);
    let (tm, ts) = mean_std(&tests);
    w.write_record(["mean±std".to_owned(), String::new(), String::new(), format!("{}±{}", f(vm), f(vs)), format!("{}±{}", f(tm), f(ts))])
        .map_err(csv_err)?;
    String::from_utf8(w.into_inner().map_err(|e| Error::input(e.to_string()))?).map_err(|e| Error::input(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::input(e.to_string())
}

fn parse_sbm(spec: &str, seed: u64) -> Result<SbmConfig> {
    let parts: Vec<&str> = spec.split(',').collect();
    let bad = || Error::usage(format!("expected sbm:N_PER_CLASS,CLASSES,P_IN,P_OUT[,NOISE], got `sbm:{spec}`"));
    if !(4..=5).contains(&parts.len()) {
        return Err(bad());
    }
    let mut c = SbmConfig::new(
        parts[0].parse().map_err(|_| bad())?,
        parts[1].parse().map_err(|_| bad())?,
        parts[2].parse().map_err(|_| bad())?,
        parts[3].parse().map_err(|_| bad())?,
        seed,
    );
    if let Some(noise) = parts.get(4) {
        c.feature_noise = noise.parse().map_err(|_| bad())?;
    }
    Ok(c)
}

fn finalize(mut r: RunResult, timing: bool) -> RunResult {
    info!("{} finished in {:.1}s", r.config.model, r.seconds);
    if !timing {
        r.seconds = 0.0;
    }
    r
}

fn cmd_train(a: &TrainArgs, command_line: &[String]) -> Result<()> {
    let cfg = model_config(a);
    cfg.validate()?;
    let split_seed = a.split_seed.unwrap_or(a.seed);
    let mut inputs: Vec<PathBuf> = Vec::new();
    let config_echo = serde_json::to_value(&cfg)?;
    let mut seeds = vec![a.seed, split_seed];
    match a.task {
        Task::Graph => {
            let ds = match (&a.data, &a.topology) {
                (Some(path), None) => {
                    let p = PathBuf::from(path);
                    let ds = read_dataset(BufReader::new(File::open(&p)?)).map_err(|e| match e {
                        Error::Input(msg) | Error::Parse { msg, .. } => Error::Parse { path: p.clone(), msg },
                        Error::Json(e) => Error::Parse { path: p.clone(), msg: e.to_string() },
                        other => other,
                    })?;
                    if let Some(i) = ds.first_mislabeled() {
                        return Err(Error::Parse { path: p, msg: format!("sample {i}: stored label disagrees with its coloring") });
                    }
                    inputs.push(PathBuf::from(path));
                    ds
                }
                (None, Some(t)) => {
                    let n = a.n.ok_or_else(|| Error::usage("--topology needs --n"))?;
                    let data_seed = a.data_seed.unwrap_or(a.seed);
                    seeds.push(data_seed);
                    let (ds, files) = generate(t, n, data_seed, &a.data_dir, 1000)?;
                    inputs.extend(files);
                    ds
                }
                _ => return Err(Error::usage("graph task needs --data FILE or --topology T --n N")),
            };
            let ds = GraphDataset::from(&ds);
            info!("{} graphs, {} classes", ds.samples.len(), ds.num_classes());
            let text = match a.cv {
                Some(k) => {
                    let results: Vec<RunResult> =
                        cross_validate(&ds, &cfg, k, a.jobs)?.into_iter().map(|r| finalize(r, a.timing)).collect();
                    if let Some(out) = &a.out {
                        let csv_path = PathBuf::from(format!("{}.csv", out.display()));
                        std::fs::write(&csv_path, cv_csv(&results)?)?;
                        let text = canonical_json(&serde_json::json!({ "folds": results }))?;
                        std::fs::write(out, &text)?;
                        let inputs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
                        return write_manifest(out, command_line, config_echo, seeds, &inputs, &[out, &csv_path]);
                    }
                    print!("{}", cv_csv(&results)?);
                    return Ok(());
                }
                None => {
                    let split = stratified_split(&ds.labels(), 0.8, 0.1, split_seed)?;
                    canonical_json(&finalize(train_graph_classifier(&ds, &split, &cfg)?.result, a.timing))?
                }
            };
            emit(a.out.as_deref(), &text)?;
        }
        Task::Node => {
            if a.cv.is_some() {
                return Err(Error::usage("--cv applies to the graph task only"));
            }
            let data = a.data.as_deref().ok_or_else(|| Error::usage("node task needs --data DIR or --data sbm:..."))?;
            let task: NodeTask = match data.strip_prefix("sbm:") {
                Some(spec) => make_homophilous_sbm_with(&parse_sbm(spec, a.data_seed.unwrap_or(a.seed))?)?,
                None => {
                    let dir = PathBuf::from(data);
                    let (n, e) = (dir.join("nodes.csv"), dir.join("edges.csv"));
                    let t = load_citation_csv(&n, &e)?;
                    inputs.extend([n, e]);
                    t
                }
            };
            let counts = SplitCounts { train_per_class: a.train_per_class, val: a.val, test: a.test };
            let split = sanitized_resample(&task.graph, &task.labels, a.k_hop, counts, split_seed)?;
            let r = finalize(train_node_classifier(&task, &split, &cfg)?.result, a.timing);
            emit(a.out.as_deref(), &canonical_json(&r)?)?;
        }
    }
    if let Some(out) = &a.out {
        let inputs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
        write_manifest(out, command_line, config_echo, seeds, &inputs, &[out])?;
    }
    Ok(())
}

#[derive(Serialize)]
struct InspectReport {
    bounds: crate::hierarchy::BoundsReport,
    graph: GraphSummary,
    inter_edges: usize,
    levels: Vec<LevelSummary>,
    levels_requested: Option<usize>,
    max_routed_hops: usize,
    method: crate::hierarchy::CoarseningMethod,
    seed: u64,
    stats: crate::hierarchy::HierarchyStats,
}

const SCORE_BINS: usize = 10;

#[derive(Serialize)]
struct LevelSummary {
    edges: usize,
    nodes: usize,
    /// Merge scores of contracted edges that produced this level, binned
    /// uniformly over `[0.5, 1.5]`. Absent for level 0 and Louvain levels.
    #[serde(skip_serializing_if = "Option::is_none")]
    score_histogram: Option<Vec<usize>>,
}

fn level_summaries(h: &crate::hierarchy::Hierarchy) -> Vec<LevelSummary> {
    h.levels
        .iter()
        .enumerate()
        .map(|(l, g)| {
            let score_histogram = l.checked_sub(1).map(|s| &h.steps[s]).filter(|s| s.merged_edge.iter().any(Option::is_some)).map(|step| {
                let mut bins = vec![0; SCORE_BINS];
                for (score, e) in step.merge_scores.iter().zip(&step.merged_edge) {
                    if e.is_some() {
                        let b = ((score - 0.5) * SCORE_BINS as f64).floor().clamp(0.0, (SCORE_BINS - 1) as f64);
                        bins[b as usize] += 1;
                    }
                }
                bins
            });
            LevelSummary { edges: g.num_edges(), nodes: g.num_nodes(), score_histogram }
        })
        .collect()
}

#[derive(Serialize)]
struct GraphSummary {
    edges: usize,
    nodes: usize,
    topology: String,
}

fn cmd_inspect(a: &InspectArgs, command_line: &[String]) -> Result<()> {
    let (t, g) = match a.topology.strip_prefix("file:") {
        Some(p) => (Topology::File(p.into()), load_road_network(p)?),
        None => load_topology(&a.topology, &a.data_dir)?,
    };
    let levels = a.levels.unwrap_or(usize::MAX);
    let built = match a.method {
        MethodArg::Louvain => build_hierarchy(&g, levels, HierarchySpec::Louvain { seed: a.seed, features: None, pool: PoolOptions::default() })?,
        MethodArg::Edgepool => {
            let (x, p) = if a.random_scores {
                use rand::Rng as _;
                let mut r = crate::rng::rng(a.seed);
                let x = Matrix::from_vec(g.num_nodes(), 1, (0..g.num_nodes()).map(|_| r.random::<f64>()).collect())?;
                (x, EdgeScoreParams { w: vec![r.random::<f64>() - 0.5, r.random::<f64>() - 0.5], b: 0.0 })
            } else {
                (Matrix::filled(g.num_nodes(), 1, 1.0), EdgeScoreParams::zeros(1))
            };
            build_hierarchy(&g, levels, HierarchySpec::EdgePool { features: &x, params: EdgePoolParams::Shared(&p) })?
        }
    };
    let h = built.hierarchy;
    let probe = match a.sample_pairs {
        Some(pairs) => RoutingProbe::Sampled { pairs, seed: a.seed },
        None => RoutingProbe::Exhaustive,
    };
    let stats = hierarchy_stats_with(&h, probe);
    let bounds = verify_bounds_with(&h, a.m, &stats).map_err(|e| Error::usage(e.to_string()))?;
    info!("levels {:?}, max routed hops {}", stats.per_level_sizes, stats.max_routed_hops);
    let report = InspectReport {
        bounds,
        graph: GraphSummary { edges: g.num_edges(), nodes: g.num_nodes(), topology: t.to_string() },
        inter_edges: stats.total_inter_edges,
        levels: level_summaries(&h),
        levels_requested: a.levels,
        max_routed_hops: stats.max_routed_hops,
        method: h.method,
        seed: a.seed,
        stats,
    };
    emit(a.out.as_deref(), &canonical_json(&report)?)?;
    if let Some(out) = &a.out {
        let inputs = topology_inputs(&t, &a.data_dir);
        let inputs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
        let config = serde_json::json!({
            "levels": a.levels,
            "m": a.m,
            "method": format!("{:?}", a.method).to_lowercase(),
            "random_scores": a.random_scores,
            "sample_pairs": a.sample_pairs,
            "topology": a.topology,
        });
        write_manifest(out, command_line, config, vec![a.seed], &inputs, &[out])?;
    }
    Ok(())
}
