use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use morse::artifact::{save_baseline, AnyModel};
use morse::bench::benchmark_inference;
use morse::config::{CliConfig, Flags};
use morse::csv_io::{load_dataset, load_samples, save_dataset, save_features};
use morse::infer::{gesture_script, infer_stream};
use morse::model_file::{load_model, save_model, TrainingSummary};
use morse::report::{loso_json, loso_parallel, loso_table};
use morse::{Error, Result, LONG_VERSION};
use morse_core::baselines::{BaselineConfig, BaselineKind, BaselineLearner, BaselineModel};
use morse_core::loso::CnnLearner;
use morse_core::mesh::{parse_script, watch_panel, ScriptLine, SimConfig, Simulator};
use morse_core::metrics::{confusion_and_f1, project_false_positives, WINDOWS_PER_HOUR};
use morse_core::morse::{gesture_to_morse, morse_to_timeline_with, Timing, DEFAULT_INTRA_GAP_MS};
use morse_core::nn::{GlobalPoolKind, Model, ModelSpec, Variant};
use morse_core::norm::compute_norm_stats;
use morse_core::synth::{gen_dataset, GenConfig, DEFAULT_NOISE, RNG_NAME};
use morse_core::train::{TrainConfig, DESK_MAX_EPOCHS, DESK_MIN_EPOCHS, DESK_PATIENCE};
use morse_core::{Dataset, GestureLabel, LabeledWindow};

/// MoRSE arm-gesture pipeline: data, training, evaluation, Morse output and broadcast simulation.
#[derive(Parser)]
#[command(name = "morse", version = LONG_VERSION)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct GlobalArgs {
    /// Master seed (overrides MORSE_SEED and the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for cross-validation (overrides MORSE_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Optional `key = value` file with seed, threads, precision, verbosity.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Progress on stderr; repeat for more.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    CnnLp,
    CnnMax,
    Lr,
    Knn,
    Dt,
    Rf,
}

impl ModelArg {
    fn variant(self) -> Option<Variant> {
        match self {
            ModelArg::CnnLp => Some(Variant::CnnLp),
            ModelArg::CnnMax => Some(Variant::CnnMax),
            _ => None,
        }
    }

    fn baseline(self) -> Option<BaselineKind> {
        match self {
            ModelArg::Lr => Some(BaselineKind::Lr),
            ModelArg::Knn => Some(BaselineKind::Knn),
            ModelArg::Dt => Some(BaselineKind::Dt),
            ModelArg::Rf => Some(BaselineKind::Rf),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PoolArg {
    Avg,
    Max,
}

#[derive(Args)]
struct TrainArgs {
    /// Epochs before early stopping may trigger.
    #[arg(long, default_value_t = DESK_MIN_EPOCHS)]
    min_epochs: usize,
    /// Epochs without validation improvement that stop training.
    #[arg(long, default_value_t = DESK_PATIENCE)]
    patience: usize,
    #[arg(long, default_value_t = DESK_MAX_EPOCHS)]
    max_epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    /// Full schedule: at least 2000 epochs, patience 200.
    #[arg(long, conflicts_with_all = ["min_epochs", "patience", "max_epochs"])]
    paper_epochs: bool,
    /// Global pooling before the dense head.
    #[arg(long, value_enum, default_value_t = PoolArg::Avg)]
    global_pool: PoolArg,
}

impl TrainArgs {
    fn cnn(&self, variant: Variant) -> CnnLearner {
        let mut l = CnnLearner::new(variant);
        l.train = if self.paper_epochs {
            TrainConfig { batch_size: self.batch_size, ..TrainConfig::paper(0) }
        } else {
            TrainConfig {
                min_epochs: self.min_epochs,
                patience: self.patience,
                max_epochs: self.max_epochs,
                batch_size: self.batch_size,
                seed: 0,
            }
        };
        l.global_pool = match self.global_pool {
            PoolArg::Avg => GlobalPoolKind::Avg,
            PoolArg::Max => GlobalPoolKind::Max,
        };
        l
    }
}

#[derive(Args)]
struct SimArgs {
    /// Radio range in metres.
    #[arg(long, default_value_t = 30.0)]
    range: f64,
    /// Per-link loss probability.
    #[arg(long, default_value_t = 0.0)]
    drop: f64,
    #[arg(long, default_value_t = 50)]
    latency: u64,
    /// Allow re-sending the same signal after this many ms.
    #[arg(long)]
    dedup_timeout: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_INTRA_GAP_MS)]
    intra_gap_ms: u32,
}

impl SimArgs {
    fn config(&self, seed: u64) -> SimConfig {
        SimConfig {
            radio_range_m: self.range,
            drop_prob: self.drop,
            latency_ms: self.latency,
            seed,
            dedup_timeout_ms: self.dedup_timeout,
            timing: Timing { intra_gap_ms: self.intra_gap_ms, ..Timing::default() },
            ..SimConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic labeled dataset CSV.
    Gen {
        #[arg(long, default_value_t = 7)]
        subjects: u32,
        #[arg(long, default_value_t = 100)]
        per_class: usize,
        /// Use the recorded per-subject class counts (7 subjects max).
        #[arg(long)]
        table3: bool,
        /// Sensor noise standard deviation.
        #[arg(long, default_value_t = DEFAULT_NOISE)]
        noise: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the 42 time-domain features of every window.
    Features {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one model and save it.
    Train {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Subject used for early stopping (default: highest remaining id).
        #[arg(long)]
        val_subject: Option<u32>,
        /// Subject left out of training entirely.
        #[arg(long)]
        test_subject: Option<u32>,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Leave-one-subject-out cross-validation.
    Loso {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        #[arg(long = "in")]
        input: PathBuf,
        /// JSON report path.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Evaluate a saved model on a dataset and print metrics JSON.
    Eval {
        #[arg(long)]
        model_file: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        /// Only these subjects (comma separated).
        #[arg(long, value_delimiter = ',')]
        subjects: Vec<u32>,
        /// Signals below this confidence fall back to Random.
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
    },
    /// Recognize gestures once per second in a t_ms,ax,..,gz stream.
    Infer {
        #[arg(long)]
        model_file: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
        /// Feed predictions as this node into a broadcast simulation.
        #[arg(long)]
        mesh_node: Option<String>,
        /// Extra scenario lines for the other nodes.
        #[arg(long, requires = "mesh_node")]
        scenario: Option<PathBuf>,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Describe a model, or dump one layer's activations as CSV.
    Inspect {
        #[arg(long)]
        model_file: PathBuf,
        /// Layer index to dump.
        #[arg(long, requires = "input")]
        layer: Option<usize>,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Row of the dataset to feed.
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// Sensor row of 2-D activations.
        #[arg(long, default_value_t = 0)]
        row: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a gesture's Morse code and vibration timeline.
    Morse {
        #[arg(long)]
        gesture: String,
        #[arg(long)]
        timeline: bool,
        #[arg(long, default_value_t = DEFAULT_INTRA_GAP_MS)]
        intra_gap_ms: u32,
    },
    /// Run a broadcast scenario script and print its event log.
    Simulate {
        #[arg(long)]
        script: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
        /// Render this node's Messages panel after the log.
        #[arg(long)]
        watch: Option<String>,
        /// Time at which to render the panel (default: end of scenario).
        #[arg(long, requires = "watch")]
        at: Option<u64>,
        /// Append one final-state line per node.
        #[arg(long)]
        summary: bool,
    },
    /// Time single-window inference.
    Bench {
        /// Saved model; a freshly initialized network otherwise.
        #[arg(long)]
        model_file: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ModelArg::CnnLp, conflicts_with = "model_file")]
        model: ModelArg,
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
}

fn out_json(v: &serde_json::Value) -> Result<()> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Error::BadModel(e.to_string()))?;
    let mut o = io::stdout().lock();
    writeln!(o, "{s}")?;
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn select<'a>(d: &'a Dataset, ids: &[u32]) -> Vec<&'a LabeledWindow> {
    d.samples.iter().filter(|s| ids.contains(&s.subject_id)).collect()
}

fn train_cmd(
    cfg: &CliConfig,
    model: ModelArg,
    input: &Path,
    out: &Path,
    val_subject: Option<u32>,
    test_subject: Option<u32>,
    args: &TrainArgs,
) -> Result<()> {
    let d = load_dataset(input)?;
    let mut ids = d.subjects();
    if let Some(t) = test_subject {
        if !ids.contains(&t) {
            return Err(Error::Usage(format!("test subject {t} is not in the dataset")));
        }
        ids.retain(|&s| s != t);
    }
    if let Some(v) = model.variant() {
        let val = match val_subject {
            Some(v) if ids.contains(&v) => v,
            Some(v) => return Err(Error::Usage(format!("validation subject {v} is not available"))),
            None => *ids.last().ok_or_else(|| Error::Usage("no subjects left".into()))?,
        };
        ids.retain(|&s| s != val);
        if ids.is_empty() {
            return Err(Error::Usage("need at least one training subject besides the validation subject".into()));
        }
        let (train, val_set) = (select(&d, &ids), select(&d, &[val]));
        let norm = compute_norm_stats(train.iter().map(|s| &s.window))?;
        let learner = args.cnn(v);
        let (m, h) = learner.fit(&train, &val_set, norm, cfg.seed)?;
        let summary = TrainingSummary::from_history(&h, ids.clone(), vec![val], cfg.seed);
        save_model(out, &m, Some(summary.clone()))?;
        out_json(&json!({
            "model": v.tag(), "out": out, "param_count": m.param_count(),
            "training": summary, "learner": learner, "config": cfg,
        }))
    } else {
        let kind = model.baseline().expect("non-CNN models are baselines");
        let train = select(&d, &ids);
        let norm = compute_norm_stats(train.iter().map(|s| &s.window))?;
        let bcfg = BaselineConfig::new(kind);
        let m = BaselineModel::fit(&bcfg, &train, norm, cfg.seed)?;
        save_baseline(out, &m)?;
        out_json(&json!({
            "model": kind.tag(), "out": out, "train_subjects": ids, "learner": bcfg, "config": cfg,
        }))
    }
}

fn loso_cmd(
    cfg: &CliConfig,
    model: ModelArg,
    runs: usize,
    input: &Path,
    report: Option<&Path>,
    args: &TrainArgs,
) -> Result<()> {
    let d = load_dataset(input)?;
    let pool = cfg.pool()?;
    let (r, text) = if let Some(v) = model.variant() {
        let l = args.cnn(v);
        let r = loso_parallel(&pool, &d, &l, runs, cfg.seed)?;
        let text = loso_json(&r, cfg, &l)?;
        (r, text)
    } else {
        let l = BaselineLearner { cfg: BaselineConfig::new(model.baseline().expect("baseline")) };
        let r = loso_parallel(&pool, &d, &l, runs, cfg.seed)?;
        let text = loso_json(&r, cfg, &l.cfg)?;
        (r, text)
    };
    if let Some(p) = report {
        write_file(p, &(text + "\n"))?;
    }
    print!("{}", loso_table(&r));
    Ok(())
}

fn eval_cmd(cfg: &CliConfig, model_file: &Path, input: &Path, subjects: &[u32], threshold: f64) -> Result<()> {
    let m = AnyModel::load(model_file)?;
    let d = load_dataset(input)?;
    let chosen: Vec<&LabeledWindow> =
        if subjects.is_empty() { d.samples.iter().collect() } else { select(&d, subjects) };
    if chosen.is_empty() {
        return Err(Error::Usage("no windows match the selected subjects".into()));
    }
    let truth: Vec<GestureLabel> = chosen.iter().map(|s| s.label).collect();
    let pred: Vec<GestureLabel> = chosen.iter().map(|s| m.predict(&s.window, threshold).label).collect();
    let metrics = confusion_and_f1(&truth, &pred)?;
    out_json(&json!({
        "model": m.name(), "n": chosen.len(), "threshold": threshold,
        "fp_per_hour": project_false_positives(&metrics, WINDOWS_PER_HOUR),
        "metrics": metrics, "config": cfg,
    }))
}

#[allow(clippy::too_many_arguments)]
fn infer_cmd(
    cfg: &CliConfig,
    model_file: &Path,
    input: &Path,
    threshold: f64,
    mesh_node: Option<&str>,
    scenario: Option<&Path>,
    sim: &SimArgs,
) -> Result<()> {
    let m = AnyModel::load(model_file)?;
    let stream = load_samples(input)?;
    let emitted = infer_stream(&m, &stream, threshold)?;
    let mut o = io::stdout().lock();
    for e in &emitted {
        writeln!(o, "{}", e.line())?;
    }
    if let Some(node) = mesh_node {
        let mut lines: Vec<ScriptLine> = match scenario {
            Some(p) => parse_script(&fs::read_to_string(p).map_err(|e| Error::io(p, e))?)?,
            None => Vec::new(),
        };
        lines.extend(gesture_script(node, &emitted));
        // Stable sort keeps script lines ahead of same-time predictions.
        lines.sort_by_key(|l| l.t_ms);
        let r = morse_core::mesh::run_scenario(&lines, &sim.config(cfg.seed))?;
        write!(o, "{}", r.log_text())?;
    }
    Ok(())
}

fn inspect_cmd(
    model_file: &Path,
    layer: Option<usize>,
    input: Option<&Path>,
    index: usize,
    row: usize,
    out: Option<&Path>,
) -> Result<()> {
    let (m, header) = load_model(model_file)?;
    let Some(layer) = layer else {
        let mut o = io::stdout().lock();
        writeln!(o, "variant {}", header.variant.map_or("custom", |v| v.tag()))?;
        writeln!(o, "input {}", header.input)?;
        for (i, e) in header.layers.iter().enumerate() {
            writeln!(o, "{i} {} {} {}", e.layer.name(), e.output, e.params)?;
        }
        writeln!(o, "params {}", header.param_count)?;
        return Ok(());
    };
    let input = input.ok_or_else(|| Error::Usage("--layer needs --in".into()))?;
    let d = load_dataset(input)?;
    let sample = d
        .samples
        .get(index)
        .ok_or_else(|| Error::Usage(format!("index {index} out of range ({} windows)", d.len())))?;
    let acts = m.dump_activations(&sample.window, layer, row)?;
    let width = acts.first().map_or(0, Vec::len);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut head = vec!["channel".to_string()];
    head.extend((0..width).map(|t| format!("t{t:03}")));
    w.write_record(&head).map_err(Error::from)?;
    for (c, series) in acts.iter().enumerate() {
        let mut rec = vec![c.to_string()];
        rec.extend(series.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Stream(e.into_error()))?;
    match out {
        Some(p) => fs::write(p, bytes).map_err(|e| Error::io(p, e)),
        None => Ok(io::stdout().lock().write_all(&bytes)?),
    }
}

fn morse_cmd(gesture: &str, timeline: bool, intra_gap_ms: u32) -> Result<()> {
    let g: GestureLabel = gesture.parse()?;
    let code = gesture_to_morse(g)?;
    let mut o = io::stdout().lock();
    writeln!(o, "{code}")?;
    if timeline {
        let t = morse_to_timeline_with(&code, &Timing { intra_gap_ms, ..Timing::default() })?;
        writeln!(o, "{t}")?;
    }
    Ok(())
}

fn simulate_cmd(
    cfg: &CliConfig,
    script: &Path,
    sim: &SimArgs,
    watch: Option<&str>,
    at: Option<u64>,
    summary: bool,
) -> Result<()> {
    let text = fs::read_to_string(script).map_err(|e| Error::io(script, e))?;
    let lines = parse_script(&text)?;
    let scfg = sim.config(cfg.seed);
    let r = morse_core::mesh::run_scenario(&lines, &scfg)?;
    let mut o = io::stdout().lock();
    write!(o, "{}", r.log_text())?;
    if summary {
        for l in r.summary() {
            writeln!(o, "final {l}")?;
        }
    }
    if let Some(id) = watch {
        let (node, now) = match at {
            Some(t) => {
                let mut s = Simulator::new(scfg)?;
                for l in &lines {
                    s.schedule(l);
                }
                s.run_until(t)?;
                (s.nodes().get(id).cloned(), t)
            }
            None => (r.nodes.get(id).cloned(), r.end_ms),
        };
        let node = node.ok_or_else(|| Error::Usage(format!("node {id:?} does not appear in the script")))?;
        write!(o, "{}", watch_panel(&node, now))?;
    }
    Ok(())
}

fn bench_cmd(cfg: &CliConfig, model_file: Option<&Path>, model: ModelArg, n: usize) -> Result<()> {
    let m = match model_file {
        Some(p) => AnyModel::load(p)?,
        None => {
            let v = model.variant().ok_or_else(|| Error::Usage("--model must be a CNN without --model-file".into()))?;
            let spec = ModelSpec::standard(v, GlobalPoolKind::Avg, morse_core::NormStats::IDENTITY, cfg.seed);
            let model = Model::new(spec)?;
            let header = morse::model_file::ModelHeader::describe(&model, None);
            AnyModel::Cnn { model, header }
        }
    };
    let windows: Vec<_> = if n == 0 {
        Vec::new()
    } else {
        let per_class = n.div_ceil(6);
        let d = gen_dataset(&GenConfig { n_subjects: 1, per_class, seed: cfg.seed, ..GenConfig::default() })?;
        d.samples.into_iter().take(n).map(|s| s.window).collect()
    };
    let stats = benchmark_inference(&windows, |w| m.predict(w, 0.0))?;
    // Timings vary run to run, so this report goes to stdout only.
    out_json(&json!({ "model": m.name(), "latency": stats, "config": cfg }))
}

fn run(cli: Cli) -> Result<()> {
    let flags = Flags {
        seed: cli.global.seed,
        threads: cli.global.threads,
        verbosity: (cli.global.verbose > 0).then_some(cli.global.verbose),
        config_file: cli.global.config.clone(),
    };
    let cfg = CliConfig::resolve(&flags)?;
    if cfg.verbosity > 0 {
        eprintln!("config {}", serde_json::to_string(&cfg).unwrap_or_default());
    }
    match &cli.cmd {
        Cmd::Gen { subjects, per_class, table3, noise, out } => {
            let g = GenConfig {
                n_subjects: *subjects,
                per_class: *per_class,
                table3: *table3,
                noise_std: *noise,
                seed: cfg.seed,
            };
            let d = gen_dataset(&g)?;
            save_dataset(out, &d)?;
            out_json(
                &json!({ "out": out, "windows": d.len(), "subjects": d.subjects().len(), "generator": g, "rng": RNG_NAME, "config": cfg }),
            )
        }
        Cmd::Features { input, out } => {
            let d = load_dataset(input)?;
            save_features(out, &d)?;
            out_json(&json!({ "out": out, "rows": d.len(), "config": cfg }))
        }
        Cmd::Train { model, input, out, val_subject, test_subject, train } => {
            train_cmd(&cfg, *model, input, out, *val_subject, *test_subject, train)
        }
        Cmd::Loso { model, runs, input, report, train } => {
            loso_cmd(&cfg, *model, *runs, input, report.as_deref(), train)
        }
        Cmd::Eval { model_file, input, subjects, threshold } => eval_cmd(&cfg, model_file, input, subjects, *threshold),
        Cmd::Infer { model_file, input, threshold, mesh_node, scenario, sim } => {
            infer_cmd(&cfg, model_file, input, *threshold, mesh_node.as_deref(), scenario.as_deref(), sim)
        }
        Cmd::Inspect { model_file, layer, input, index, row, out } => {
            inspect_cmd(model_file, *layer, input.as_deref(), *index, *row, out.as_deref())
        }
        Cmd::Morse { gesture, timeline, intra_gap_ms } => morse_cmd(gesture, *timeline, *intra_gap_ms),
        Cmd::Simulate { script, sim, watch, at, summary } => {
            simulate_cmd(&cfg, script, sim, watch.as_deref(), *at, *summary)
        }
        Cmd::Bench { model_file, model, n } => bench_cmd(&cfg, model_file.as_deref(), *model, *n),
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error: usage: {}", one_line(first));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed downstream pipe (`| head`) is not a failure.
        Err(Error::Stream(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {}", e.kind(), one_line(&e.to_string()));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
