use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Serialize;

use arise_core::config::{AlphaGrid, LlmProvider, RunConfig, SilhouetteChoice};
use arise_core::dataset::{dataset_stats, extract_vocabulary, DatasetStats};
use arise_core::encoding::{export_stub_bundle, pool_vocabulary, Pooling, TokenSource};
use arise_core::eval::{parse_suite, read_label_column, run_suite, score, Scores};
use arise_core::fusion::{run_arise, FinalClustering};
use arise_core::result::ResultDocument;
use arise_core::scaling::{run_scaling, write_scaling_csv, ScalingConfig};
use arise_core::semantics::{
    amortization_ratio, enrich_vocabulary, ChatClient, DescriptionCache, DescriptionSource,
    EnrichOptions, StubSource,
};
use arise_core::{Error, Execution, Stage, TOOL_VERSION};

use crate::{
    BenchArgs, Cli, ClusterArgs, Command, DataArgs, DescribeArgs, EncodeArgs, EvalArgs,
    ScalingArgs, StubBundleArgs,
};

/// Settings assembled from an optional config file plus flags.
struct Session {
    cfg: RunConfig,
    /// Directory that relative paths in `cfg` are resolved against.
    base: PathBuf,
    from_file: bool,
}

impl Session {
    fn new(cli: &Cli) -> anyhow::Result<Self> {
        let (mut cfg, base, from_file) = match &cli.config {
            Some(p) => {
                let cfg = RunConfig::from_file(p)?;
                let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
                (cfg, base, true)
            }
            None => (RunConfig::default(), PathBuf::from("."), false),
        };
        if cli.sequential {
            cfg.execution = Execution::Sequential;
        }
        Ok(Self {
            cfg,
            base,
            from_file,
        })
    }

    /// A path given on the command line, made independent of the config
    /// file's directory.
    fn flag_path(&self, p: &Path) -> anyhow::Result<PathBuf> {
        if self.from_file && p.is_relative() {
            Ok(std::env::current_dir()?.join(p))
        } else {
            Ok(p.to_path_buf())
        }
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        arise_core::config::resolve(&self.base, p)
    }

    fn apply_data(&mut self, a: &DataArgs) -> anyhow::Result<()> {
        if let Some(p) = &a.dataset {
            self.cfg.dataset = Some(self.flag_path(p)?);
        }
        if let Some(k) = a.k {
            self.cfg.k = Some(k);
        }
        if let Some(c) = &a.label_column {
            self.cfg.label_column = Some(c.clone());
        }
        if a.no_label {
            self.cfg.label_column = None;
        }
        if let Some(d) = a.delimiter {
            self.cfg.delimiter = Some(d);
        }
        if let Some(p) = &a.domains {
            self.cfg.domains = Some(self.flag_path(p)?);
        }
        Ok(())
    }

    fn apply_pooling(&mut self, pooling: &Option<String>) -> anyhow::Result<()> {
        if let Some(p) = pooling {
            self.cfg.pooling = p.parse::<Pooling>()?;
        }
        Ok(())
    }

    fn apply_bundle(&mut self, bundle: &Option<PathBuf>) -> anyhow::Result<()> {
        if let Some(p) = bundle {
            self.cfg.bundle = Some(self.flag_path(p)?);
        }
        Ok(())
    }
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let mut s = Session::new(&cli)?;
    match &cli.command {
        Command::Stats(a) => stats(&mut s, a),
        Command::Describe(a) => describe(&mut s, a),
        Command::StubBundle(a) => stub_bundle(&mut s, a),
        Command::Encode(a) => encode(&mut s, a),
        Command::Cluster(a) => cluster(&mut s, a),
        Command::Eval(a) => eval(a),
        Command::Bench(a) => bench(&s, a),
        Command::Scaling(a) => scaling(&s, a),
    }
}

fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct StatsOutput {
    dataset: String,
    #[serde(flatten)]
    stats: DatasetStats,
    amortization_ratio: f64,
}

fn stats(s: &mut Session, a: &DataArgs) -> anyhow::Result<()> {
    s.apply_data(a)?;
    let ds = s.cfg.load_dataset(&s.base)?;
    let stats = dataset_stats(&ds);
    let ratio = amortization_ratio(stats.n, stats.m, stats.vocab_size)?;
    print_json(&StatsOutput {
        dataset: ds.name.clone(),
        stats,
        amortization_ratio: ratio,
    })
}

#[derive(Serialize)]
struct DescribeOutput {
    cache: PathBuf,
    model: String,
    vocab_size: usize,
    queries: usize,
    cache_hits: usize,
    failures: Vec<arise_core::semantics::EnrichFailure>,
}

fn describe(s: &mut Session, a: &DescribeArgs) -> anyhow::Result<()> {
    s.apply_data(&a.data)?;
    if let Some(p) = &a.cache {
        s.cfg.cache = Some(s.flag_path(p)?);
    }
    let llm = &mut s.cfg.llm;
    if let Some(p) = &a.llm {
        llm.provider = p.parse()?;
    }
    if let Some(e) = &a.endpoint {
        llm.endpoint = Some(e.clone());
    }
    if let Some(m) = &a.model {
        llm.model = Some(m.clone());
    }
    if let Some(t) = a.temperature {
        llm.temperature = t;
    }
    if let Some(p) = a.parallelism {
        llm.parallelism = p;
    }
    if let Some(p) = &a.prompt_template {
        let p = if s.from_file && p.is_relative() {
            std::env::current_dir()?.join(p)
        } else {
            p.clone()
        };
        s.cfg.llm.prompt_template = Some(p);
    }
    if a.best_effort {
        s.cfg.best_effort = true;
    }
    s.cfg.validate()?;

    let ds = s.cfg.load_dataset(&s.base)?;
    let vocab = extract_vocabulary(&ds);
    let cache_path = s
        .cfg
        .cache
        .as_ref()
        .map(|p| s.resolve(p))
        .ok_or_else(|| Error::Config("no description cache given (--cache)".into()))?;
    let enrich = || -> arise_core::Result<_> {
        let spec = s.cfg.llm.prompt_spec(&s.base)?;
        let mut cache = DescriptionCache::open(&cache_path)?;
        let client;
        let source: &dyn DescriptionSource = match s.cfg.llm.provider {
            LlmProvider::Stub => &StubSource,
            LlmProvider::Openai => {
                client = ChatClient::new(s.cfg.llm.endpoint_config()?)?;
                &client
            }
        };
        let opts = EnrichOptions {
            parallelism: s.cfg.llm.parallelism,
            best_effort: s.cfg.best_effort,
        };
        let report = enrich_vocabulary(&ds, &vocab, source, &spec, &mut cache, &opts)?;
        Ok((source.model().to_string(), report))
    };
    let (model, report) = enrich().map_err(|e| e.in_stage(Stage::Enrichment))?;
    print_json(&DescribeOutput {
        cache: cache_path,
        model,
        vocab_size: vocab.len(),
        queries: report.queries,
        cache_hits: report.cache_hits,
        failures: report.failures,
    })
}

fn stub_bundle(s: &mut Session, a: &StubBundleArgs) -> anyhow::Result<()> {
    if let Some(p) = &a.cache {
        s.cfg.cache = Some(s.flag_path(p)?);
    }
    let cache_path = s
        .cfg
        .cache
        .as_ref()
        .map(|p| s.resolve(p))
        .ok_or_else(|| Error::Config("no description cache given (--cache)".into()))?;
    let export = || -> arise_core::Result<_> {
        let cache = DescriptionCache::open(&cache_path)?;
        let records = cache.unique_values(a.model.as_deref());
        if records.is_empty() {
            return Err(Error::Coverage(format!(
                "{} holds no descriptions{}",
                cache_path.display(),
                a.model
                    .as_deref()
                    .map(|m| format!(" from model {m:?}"))
                    .unwrap_or_default()
            )));
        }
        export_stub_bundle(&records, &a.out, a.dim)
    };
    let manifest = export().map_err(|e| e.in_stage(Stage::Encoding))?;
    print_json(&serde_json::json!({
        "bundle": a.out,
        "encoder_model": manifest.encoder_model,
        "dim": manifest.dim,
        "entries": manifest.entries.len(),
    }))
}

#[derive(Serialize)]
struct EmbeddingRow<'a> {
    attribute: &'a str,
    value: &'a str,
    vector: &'a [f64],
}

#[derive(Serialize)]
struct EncodeOutput<'a> {
    pooling: Pooling,
    dim: usize,
    embeddings: Vec<EmbeddingRow<'a>>,
    zero_filled: &'a [(String, String)],
    config_echo: serde_json::Value,
    tool_version: &'static str,
}

fn encode(s: &mut Session, a: &EncodeArgs) -> anyhow::Result<()> {
    s.apply_data(&a.data)?;
    s.apply_bundle(&a.bundle)?;
    s.apply_pooling(&a.pooling)?;
    if a.best_effort {
        s.cfg.best_effort = true;
    }
    let ds = s.cfg.load_dataset(&s.base)?;
    let bundle = s
        .cfg
        .open_bundle(&s.base)?
        .ok_or_else(|| Error::Config("no token bundle given (--bundle)".into()).in_stage(Stage::Encoding))?;
    let vocab = extract_vocabulary(&ds);
    let pooled = pool_vocabulary(
        &ds,
        &vocab,
        &bundle,
        s.cfg.pooling,
        s.cfg.best_effort,
        s.cfg.execution,
    )
    .map_err(|e| e.in_stage(Stage::Encoding))?;
    let embeddings = vocab
        .entries()
        .iter()
        .enumerate()
        .map(|(id, e)| EmbeddingRow {
            attribute: &ds.attributes[e.attribute].name,
            value: &e.value,
            vector: &pooled.embeddings[&id].vector,
        })
        .collect();
    let doc = EncodeOutput {
        pooling: s.cfg.pooling,
        dim: bundle.dim(),
        embeddings,
        zero_filled: &pooled.zero_filled,
        config_echo: s.cfg.echo(),
        tool_version: TOOL_VERSION,
    };
    match &a.out {
        Some(p) => write_text(p, &(serde_json::to_string_pretty(&doc)? + "\n")),
        None => print_json(&doc),
    }
}

fn cluster(s: &mut Session, a: &ClusterArgs) -> anyhow::Result<()> {
    s.apply_data(&a.data)?;
    s.apply_bundle(&a.bundle)?;
    s.apply_pooling(&a.pooling)?;
    if let Some(g) = &a.alphas {
        s.cfg.alphas = g.parse::<AlphaGrid>()?;
    }
    if let Some(seed) = a.seed {
        s.cfg.seed = seed;
    }
    if let Some(seed) = a.final_seed {
        s.cfg.final_seed = Some(seed);
    }
    if a.reuse_search_labels {
        s.cfg.final_clustering = FinalClustering::ReuseSearch;
    }
    if let Some(m) = &a.silhouette {
        s.cfg.silhouette = match m.to_ascii_lowercase().as_str() {
            "exact" => SilhouetteChoice::Exact,
            "subsample" => SilhouetteChoice::Subsample,
            other => bail!(Error::Config(format!(
                "unknown silhouette mode {other:?}; expected exact or subsample"
            ))),
        };
    }
    if a.best_effort {
        s.cfg.best_effort = true;
    }
    if let Some(p) = &a.out {
        s.cfg.out = Some(s.flag_path(p)?);
    }
    s.cfg.validate()?;

    let ds = s.cfg.load_dataset(&s.base)?;
    let bundle = s.cfg.open_bundle(&s.base)?;
    let tokens = bundle.as_ref().map(|b| b as &dyn TokenSource);
    let result = run_arise(&ds, tokens, &s.cfg.cluster_params())?;
    log::info!(
        "alpha* = {}, inertia = {:.6}",
        result.alpha_star,
        result.inertia
    );
    let doc = ResultDocument::new(&result, s.cfg.echo());
    match &s.cfg.out {
        Some(p) => {
            let p = s.resolve(p);
            doc.write(&p)?;
            eprintln!("wrote {} (alpha* = {})", p.display(), doc.alpha_star);
            Ok(())
        }
        None => {
            print!("{}", doc.to_json());
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct EvalOutput {
    n: usize,
    #[serde(flatten)]
    scores: Scores,
    nmi_normalizer: &'static str,
    alpha_star: f64,
}

fn eval(a: &EvalArgs) -> anyhow::Result<()> {
    let run = || -> arise_core::Result<EvalOutput> {
        let doc = ResultDocument::read(&a.result)?;
        let truth = read_label_column(&a.labels, a.label_column.as_deref())?;
        if truth.len() != doc.labels.len() {
            return Err(Error::Contract(format!(
                "{} has {} labels but the result has {}",
                a.labels.display(),
                truth.len(),
                doc.labels.len()
            )));
        }
        Ok(EvalOutput {
            n: truth.len(),
            scores: score(&truth, &doc.labels)?,
            nmi_normalizer: "arithmetic",
            alpha_star: doc.alpha_star,
        })
    };
    print_json(&run().map_err(|e| e.in_stage(Stage::Evaluation))?)
}

fn bench(s: &Session, a: &BenchArgs) -> anyhow::Result<()> {
    let text = fs::read_to_string(&a.suite)
        .map_err(|e| Error::Config(format!("{}: {e}", a.suite.display())))?;
    let mut configs = parse_suite(&text)?;
    if s.cfg.execution == Execution::Sequential {
        configs.iter_mut().for_each(|c| c.execution = Execution::Sequential);
    }
    let base = a.suite.parent().map(Path::to_path_buf).unwrap_or_default();
    let report = run_suite(&configs, &base)?;
    let md = report.to_markdown();
    if let Some(p) = &a.out_json {
        write_text(p, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    }
    match &a.out_md {
        Some(p) => write_text(p, &md),
        None => {
            print!("{md}");
            Ok(())
        }
    }
}

fn scaling(s: &Session, a: &ScalingArgs) -> anyhow::Result<()> {
    let cfg = ScalingConfig {
        axis: a.axis.parse()?,
        values: a.values.clone(),
        n: a.n,
        m: a.m,
        cardinality: a.cardinality,
        k: a.k,
        dim: a.dim,
        grid: a.alphas.parse::<AlphaGrid>()?.0,
        seed: a.seed,
        repeats: a.repeats,
        exec: s.cfg.execution,
    };
    let rows = run_scaling(&cfg)?;
    match &a.out {
        Some(p) => {
            let f = fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
            write_scaling_csv(&rows, f)?;
        }
        None => write_scaling_csv(&rows, std::io::stdout().lock())?,
    }
    Ok(())
}

fn hint(e: &Error) -> Option<&'static str> {
    match e {
        Error::Io { .. } => Some("check that the path exists and is readable"),
        Error::Parse { .. } | Error::EmptyInput => {
            Some("the dataset must be a CSV with a header row and at least one data row")
        }
        Error::Config(_) => Some("see `arise <command> --help` for the accepted flags"),
        Error::Coverage(_) => Some(
            "describe the dataset's values (`arise describe`) and rebuild the bundle, or pass --best-effort",
        ),
        Error::BundleFormat(_) => Some("re-export the bundle; it may be truncated or from another tool"),
        Error::Transport(_) => Some("check --endpoint, network access and the ARISE_API_KEY variable"),
        Error::Selection => Some("try a different seed or a wider alpha grid"),
        Error::Enrichment { .. } => Some("re-run the same command; finished values are cached"),
        _ => None,
    }
}

/// One-line error plus an optional remediation hint.
pub fn diagnostic(e: &anyhow::Error) -> String {
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(err) => {
            let mut msg = format!("error: {err}");
            if let Some(h) = hint(err.root()) {
                msg.push_str("\nhint: ");
                msg.push_str(h);
            }
            msg
        }
        None => format!("error: {e:#}"),
    }
}
