use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;

use crate::dataset::{Dataset, Vocabulary};
use crate::error::{Error, Result};
use crate::semantics::cache::{DescriptionCache, DescriptionRecord};
use crate::semantics::llm::{DescriptionSource, ValueQuery};
use crate::semantics::prompt::{build_prompt, prompt_hash, PromptSpec};
use crate::TOOL_VERSION;

#[derive(Debug, Clone)]
pub struct EnrichOptions {
    /// Upper bound on concurrent requests.
    pub parallelism: usize,
    /// Keep going past failed values instead of aborting.
    pub best_effort: bool,
}

impl Default for EnrichOptions {
    fn default() -> Self {
        Self {
            parallelism: 4,
            best_effort: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EnrichFailure {
    pub attribute: String,
    pub value: String,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct EnrichReport {
    /// One record per described vocabulary entry, in vocabulary order.
    pub records: Vec<DescriptionRecord>,
    /// Calls made to the description source.
    pub queries: usize,
    pub cache_hits: usize,
    /// Only populated in best-effort mode.
    pub failures: Vec<EnrichFailure>,
}

struct Job {
    vocab_id: usize,
    prompt: String,
    hash: String,
}

/// Makes sure every vocabulary value has a cached description, querying the
/// source once per missing value.
///
/// Successful descriptions are persisted as they arrive. On an unrecoverable
/// failure outstanding work is cancelled and the error reports how far the
/// run got.
pub fn enrich_vocabulary(
    ds: &Dataset,
    vocab: &Vocabulary,
    source: &dyn DescriptionSource,
    spec: &PromptSpec,
    cache: &mut DescriptionCache,
    opts: &EnrichOptions,
) -> Result<EnrichReport> {
    if vocab.is_empty() {
        return Err(Error::Contract("vocabulary is empty".into()));
    }
    let model = source.model().to_string();

    let mut prompts = Vec::with_capacity(vocab.len());
    for entry in vocab.entries() {
        let attr = &ds.attributes[entry.attribute];
        let prompt = build_prompt(&entry.value, &attr.name, &attr.domain, spec)?;
        let hash = prompt_hash(&prompt);
        prompts.push((prompt, hash));
    }

    let mut jobs = Vec::new();
    for (id, (prompt, hash)) in prompts.iter().enumerate() {
        let entry = &vocab.entries()[id];
        let attr = &ds.attributes[entry.attribute].name;
        if cache.get(attr, &entry.value, &model, hash).is_none() {
            jobs.push(Job {
                vocab_id: id,
                prompt: prompt.clone(),
                hash: hash.clone(),
            });
        }
    }
    let cache_hits = vocab.len() - jobs.len();

    let queries = AtomicUsize::new(0);
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let mut failures = Vec::new();
    let mut fatal: Option<Error> = None;
    let mut completed = cache_hits;
    let workers = opts.parallelism.max(1).min(jobs.len().max(1));

    std::thread::scope(|s| {
        let (tx, rx) = mpsc::channel::<(usize, Result<String>)>();
        for _ in 0..workers {
            let tx = tx.clone();
            let (jobs, next, abort, queries) = (&jobs, &next, &abort, &queries);
            s.spawn(move || loop {
                if abort.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let entry = &vocab.entries()[job.vocab_id];
                let attr = &ds.attributes[entry.attribute];
                let query = ValueQuery {
                    attribute: &attr.name,
                    value: &entry.value,
                    domain: &attr.domain,
                    prompt: &job.prompt,
                };
                queries.fetch_add(1, Ordering::Relaxed);
                let mut res = source.describe(&query);
                if matches!(res, Err(Error::EmptyDescription)) {
                    queries.fetch_add(1, Ordering::Relaxed);
                    res = source.describe(&query);
                }
                let res = res.and_then(|d| {
                    if d.trim().is_empty() {
                        Err(Error::EmptyDescription)
                    } else {
                        Ok(d.trim().to_string())
                    }
                });
                if tx.send((i, res)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        for (i, res) in rx {
            let job = &jobs[i];
            let entry = &vocab.entries()[job.vocab_id];
            let attr = &ds.attributes[entry.attribute].name;
            match res {
                Ok(description) => {
                    let mut extra = serde_json::Map::new();
                    extra.insert("tool_version".into(), TOOL_VERSION.into());
                    let rec = DescriptionRecord {
                        attribute: attr.clone(),
                        value: entry.value.clone(),
                        description,
                        model: model.clone(),
                        prompt_hash: job.hash.clone(),
                        created_at: chrono::Utc::now()
                            .to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                        extra,
                    };
                    match cache.insert(rec) {
                        Ok(()) => completed += 1,
                        Err(e) => {
                            abort.store(true, Ordering::Relaxed);
                            fatal.get_or_insert(e);
                        }
                    }
                }
                Err(e) if opts.best_effort => {
                    log::warn!("no description for {attr}={}: {e}", entry.value);
                    failures.push(EnrichFailure {
                        attribute: attr.clone(),
                        value: entry.value.clone(),
                        error: e.to_string(),
                    });
                }
                Err(e) => {
                    abort.store(true, Ordering::Relaxed);
                    fatal.get_or_insert(e);
                }
            }
        }
    });

    if let Some(e) = fatal {
        return Err(Error::Enrichment {
            completed,
            remaining: vocab.len() - completed,
            total: vocab.len(),
            source: Box::new(e),
        });
    }

    let records = vocab
        .entries()
        .iter()
        .zip(&prompts)
        .filter_map(|(entry, (_, hash))| {
            let attr = &ds.attributes[entry.attribute].name;
            cache.get(attr, &entry.value, &model, hash).cloned()
        })
        .collect();

    Ok(EnrichReport {
        records,
        queries: queries.into_inner(),
        cache_hits,
        failures,
    })
}
