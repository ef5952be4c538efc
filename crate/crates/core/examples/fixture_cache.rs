//! Builds a description cache from a hand-written TSV
//! (`attribute<TAB>value<TAB>description`, with a header row).
//!
//! Prompt hashes are computed against the dataset's domains with the default
//! template, so the cache is a drop-in for `arise describe` output.
//!
//! ```text
//! cargo run -p arise-core --example fixture_cache -- descriptions.tsv zoo.csv out.jsonl
//! ```

use std::error::Error;

use arise_core::dataset::{load_dataset, CsvOptions};
use arise_core::semantics::{build_prompt, prompt_hash, DescriptionRecord, PromptSpec};

const MODEL: &str = "fixture-handwritten";
const CREATED_AT: &str = "2026-01-01T00:00:00Z";

fn main() -> Result<(), Box<dyn Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [tsv, dataset, out] = &args[..] else {
        return Err("usage: fixture_cache <descriptions.tsv> <dataset.csv> <out.jsonl>".into());
    };
    let ds = load_dataset(dataset, &CsvOptions::with_label("class"), 1)?;
    let spec = PromptSpec::default();
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .from_path(tsv)?;
    let mut lines = String::new();
    for row in rdr.records() {
        let row = row?;
        let (attr, value, text) = (&row[0], &row[1], &row[2]);
        let schema = ds
            .attributes
            .iter()
            .find(|a| a.name == attr)
            .ok_or_else(|| format!("unknown attribute {attr}"))?;
        let prompt = build_prompt(value, attr, &schema.domain, &spec)?;
        let mut extra = serde_json::Map::new();
        extra.insert("source".into(), "hand-written".into());
        let rec = DescriptionRecord {
            attribute: attr.into(),
            value: value.into(),
            description: text.into(),
            model: MODEL.into(),
            prompt_hash: prompt_hash(&prompt),
            created_at: CREATED_AT.into(),
            extra,
        };
        lines.push_str(&serde_json::to_string(&rec)?);
        lines.push('\n');
    }
    std::fs::write(out, lines)?;
    Ok(())
}
