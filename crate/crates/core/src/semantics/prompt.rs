use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// The four aspects every description covers, in order.
pub const ASPECTS: [&str; 4] = ["Definition", "Indicators", "Context", "Contrast"];

pub const DEFAULT_TEMPLATE: &str = "Attribute: {attribute}. Value: {value}. Other possible values: {domain}. \
Write: 1) Definition: what this value means for this attribute. \
2) Indicators: observable characteristics implying this value. \
3) Context: situations where this value typically occurs. \
4) Contrast: how it differs from each other value. \
Be concise; at most {max_words} words per part.";

pub const DEFAULT_MAX_WORDS: usize = 40;

/// A prompt template with `{value}`, `{attribute}`, `{domain}` and
/// `{max_words}` placeholders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSpec {
    template: String,
    max_words: usize,
}

impl Default for PromptSpec {
    fn default() -> Self {
        Self {
            template: DEFAULT_TEMPLATE.to_string(),
            max_words: DEFAULT_MAX_WORDS,
        }
    }
}

impl PromptSpec {
    /// Checks that the template names the value, attribute and domain and
    /// lists the four aspects as numbered instructions in order.
    pub fn new(template: impl Into<String>, max_words: usize) -> Result<Self> {
        let template = template.into();
        if max_words == 0 {
            return Err(Error::Config("max_words must be positive".into()));
        }
        for ph in ["{value}", "{attribute}", "{domain}"] {
            if !template.contains(ph) {
                return Err(Error::Config(format!("prompt template lacks {ph}")));
            }
        }
        let mut from = 0;
        for (i, aspect) in ASPECTS.iter().enumerate() {
            let marker = format!("{}) {aspect}", i + 1);
            match template[from..].find(&marker) {
                Some(pos) => from += pos + marker.len(),
                None => {
                    return Err(Error::Config(format!(
                        "prompt template must contain {marker:?} after the previous aspect"
                    )))
                }
            }
        }
        Ok(Self {
            template,
            max_words,
        })
    }

    pub fn template(&self) -> &str {
        &self.template
    }

    pub fn max_words(&self) -> usize {
        self.max_words
    }
}

/// Renders the prompt for one value. The output is a pure function of the
/// arguments, so its hash can key the description cache.
pub fn build_prompt(
    value: &str,
    attribute: &str,
    domain: &[String],
    spec: &PromptSpec,
) -> Result<String> {
    if !domain.iter().any(|d| d == value) {
        return Err(Error::Contract(format!(
            "value {value:?} is not in the domain of {attribute:?}"
        )));
    }
    let domain_text = domain.join(", ");
    // single pass so placeholder-looking text inside values is left alone
    let mut out = String::with_capacity(spec.template.len() + domain_text.len());
    let mut rest = spec.template.as_str();
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let tail = &rest[open..];
        let (replacement, skip) = if tail.starts_with("{value}") {
            (Some(value.to_string()), "{value}".len())
        } else if tail.starts_with("{attribute}") {
            (Some(attribute.to_string()), "{attribute}".len())
        } else if tail.starts_with("{domain}") {
            (Some(domain_text.clone()), "{domain}".len())
        } else if tail.starts_with("{max_words}") {
            (Some(spec.max_words.to_string()), "{max_words}".len())
        } else {
            (None, 1)
        };
        match replacement {
            Some(r) => out.push_str(&r),
            None => out.push('{'),
        }
        rest = &tail[skip..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Lowercase hex SHA-256 of the rendered prompt.
pub fn prompt_hash(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shapes() -> Vec<String> {
        ["oval", "round", "irregular"].map(String::from).to_vec()
    }

    #[test]
    fn prompt_mentions_domain_and_aspects() {
        let p = build_prompt("oval", "tumor_shape", &shapes(), &PromptSpec::default()).unwrap();
        for v in ["oval", "round", "irregular", "tumor_shape"] {
            assert!(p.contains(v), "{p}");
        }
        let mut last = 0;
        for (i, a) in ASPECTS.iter().enumerate() {
            let pos = p.find(&format!("{}) {a}", i + 1)).unwrap();
            assert!(pos > last);
            last = pos;
        }
        assert!(p.contains("at most 40 words"));
    }

    #[test]
    fn prompt_is_deterministic() {
        let spec = PromptSpec::default();
        let a = build_prompt("oval", "tumor_shape", &shapes(), &spec).unwrap();
        let b = build_prompt("oval", "tumor_shape", &shapes(), &spec).unwrap();
        assert_eq!(a.as_bytes(), b.as_bytes());
        assert_eq!(prompt_hash(&a), prompt_hash(&b));
        assert_eq!(prompt_hash(&a).len(), 64);
    }

    #[test]
    fn value_outside_domain_rejected() {
        let err = build_prompt("fast", "tumor_shape", &shapes(), &PromptSpec::default());
        assert!(matches!(err, Err(Error::Contract(_))));
    }

    #[test]
    fn braces_in_values_are_not_expanded() {
        let domain = vec!["{domain}".to_string()];
        let p = build_prompt("{domain}", "a", &domain, &PromptSpec::default()).unwrap();
        assert!(p.contains("Value: {domain}."));
    }

    #[test]
    fn custom_template_validation() {
        assert!(PromptSpec::new("{value}", 10).is_err());
        let ok = "{attribute} {value} {domain}: 1) Definition 2) Indicators 3) Context 4) Contrast";
        assert!(PromptSpec::new(ok, 10).is_ok());
        let swapped = "{attribute} {value} {domain}: 1) Definition 3) Context 2) Indicators 4) Contrast";
        assert!(PromptSpec::new(swapped, 10).is_err());
        assert!(PromptSpec::new(DEFAULT_TEMPLATE, DEFAULT_MAX_WORDS).is_ok());
    }
}
