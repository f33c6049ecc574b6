//! Lexical verdict probe.
//!
//! A multinomial logistic regression over hashed token n-grams, trained with
//! seeded SGD. It is deliberately simple: the point is to measure how much of
//! a verdict can be read off surface cues in the evidence, and how that
//! changes between claims with and without leaked snippets.

mod eval;
mod features;
mod metrics;
mod model;
mod split;

pub use eval::{
    evaluate, evaluate_partitions, evaluate_same_claim_contrast, ContrastReport, PartitionedEval,
};
pub use features::{bucket, featurize_with, ngram_hash, ngrams, tokenize, SparseVector};
pub use metrics::{compute_report, EvalReport, LabelMetrics, Partition};
pub use model::{train, ProbeModel, TrainingProvenance};
pub use split::{
    read_splits, resolve_ids, stratified_split, write_splits, Splits, SPLIT_NAMES,
};

use serde::{Deserialize, Serialize};

use crate::corpus::ClaimRecord;
use crate::error::{Error, Result};
use crate::labels::{normalize, LabelScheme};

/// Which parts of a claim record make up the probe input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InputMode {
    /// Snippet texts only.
    SnippetText,
    /// Snippet titles only.
    SnippetTitle,
    /// "title text" per snippet.
    Snippets,
    /// Claim, separator, then snippets.
    Full,
    ClaimOnly,
}

impl std::str::FromStr for InputMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "snippet-text" => Ok(InputMode::SnippetText),
            "snippet-title" => Ok(InputMode::SnippetTitle),
            "snippets" => Ok(InputMode::Snippets),
            "full" => Ok(InputMode::Full),
            "claim-only" => Ok(InputMode::ClaimOnly),
            other => Err(format!(
                "unknown input mode {other:?} (expected snippet-text, snippet-title, snippets, full, claim-only)"
            )),
        }
    }
}

pub const SNIPPET_SEPARATOR: &str = "; ";
pub const CLAIM_SEPARATOR: &str = " [SEP] ";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub input_mode: InputMode,
    pub token_budget: usize,
    pub ngram_orders: Vec<usize>,
    pub hash_dims: usize,
    pub epochs: usize,
    pub learning_rate: f32,
    pub seed: u64,
    pub organization: String,
    /// Ordered veracity scale; position = class index.
    pub labels: Vec<String>,
}

impl ProbeConfig {
    pub fn new(organization: &str, labels: Vec<String>) -> Self {
        ProbeConfig {
            input_mode: InputMode::Snippets,
            token_budget: 512,
            ngram_orders: vec![1, 2],
            hash_dims: 1 << 18,
            epochs: 8,
            learning_rate: 0.5,
            seed: 1,
            organization: normalize(organization),
            labels: labels.iter().map(|l| normalize(l)).collect(),
        }
    }

    /// Config over the organization's veracity scale in `scheme`.
    pub fn for_organization(scheme: &LabelScheme, organization: &str) -> Result<Self> {
        let scale = scheme.scale(organization).ok_or_else(|| {
            Error::Config(format!("no veracity scale for organization {organization:?}"))
        })?;
        Ok(Self::new(organization, scale.to_vec()))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !self.hash_dims.is_power_of_two() || self.hash_dims > u32::MAX as usize {
            return fail(format!("hash_dims {} is not a power of two", self.hash_dims));
        }
        if self.token_budget == 0 {
            return fail("token_budget must be at least 1".into());
        }
        if self.ngram_orders.is_empty() || self.ngram_orders.contains(&0) {
            return fail("ngram_orders must be non-empty positive integers".into());
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1".into());
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return fail(format!("learning_rate {} must be positive", self.learning_rate));
        }
        if self.labels.len() < 2 {
            return fail("a label scale needs at least two labels".into());
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = self.labels.iter().find(|l| !seen.insert(l.as_str())) {
            return fail(format!("duplicate label {dup:?} on scale"));
        }
        Ok(())
    }

    pub fn label_index(&self, raw_label: &str) -> Option<usize> {
        let l = normalize(raw_label);
        self.labels.iter().position(|x| *x == l)
    }

    pub fn featurize(&self, text: &str) -> SparseVector {
        featurize_with(text, &self.ngram_orders, self.hash_dims)
    }

    pub fn input_for(&self, c: &ClaimRecord) -> String {
        build_input(c, self.input_mode, self.token_budget)
    }
}

fn join_nonempty<'a>(parts: impl Iterator<Item = &'a str>) -> String {
    parts
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .collect::<Vec<_>>()
        .join(SNIPPET_SEPARATOR)
}

fn snippets_string(c: &ClaimRecord) -> String {
    join_nonempty(
        c.snippets
            .iter()
            .map(|s| {
                let (t, x) = (s.title.trim(), s.text.trim());
                match (t.is_empty(), x.is_empty()) {
                    (false, false) => format!("{t} {x}"),
                    (false, true) => t.to_owned(),
                    (true, _) => x.to_owned(),
                }
            })
            .collect::<Vec<_>>()
            .iter()
            .map(String::as_str),
    )
}

/// Assembles the probe input for a claim and truncates it to the first
/// `token_budget` whitespace tokens. Snippets appear in rank order; empty
/// components are skipped.
pub fn build_input(c: &ClaimRecord, mode: InputMode, token_budget: usize) -> String {
    let text = match mode {
        InputMode::SnippetText => join_nonempty(c.snippets.iter().map(|s| s.text.as_str())),
        InputMode::SnippetTitle => join_nonempty(c.snippets.iter().map(|s| s.title.as_str())),
        InputMode::Snippets => snippets_string(c),
        InputMode::Full => {
            let evidence = snippets_string(c);
            if evidence.is_empty() {
                c.claim_text.clone()
            } else {
                format!("{}{CLAIM_SEPARATOR}{evidence}", c.claim_text)
            }
        }
        InputMode::ClaimOnly => c.claim_text.clone(),
    };
    truncate_tokens(&text, token_budget)
}

/// Keeps the prefix of `text` up to the end of its `budget`-th whitespace
/// token. Text within budget is returned unchanged.
pub fn truncate_tokens(text: &str, budget: usize) -> String {
    let mut count = 0;
    let mut in_token = false;
    for (i, ch) in text.char_indices() {
        if ch.is_whitespace() {
            if in_token {
                in_token = false;
                if count == budget {
                    return text[..i].to_owned();
                }
            }
        } else if !in_token {
            in_token = true;
            count += 1;
        }
    }
    text.to_owned()
}
