//! Pattern-based leaked-evidence detection.
//!
//! A snippet is leaked when a URL template is a substring of its URL, or when
//! its lowercased title or text matches one of the phrase patterns. Phrase
//! patterns run over the bytes of the lowercased field with `^` anchored at
//! the start of the field and ASCII `\b` word boundaries. A claim is leaked if
//! any of its snippets is.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

use regex::bytes::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};

use crate::corpus::{ClaimRecord, Dataset, EvidenceSnippet};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::sha256_hex;

const DEFAULT_PATTERNS: &str = include_str!("../data/patterns.tsv");

#[derive(Debug, Clone)]
pub struct UrlTemplate {
    pub id: String,
    pub template: String,
    lowered: String,
}

#[derive(Debug, Clone)]
pub struct PhrasePattern {
    pub id: String,
    pub source: String,
    regex: Regex,
}

/// Compiled URL templates and phrase patterns. Immutable after loading.
#[derive(Debug, Clone)]
pub struct PatternSet {
    url_templates: Vec<UrlTemplate>,
    phrase_patterns: Vec<PhrasePattern>,
    lowercase_urls: bool,
}

impl Default for PatternSet {
    fn default() -> Self {
        Self::parse(DEFAULT_PATTERNS).expect("bundled pattern file is valid")
    }
}

fn compile_phrase(id: &str, source: &str) -> Result<Regex> {
    RegexBuilder::new(source)
        .unicode(false)
        .build()
        .map_err(|e| Error::Pattern {
            id: id.to_owned(),
            message: e.to_string(),
        })
}

impl PatternSet {
    pub fn default_source() -> &'static str {
        DEFAULT_PATTERNS
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&s)
    }

    /// Parses `kind \t id \t pattern` rows, `kind` being `url` or `phrase`.
    /// Every regex is compiled here; a bad one is a configuration error.
    pub fn parse(src: &str) -> Result<Self> {
        let mut set = PatternSet {
            url_templates: Vec::new(),
            phrase_patterns: Vec::new(),
            lowercase_urls: true,
        };
        let mut ids = HashSet::new();
        for (i, line) in src.lines().enumerate() {
            let lineno = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.splitn(3, '\t');
            let (Some(kind), Some(id), Some(pattern)) = (cols.next(), cols.next(), cols.next())
            else {
                return Err(Error::Config(format!(
                    "pattern file line {lineno}: expected kind, id and pattern columns"
                )));
            };
            if pattern.is_empty() {
                return Err(Error::Config(format!("pattern file line {lineno}: empty pattern")));
            }
            if !ids.insert(id.to_owned()) {
                return Err(Error::Config(format!(
                    "pattern file line {lineno}: duplicate id {id:?}"
                )));
            }
            match kind.trim() {
                "url" => set.url_templates.push(UrlTemplate {
                    id: id.to_owned(),
                    template: pattern.to_owned(),
                    lowered: pattern.to_lowercase(),
                }),
                "phrase" => set.phrase_patterns.push(PhrasePattern {
                    id: id.to_owned(),
                    source: pattern.to_owned(),
                    regex: compile_phrase(id, pattern)?,
                }),
                other => {
                    return Err(Error::Config(format!(
                        "pattern file line {lineno}: unknown kind {other:?}"
                    )))
                }
            }
        }
        Ok(set)
    }

    /// Disables (or re-enables) lowercasing of URLs and templates before the
    /// substring test.
    pub fn with_url_lowercasing(mut self, on: bool) -> Self {
        self.lowercase_urls = on;
        self
    }

    pub fn lowercases_urls(&self) -> bool {
        self.lowercase_urls
    }

    pub fn url_templates(&self) -> &[UrlTemplate] {
        &self.url_templates
    }

    pub fn phrase_patterns(&self) -> &[PhrasePattern] {
        &self.phrase_patterns
    }

    /// Serializes the set back to the pattern file format.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# kind\tid\tpattern\n");
        for u in &self.url_templates {
            out.push_str(&format!("url\t{}\t{}\n", u.id, u.template));
        }
        for p in &self.phrase_patterns {
            out.push_str(&format!("phrase\t{}\t{}\n", p.id, p.source));
        }
        out
    }

    pub fn content_hash(&self) -> String {
        sha256_hex(format!("{}lowercase_urls={}", self.to_tsv(), self.lowercase_urls).as_bytes())
    }

    /// Ids of every template that is a substring of `url`.
    pub fn match_url(&self, url: &str) -> Vec<&str> {
        if url.is_empty() {
            return Vec::new();
        }
        let lowered;
        let haystack = if self.lowercase_urls {
            lowered = url.to_lowercase();
            lowered.as_str()
        } else {
            url
        };
        self.url_templates
            .iter()
            .filter(|t| {
                let needle = if self.lowercase_urls { &t.lowered } else { &t.template };
                haystack.contains(needle.as_str())
            })
            .map(|t| t.id.as_str())
            .collect()
    }

    /// Phrase hits for title and text, title hits first, each in pattern order.
    pub fn match_phrases(&self, title: &str, text: &str) -> Vec<PhraseMatch> {
        let mut hits = Vec::new();
        for (field, value) in [(Field::Title, title), (Field::Text, text)] {
            if value.is_empty() {
                continue;
            }
            let lowered = value.to_lowercase();
            hits.extend(
                self.phrase_patterns
                    .iter()
                    .filter(|p| p.regex.is_match(lowered.as_bytes()))
                    .map(|p| PhraseMatch {
                        field,
                        pattern_id: p.id.clone(),
                    }),
            );
        }
        hits
    }

    pub fn classify_snippet(&self, s: &EvidenceSnippet) -> LeakVerdict {
        let url_matches: Vec<String> = self.match_url(&s.url).into_iter().map(str::to_owned).collect();
        let phrase_matches = self.match_phrases(&s.title, &s.text);
        let mechanism = Mechanism::from_flags(!url_matches.is_empty(), !phrase_matches.is_empty());
        LeakVerdict {
            snippet_rank: s.rank,
            url_matches,
            phrase_matches,
            mechanism,
        }
    }

    pub fn classify_claim(&self, c: &ClaimRecord) -> ClaimLeakStatus {
        ClaimLeakStatus::from_verdicts(
            &c.claim_id,
            c.snippets.iter().map(|s| self.classify_snippet(s)).collect(),
        )
    }

    /// Classifies every claim; output order follows the dataset.
    pub fn classify_dataset(&self, d: &Dataset, exec: Execution) -> Vec<ClaimLeakStatus> {
        par::map(&d.records, exec, |c| self.classify_claim(c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Title,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhraseMatch {
    pub field: Field,
    pub pattern_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Mechanism {
    None,
    Url,
    Phrase,
    Both,
}

impl Mechanism {
    pub fn from_flags(url: bool, phrase: bool) -> Self {
        match (url, phrase) {
            (false, false) => Mechanism::None,
            (true, false) => Mechanism::Url,
            (false, true) => Mechanism::Phrase,
            (true, true) => Mechanism::Both,
        }
    }

    pub fn by_url(self) -> bool {
        matches!(self, Mechanism::Url | Mechanism::Both)
    }

    pub fn by_phrase(self) -> bool {
        matches!(self, Mechanism::Phrase | Mechanism::Both)
    }
}

/// Detection result for one snippet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeakVerdict {
    pub snippet_rank: u32,
    pub url_matches: Vec<String>,
    pub phrase_matches: Vec<PhraseMatch>,
    pub mechanism: Mechanism,
}

impl LeakVerdict {
    pub fn is_leaked(&self) -> bool {
        self.mechanism != Mechanism::None
    }
}

/// Claim-level aggregation of snippet verdicts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimLeakStatus {
    pub claim_id: String,
    pub leaked_by_url: bool,
    pub leaked_by_phrase: bool,
    pub leaked: bool,
    pub snippet_verdicts: Vec<LeakVerdict>,
}

impl ClaimLeakStatus {
    pub fn from_verdicts(claim_id: &str, snippet_verdicts: Vec<LeakVerdict>) -> Self {
        let leaked_by_url = snippet_verdicts.iter().any(|v| v.mechanism.by_url());
        let leaked_by_phrase = snippet_verdicts.iter().any(|v| v.mechanism.by_phrase());
        ClaimLeakStatus {
            claim_id: claim_id.to_owned(),
            leaked_by_url,
            leaked_by_phrase,
            leaked: leaked_by_url || leaked_by_phrase,
            snippet_verdicts,
        }
    }

    /// True when the claim has at least one leaked and one unleaked snippet.
    pub fn is_mixed(&self) -> bool {
        self.snippet_verdicts.iter().any(LeakVerdict::is_leaked)
            && self.snippet_verdicts.iter().any(|v| !v.is_leaked())
    }

    /// Checks the aggregation invariants.
    pub fn is_consistent(&self) -> bool {
        self.leaked == (self.leaked_by_url || self.leaked_by_phrase)
            && self.leaked_by_url == self.snippet_verdicts.iter().any(|v| v.mechanism.by_url())
            && self.leaked_by_phrase == self.snippet_verdicts.iter().any(|v| v.mechanism.by_phrase())
            && self.snippet_verdicts.iter().all(|v| {
                v.mechanism == Mechanism::from_flags(!v.url_matches.is_empty(), !v.phrase_matches.is_empty())
            })
    }
}

/// Looks up statuses by claim id.
pub fn index_statuses(statuses: &[ClaimLeakStatus]) -> HashMap<&str, &ClaimLeakStatus> {
    statuses.iter().map(|s| (s.claim_id.as_str(), s)).collect()
}

pub fn write_statuses<W: Write>(statuses: &[ClaimLeakStatus], mut w: W) -> std::io::Result<()> {
    for s in statuses {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_statuses<R: BufRead>(r: R) -> Result<Vec<ClaimLeakStatus>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<statuses>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let status: ClaimLeakStatus = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        if !status.is_consistent() {
            return Err(Error::Consistency(format!(
                "status for {:?} violates the aggregation invariants",
                status.claim_id
            )));
        }
        out.push(status);
    }
    Ok(out)
}
