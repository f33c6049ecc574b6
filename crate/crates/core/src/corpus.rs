//! In-memory corpus representation and the two ingestion routes: the neutral
//! JSONL schema (one claim per line) and the MultiFC-style TSV layout.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::sha256_hex;

/// Flag attached to a claim whose snippet file does not exist.
pub const FLAG_MISSING_SNIPPETS: &str = "missing-snippets";
pub const FLAG_UNREADABLE_SNIPPETS: &str = "unreadable-snippets";
pub const FLAG_BAD_CLAIM_DATE: &str = "bad-claim-date";
pub const FLAG_BAD_VERIFICATION_DATE: &str = "bad-verification-date";
pub const FLAG_BAD_SNIPPET_DATE: &str = "bad-snippet-date";
pub const FLAG_BAD_SNIPPET_RANK: &str = "bad-snippet-rank";
pub const FLAG_UNKNOWN_ORG_PREFIX: &str = "unknown-org-prefix";
pub const FLAG_EMPTY_CLAIM_TEXT: &str = "empty-claim-text";

/// Verification strategy recorded by a human annotator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Strategy {
    /// Global counter-evidence.
    Gce,
    /// Local counter-evidence.
    Lce,
    /// Non-credible source.
    Ncs,
    /// No evidence assertion.
    Nea,
    Other,
    Na,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManualAnnotation {
    pub strategy: Strategy,
    #[serde(default)]
    pub stance_notes: String,
    #[serde(default)]
    pub annotator: String,
}

/// One ranked search-result fragment attached to a claim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceSnippet {
    pub rank: u32,
    pub title: String,
    pub text: String,
    pub url: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retrieved_date: Option<NaiveDate>,
}

impl EvidenceSnippet {
    pub fn new(rank: u32, title: &str, text: &str, url: &str) -> Self {
        EvidenceSnippet {
            rank,
            title: nfc(title),
            text: nfc(text),
            url: nfc(url),
            retrieved_date: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.title.trim().is_empty() && self.text.trim().is_empty() && self.url.trim().is_empty()
    }
}

/// A fact-checked claim and its evidence, snippets kept in retrieval order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimRecord {
    pub claim_id: String,
    pub claim_text: String,
    pub organization: String,
    pub raw_label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub claim_date: Option<NaiveDate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification_date: Option<NaiveDate>,
    pub snippets: Vec<EvidenceSnippet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub annotations: Option<ManualAnnotation>,
    /// Ingestion flags (sorted, deduplicated).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl ClaimRecord {
    pub fn new(claim_id: &str, claim_text: &str, organization: &str, raw_label: &str) -> Self {
        ClaimRecord {
            claim_id: nfc(claim_id.trim()),
            claim_text: nfc(claim_text),
            organization: nfc(organization.trim()).to_lowercase(),
            raw_label: nfc(raw_label),
            claim_date: None,
            verification_date: None,
            snippets: Vec::new(),
            annotations: None,
            flags: Vec::new(),
        }
    }

    pub fn with_snippets(mut self, snippets: Vec<EvidenceSnippet>) -> Self {
        self.snippets = snippets;
        self
    }

    pub fn add_flag(&mut self, flag: &str) {
        if let Err(pos) = self.flags.binary_search_by(|f| f.as_str().cmp(flag)) {
            self.flags.insert(pos, flag.to_owned());
        }
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Provenance {
    pub source: String,
    pub config_hash: String,
}

/// An ingested, duplicate-free collection of claims. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<ClaimRecord>,
    pub provenance: Provenance,
    /// Lines skipped by lenient JSONL ingestion.
    pub skipped_lines: usize,
}

impl Dataset {
    /// Builds a dataset, rejecting duplicate claim ids.
    pub fn from_records(records: Vec<ClaimRecord>, provenance: Provenance) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if !seen.insert(r.claim_id.as_str()) {
                return Err(Error::DuplicateId(r.claim_id.clone()));
            }
        }
        Ok(Dataset {
            records,
            provenance,
            skipped_lines: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, claim_id: &str) -> Option<&ClaimRecord> {
        self.records.iter().find(|r| r.claim_id == claim_id)
    }

    /// Canonical JSONL serialization: one record per line, file order.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    /// SHA-256 of the canonical JSONL serialization.
    pub fn content_hash(&self) -> String {
        sha256_hex(self.to_jsonl_string().as_bytes())
    }
}

pub(crate) fn nfc(s: &str) -> String {
    s.nfc().collect()
}

/// Parses an ISO-8601 date or date-time, keeping only the calendar date.
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .or_else(|| DateTime::parse_from_rfc3339(s).ok().map(|d| d.date_naive()))
        .or_else(|| {
            ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S%.f"]
                .iter()
                .find_map(|fmt| NaiveDateTime::parse_from_str(s, fmt).ok())
                .map(|d| d.date())
        })
}

/// Parses an optional date field; a non-empty unparseable value pushes `flag`.
fn date_field(
    raw: Option<&str>,
    flag: &'static str,
    flags: &mut Vec<&'static str>,
) -> Option<NaiveDate> {
    let raw = raw.map(str::trim).filter(|s| !s.is_empty())?;
    let parsed = parse_date(raw);
    if parsed.is_none() {
        flags.push(flag);
    }
    parsed
}

#[derive(Deserialize)]
struct RawSnippet {
    #[serde(default)]
    rank: Option<u32>,
    #[serde(default)]
    title: Option<String>,
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    url: Option<String>,
    #[serde(default)]
    retrieved_date: Option<String>,
}

#[derive(Deserialize)]
struct RawClaim {
    claim_id: String,
    claim_text: String,
    organization: String,
    raw_label: String,
    #[serde(default)]
    claim_date: Option<String>,
    #[serde(default)]
    verification_date: Option<String>,
    #[serde(default)]
    snippets: Vec<RawSnippet>,
    #[serde(default)]
    annotations: Option<ManualAnnotation>,
    #[serde(default)]
    flags: Vec<String>,
}

impl RawClaim {
    fn into_record(self) -> std::result::Result<ClaimRecord, String> {
        if self.claim_id.trim().is_empty() {
            return Err("empty claim_id".into());
        }
        if self.claim_text.trim().is_empty() {
            return Err("empty claim_text".into());
        }
        let mut flags = Vec::new();
        let mut rec = ClaimRecord::new(
            &self.claim_id,
            &self.claim_text,
            &self.organization,
            &self.raw_label,
        );
        rec.claim_date = date_field(self.claim_date.as_deref(), FLAG_BAD_CLAIM_DATE, &mut flags);
        rec.verification_date = date_field(
            self.verification_date.as_deref(),
            FLAG_BAD_VERIFICATION_DATE,
            &mut flags,
        );
        let mut last_rank = 0u32;
        for (i, s) in self.snippets.into_iter().enumerate() {
            let rank = s.rank.unwrap_or(i as u32 + 1);
            if rank == 0 || rank <= last_rank {
                return Err(format!(
                    "snippet ranks must be positive and strictly increasing (got {rank} after {last_rank})"
                ));
            }
            last_rank = rank;
            let mut snippet = EvidenceSnippet::new(
                rank,
                s.title.as_deref().unwrap_or_default(),
                s.text.as_deref().unwrap_or_default(),
                s.url.as_deref().unwrap_or_default(),
            );
            snippet.retrieved_date =
                date_field(s.retrieved_date.as_deref(), FLAG_BAD_SNIPPET_DATE, &mut flags);
            rec.snippets.push(snippet);
        }
        rec.annotations = self.annotations;
        for f in self.flags.iter().map(String::as_str).chain(flags) {
            rec.add_flag(f);
        }
        Ok(rec)
    }
}

/// Reads a JSONL dataset. In strict mode the first malformed line aborts;
/// otherwise malformed lines are skipped and counted. Duplicate ids are always
/// fatal.
pub fn ingest_jsonl(path: impl AsRef<Path>, strict: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let provenance = Provenance {
        source: format!("jsonl:{}", path.display()),
        config_hash: sha256_hex(format!("jsonl strict={strict}").as_bytes()),
    };
    ingest_jsonl_reader(BufReader::new(file), strict, provenance)
}

/// Reader-based variant of [`ingest_jsonl`].
pub fn ingest_jsonl_reader<R: BufRead>(
    reader: R,
    strict: bool,
    provenance: Provenance,
) -> Result<Dataset> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    let mut skipped = 0;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(provenance.source.clone(), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<RawClaim>(&line)
            .map_err(|e| e.to_string())
            .and_then(RawClaim::into_record);
        match parsed {
            Ok(rec) => {
                if !seen.insert(rec.claim_id.clone()) {
                    return Err(Error::DuplicateId(rec.claim_id));
                }
                records.push(rec);
            }
            Err(message) if strict => return Err(Error::Malformed { line: lineno, message }),
            Err(message) => {
                log::warn!("skipping line {lineno}: {message}");
                skipped += 1;
            }
        }
    }
    Ok(Dataset {
        records,
        provenance,
        skipped_lines: skipped,
    })
}

/// Column layout of a MultiFC-style claims TSV plus the organization rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    #[serde(default)]
    pub has_header: bool,
    pub claim_id: usize,
    pub claim_text: usize,
    pub raw_label: usize,
    /// Explicit organization column; overrides the prefix rule when set.
    #[serde(default)]
    pub organization: Option<usize>,
    #[serde(default)]
    pub claim_date: Option<usize>,
    #[serde(default)]
    pub verification_date: Option<usize>,
    #[serde(default = "default_delimiter")]
    pub prefix_delimiter: String,
    #[serde(default)]
    pub org_prefixes: BTreeMap<String, String>,
    /// Appended to the claim id to form the snippet file name.
    #[serde(default)]
    pub snippet_suffix: String,
}

fn default_delimiter() -> String {
    "-".into()
}

const DEFAULT_COLMAP: &str = include_str!("../data/multifc_colmap.toml");

impl ColumnMap {
    /// The shipped layout for the public MultiFC release.
    pub fn multifc_default() -> Self {
        Self::from_toml_str(DEFAULT_COLMAP).expect("bundled column map is valid")
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(format!("column map: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&s)
    }

    pub fn config_hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("column map serializes"))
    }

    /// Organization for `claim_id` under the prefix rule, or `None` when the
    /// prefix is not mapped.
    pub fn organization_for(&self, claim_id: &str) -> Option<&str> {
        let prefix = claim_id
            .split(self.prefix_delimiter.as_str())
            .next()
            .unwrap_or(claim_id);
        self.org_prefixes
            .get(&prefix.to_lowercase())
            .map(String::as_str)
    }

    fn max_index(&self) -> (&'static str, usize) {
        let mut fields = vec![
            ("claim_id", self.claim_id),
            ("claim_text", self.claim_text),
            ("raw_label", self.raw_label),
        ];
        fields.extend(self.organization.map(|i| ("organization", i)));
        fields.extend(self.claim_date.map(|i| ("claim_date", i)));
        fields.extend(self.verification_date.map(|i| ("verification_date", i)));
        fields.into_iter().max_by_key(|&(_, i)| i).expect("non-empty")
    }
}

fn tsv_reader<R: std::io::Read>(r: R, has_header: bool) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .flexible(true)
        .has_headers(has_header)
        .from_reader(r)
}

fn field(rec: &csv::ByteRecord, i: usize) -> String {
    rec.get(i)
        .map(|b| nfc(&String::from_utf8_lossy(b)))
        .unwrap_or_default()
}

/// Ingests a MultiFC-style claims TSV and its per-claim snippet files.
///
/// A missing or unreadable snippet file flags the claim and leaves it with no
/// snippets. A missing snippet directory, an unreadable claims file and a
/// column index beyond a row's width are fatal.
pub fn ingest_multifc(
    claims_tsv: impl AsRef<Path>,
    snippets_dir: impl AsRef<Path>,
    colmap: &ColumnMap,
) -> Result<Dataset> {
    let claims_tsv = claims_tsv.as_ref();
    let snippets_dir = snippets_dir.as_ref();
    if !snippets_dir.is_dir() {
        return Err(Error::io(
            snippets_dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "snippet directory not found"),
        ));
    }
    let file = File::open(claims_tsv).map_err(|e| Error::io(claims_tsv, e))?;
    let mut reader = tsv_reader(BufReader::new(file), colmap.has_header);
    let (max_field, max_idx) = colmap.max_index();

    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for row in reader.byte_records() {
        let row = row?;
        if row.iter().all(|f| f.is_empty()) {
            continue;
        }
        if max_idx >= row.len() {
            return Err(Error::ColumnOutOfRange {
                field: max_field,
                index: max_idx,
                width: row.len(),
            });
        }
        let claim_id = field(&row, colmap.claim_id).trim().to_owned();
        let (organization, unknown_prefix) = match colmap.organization {
            Some(i) => (field(&row, i), false),
            None => match colmap.organization_for(&claim_id) {
                Some(org) => (org.to_owned(), false),
                None => (
                    claim_id
                        .split(colmap.prefix_delimiter.as_str())
                        .next()
                        .unwrap_or_default()
                        .to_owned(),
                    true,
                ),
            },
        };
        let mut rec = ClaimRecord::new(
            &claim_id,
            &field(&row, colmap.claim_text),
            &organization,
            &field(&row, colmap.raw_label),
        );
        if unknown_prefix {
            rec.add_flag(FLAG_UNKNOWN_ORG_PREFIX);
        }
        if rec.claim_text.trim().is_empty() {
            rec.add_flag(FLAG_EMPTY_CLAIM_TEXT);
        }
        let mut flags = Vec::new();
        rec.claim_date = date_field(
            colmap.claim_date.map(|i| field(&row, i)).as_deref(),
            FLAG_BAD_CLAIM_DATE,
            &mut flags,
        );
        rec.verification_date = date_field(
            colmap.verification_date.map(|i| field(&row, i)).as_deref(),
            FLAG_BAD_VERIFICATION_DATE,
            &mut flags,
        );
        for f in flags {
            rec.add_flag(f);
        }

        let snippet_path = snippets_dir.join(format!("{}{}", claim_id, colmap.snippet_suffix));
        match read_snippet_file(&snippet_path) {
            Ok(Some((snippets, bad_rank))) => {
                rec.snippets = snippets;
                if bad_rank {
                    rec.add_flag(FLAG_BAD_SNIPPET_RANK);
                }
            }
            Ok(None) => rec.add_flag(FLAG_MISSING_SNIPPETS),
            Err(e) => {
                log::warn!("{}: {e}", snippet_path.display());
                rec.add_flag(FLAG_UNREADABLE_SNIPPETS);
            }
        }

        if !seen.insert(rec.claim_id.clone()) {
            return Err(Error::DuplicateId(rec.claim_id));
        }
        records.push(rec);
    }

    Ok(Dataset {
        records,
        provenance: Provenance {
            source: format!(
                "multifc:{}|{}",
                claims_tsv.display(),
                snippets_dir.display()
            ),
            config_hash: colmap.config_hash(),
        },
        skipped_lines: 0,
    })
}

/// Reads one snippet file (`rank, title, text, url` per row). Returns
/// `Ok(None)` if the file does not exist. When ranks are unparseable or not
/// strictly increasing, rows are renumbered 1..n in file order and the
/// second tuple element is true.
fn read_snippet_file(path: &Path) -> Result<Option<(Vec<EvidenceSnippet>, bool)>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(Error::io(path, e)),
    };
    let mut reader = tsv_reader(BufReader::new(file), false);
    let mut snippets = Vec::new();
    let mut renumber = false;
    let mut last = 0u32;
    for row in reader.byte_records() {
        let row = row?;
        if row.iter().all(|f| f.is_empty()) {
            continue;
        }
        let rank = field(&row, 0).trim().parse::<u32>().ok();
        match rank {
            Some(r) if r > last => last = r,
            _ => renumber = true,
        }
        snippets.push(EvidenceSnippet {
            rank: rank.unwrap_or(0),
            title: field(&row, 1),
            text: field(&row, 2),
            url: field(&row, 3),
            retrieved_date: None,
        });
    }
    if renumber {
        for (i, s) in snippets.iter_mut().enumerate() {
            s.rank = i as u32 + 1;
        }
    }
    Ok(Some((snippets, renumber)))
}

/// Summary of dataset health. Never fails; problems are counted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ValidationReport {
    pub records: usize,
    pub snippets: usize,
    pub zero_snippet_claims: usize,
    pub empty_field_snippets: usize,
    pub empty_claim_texts: usize,
    pub rank_violations: usize,
    pub duplicates: usize,
    pub duplicate_ids: Vec<String>,
    pub skipped_lines: usize,
    pub flags: BTreeMap<String, usize>,
    pub per_organization: BTreeMap<String, usize>,
}

impl ValidationReport {
    pub fn is_fatal(&self) -> bool {
        self.duplicates > 0
    }
}

pub fn validate(d: &Dataset) -> ValidationReport {
    let mut report = ValidationReport {
        records: d.records.len(),
        skipped_lines: d.skipped_lines,
        ..Default::default()
    };
    let mut seen = HashSet::new();
    let mut dup_ids = BTreeSet::new();
    for r in &d.records {
        if !seen.insert(r.claim_id.as_str()) {
            dup_ids.insert(r.claim_id.clone());
            report.duplicates += 1;
        }
        report.snippets += r.snippets.len();
        if r.snippets.is_empty() {
            report.zero_snippet_claims += 1;
        }
        report.empty_field_snippets += r.snippets.iter().filter(|s| s.is_empty()).count();
        if r.claim_text.trim().is_empty() {
            report.empty_claim_texts += 1;
        }
        if r
            .snippets
            .windows(2)
            .any(|w| w[1].rank <= w[0].rank)
            || r.snippets.first().is_some_and(|s| s.rank == 0)
        {
            report.rank_violations += 1;
        }
        for f in &r.flags {
            *report.flags.entry(f.clone()).or_default() += 1;
        }
        *report
            .per_organization
            .entry(r.organization.clone())
            .or_default() += 1;
    }
    report.duplicate_ids = dup_ids.into_iter().collect();
    report
}
