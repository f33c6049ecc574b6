//! Corpus-level statistics and deterministic report emission.
//!
//! JSON output has keys sorted at every level and every float printed with
//! four decimals; CSV output has a fixed header row. Emitting the same value
//! twice produces identical bytes.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus::{Dataset, ValidationReport};
use crate::detector::ClaimLeakStatus;
use crate::error::{Error, Result};
use crate::labels::{group_verdict_3way, LabelScheme, VerdictGroup};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Count {
    pub count: usize,
    pub ratio: f64,
}

impl Count {
    fn of(count: usize, population: usize) -> Self {
        let ratio = if population == 0 {
            0.0
        } else {
            count as f64 / population as f64
        };
        Count { count, ratio }
    }
}

/// Number and share of claims with leaked evidence, per mechanism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakStats {
    pub by_either: Count,
    pub by_phrase: Count,
    pub by_url: Count,
    pub filter: String,
    pub population: usize,
}

pub const FILTER_ALL: &str = "all-claims";
pub const FILTER_MISINFO: &str = "misinformation-only";

/// Counts claims whose status sets each mechanism flag, optionally only over
/// misinformation claims. Every claim must have exactly one status and every
/// status must belong to a claim.
pub fn leak_stats(
    d: &Dataset,
    statuses: &[ClaimLeakStatus],
    scheme: &LabelScheme,
    misinfo_only: bool,
) -> Result<LeakStats> {
    if statuses.len() != d.records.len() {
        return Err(Error::Consistency(format!(
            "{} statuses for {} claims",
            statuses.len(),
            d.records.len()
        )));
    }
    let index = crate::detector::index_statuses(statuses);
    if index.len() != statuses.len() {
        return Err(Error::Consistency("duplicate claim ids among statuses".into()));
    }
    let (mut population, mut url, mut phrase, mut either) = (0, 0, 0, 0);
    for r in &d.records {
        let status = index.get(r.claim_id.as_str()).ok_or_else(|| {
            Error::Consistency(format!("no leak status for claim {:?}", r.claim_id))
        })?;
        if misinfo_only && !scheme.is_misinformation(&r.organization, &r.raw_label) {
            continue;
        }
        population += 1;
        url += status.leaked_by_url as usize;
        phrase += status.leaked_by_phrase as usize;
        either += status.leaked as usize;
    }
    Ok(LeakStats {
        by_either: Count::of(either, population),
        by_phrase: Count::of(phrase, population),
        by_url: Count::of(url, population),
        filter: if misinfo_only { FILTER_MISINFO } else { FILTER_ALL }.to_owned(),
        population,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct YearRow {
    pub false_count: usize,
    pub mixed_count: usize,
    pub true_count: usize,
    pub other_count: usize,
    pub false_ratio: f64,
    pub mixed_ratio: f64,
    pub true_ratio: f64,
}

impl YearRow {
    pub fn count(&self, g: VerdictGroup) -> usize {
        match g {
            VerdictGroup::False => self.false_count,
            VerdictGroup::Mixed => self.mixed_count,
            VerdictGroup::True => self.true_count,
            VerdictGroup::Other => self.other_count,
        }
    }

    pub fn ratio(&self, g: VerdictGroup) -> Option<f64> {
        match g {
            VerdictGroup::False => Some(self.false_ratio),
            VerdictGroup::Mixed => Some(self.mixed_ratio),
            VerdictGroup::True => Some(self.true_ratio),
            VerdictGroup::Other => None,
        }
    }

    pub fn grouped(&self) -> usize {
        self.false_count + self.mixed_count + self.true_count
    }
}

/// Per-year verdict shares by verification year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearlyVerdictTable {
    pub rows: BTreeMap<i32, YearRow>,
    /// Dated OTHER-group claims plus undated claims.
    pub excluded: usize,
    pub excluded_other: usize,
    pub undated: usize,
    pub include_other: bool,
    pub organization: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct YearlyOptions {
    /// Count OTHER verdicts in each year's denominator.
    pub include_other: bool,
    /// Only consider claims of this organization.
    pub organization: Option<String>,
}

pub fn verdict_ratio_by_year(d: &Dataset) -> YearlyVerdictTable {
    verdict_ratio_by_year_with(d, &YearlyOptions::default())
}

pub fn verdict_ratio_by_year_with(d: &Dataset, opts: &YearlyOptions) -> YearlyVerdictTable {
    use chrono::Datelike;

    let org = opts.organization.as_deref().map(crate::labels::normalize);
    let mut rows: BTreeMap<i32, YearRow> = BTreeMap::new();
    let (mut excluded_other, mut undated) = (0, 0);
    for r in &d.records {
        if org.as_deref().is_some_and(|o| o != r.organization) {
            continue;
        }
        let Some(date) = r.verification_date else {
            undated += 1;
            continue;
        };
        let row = rows.entry(date.year()).or_default();
        match group_verdict_3way(&r.raw_label) {
            VerdictGroup::False => row.false_count += 1,
            VerdictGroup::Mixed => row.mixed_count += 1,
            VerdictGroup::True => row.true_count += 1,
            VerdictGroup::Other => {
                row.other_count += 1;
                excluded_other += 1;
            }
        }
    }
    for row in rows.values_mut() {
        let denom = row.grouped() + if opts.include_other { row.other_count } else { 0 };
        if denom > 0 {
            let n = denom as f64;
            row.false_ratio = row.false_count as f64 / n;
            row.mixed_ratio = row.mixed_count as f64 / n;
            row.true_ratio = row.true_count as f64 / n;
        }
    }
    YearlyVerdictTable {
        rows,
        excluded: excluded_other + undated,
        excluded_other,
        undated,
        include_other: opts.include_other,
        organization: org,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown report format {other:?}")),
        }
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// A report that can be written as JSON and as a CSV table.
pub trait Report: Serialize {
    fn csv_header(&self) -> Vec<&'static str>;
    fn csv_rows(&self) -> Vec<Vec<String>>;
}

pub(crate) fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}

pub(crate) fn opt4(x: Option<f64>) -> String {
    x.map(fmt4).unwrap_or_default()
}

impl Report for LeakStats {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["filter", "population", "mechanism", "count", "ratio"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        [("url", self.by_url), ("phrase", self.by_phrase), ("either", self.by_either)]
            .into_iter()
            .map(|(m, c)| {
                vec![
                    self.filter.clone(),
                    self.population.to_string(),
                    m.to_owned(),
                    c.count.to_string(),
                    fmt4(c.ratio),
                ]
            })
            .collect()
    }
}

impl Report for YearlyVerdictTable {
    fn csv_header(&self) -> Vec<&'static str> {
        vec![
            "year",
            "false_count",
            "mixed_count",
            "true_count",
            "other_count",
            "false_ratio",
            "mixed_ratio",
            "true_ratio",
        ]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|(year, r)| {
                vec![
                    year.to_string(),
                    r.false_count.to_string(),
                    r.mixed_count.to_string(),
                    r.true_count.to_string(),
                    r.other_count.to_string(),
                    fmt4(r.false_ratio),
                    fmt4(r.mixed_ratio),
                    fmt4(r.true_ratio),
                ]
            })
            .collect()
    }
}

impl Report for ValidationReport {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["metric", "value"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        let mut rows = vec![
            vec!["records".into(), self.records.to_string()],
            vec!["snippets".into(), self.snippets.to_string()],
            vec!["zero_snippet_claims".into(), self.zero_snippet_claims.to_string()],
            vec!["empty_field_snippets".into(), self.empty_field_snippets.to_string()],
            vec!["empty_claim_texts".into(), self.empty_claim_texts.to_string()],
            vec!["rank_violations".into(), self.rank_violations.to_string()],
            vec!["duplicates".into(), self.duplicates.to_string()],
            vec!["skipped_lines".into(), self.skipped_lines.to_string()],
        ];
        rows.extend(
            self.flags
                .iter()
                .map(|(k, v)| vec![format!("flag:{k}"), v.to_string()]),
        );
        rows.extend(
            self.per_organization
                .iter()
                .map(|(k, v)| vec![format!("organization:{k}"), v.to_string()]),
        );
        rows
    }
}

/// Deterministic pretty JSON: sorted keys, four-decimal floats.
pub fn render_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => {
            out.push_str(&serde_json::to_string(v).expect("scalar serializes"))
        }
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) => out.push_str(&u.to_string()),
            (None, Some(i), _) => out.push_str(&i.to_string()),
            (_, _, Some(f)) if f.is_finite() => out.push_str(&fmt4(f)),
            _ => out.push_str("null"),
        },
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(indent + 1, out);
                write_value(item, indent + 1, out);
            }
            newline(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(indent + 1, out);
                out.push_str(&serde_json::to_string(k).expect("key serializes"));
                out.push_str(": ");
                write_value(&map[k], indent + 1, out);
            }
            newline(indent, out);
            out.push('}');
        }
    }
}

fn newline(indent: usize, out: &mut String) {
    out.push('\n');
    for _ in 0..indent {
        out.push_str("  ");
    }
}

pub fn render_csv<R: Report + ?Sized>(report: &R) -> Result<String> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(report.csv_header())?;
    for row in report.csv_rows() {
        w.write_record(&row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Consistency(format!("csv flush: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv of UTF-8 strings is UTF-8"))
}

pub fn render<R: Report + ?Sized>(report: &R, format: Format) -> Result<String> {
    match format {
        Format::Json => render_json(report),
        Format::Csv => render_csv(report),
    }
}

pub fn emit_report<R: Report + ?Sized>(report: &R, format: Format, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let body = render(report, format)?;
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Claim ids present in `statuses` but not in `d`, for diagnostics.
pub fn orphan_statuses<'a>(d: &Dataset, statuses: &'a [ClaimLeakStatus]) -> Vec<&'a str> {
    let ids: HashSet<&str> = d.records.iter().map(|r| r.claim_id.as_str()).collect();
    statuses
        .iter()
        .map(|s| s.claim_id.as_str())
        .filter(|id| !ids.contains(id))
        .collect()
}
