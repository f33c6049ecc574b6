//! Verdict handling: per-organization misinformation label sets, the coarse
//! three-way grouping of PolitiFact-style verdicts, and the ordinal veracity
//! scales used by the probe.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_LABELS: &str = include_str!("../data/labels.tsv");

/// Coarse verdict band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VerdictGroup {
    #[serde(rename = "FALSE_GROUP")]
    False,
    #[serde(rename = "MIXED_GROUP")]
    Mixed,
    #[serde(rename = "TRUE_GROUP")]
    True,
    #[serde(rename = "OTHER")]
    Other,
}

impl VerdictGroup {
    pub const GROUPED: [VerdictGroup; 3] = [VerdictGroup::False, VerdictGroup::Mixed, VerdictGroup::True];

    pub fn as_str(self) -> &'static str {
        match self {
            VerdictGroup::False => "FALSE_GROUP",
            VerdictGroup::Mixed => "MIXED_GROUP",
            VerdictGroup::True => "TRUE_GROUP",
            VerdictGroup::Other => "OTHER",
        }
    }
}

/// Class column of the label data file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelClass {
    Misinfo,
    True,
    Mixed,
    Other,
}

impl std::str::FromStr for LabelClass {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "misinfo" => Ok(LabelClass::Misinfo),
            "true" => Ok(LabelClass::True),
            "mixed" => Ok(LabelClass::Mixed),
            "other" => Ok(LabelClass::Other),
            other => Err(format!("unknown label class {other:?}")),
        }
    }
}

pub(crate) fn normalize(s: &str) -> String {
    s.trim().to_lowercase()
}

/// Three-way grouping: "pants on fire"/"false" → False, "mostly false"/"half
/// true" → Mixed, "mostly true"/"true" → True, anything else → Other. A
/// trailing "!" is ignored and hyphens count as spaces.
pub fn group_verdict_3way(raw_label: &str) -> VerdictGroup {
    let label = normalize(raw_label);
    let label = label.strip_suffix('!').unwrap_or(&label).trim_end();
    let label = label.replace('-', " ");
    match label.as_str() {
        "pants on fire" | "false" => VerdictGroup::False,
        "mostly false" | "half true" => VerdictGroup::Mixed,
        "mostly true" | "true" => VerdictGroup::True,
        _ => VerdictGroup::Other,
    }
}

/// Per-organization verdict tables loaded from the label data file.
#[derive(Debug)]
pub struct LabelScheme {
    classes: BTreeMap<String, BTreeMap<String, LabelClass>>,
    scales: BTreeMap<String, Vec<String>>,
    warned_orgs: Mutex<HashSet<String>>,
}

impl Clone for LabelScheme {
    fn clone(&self) -> Self {
        LabelScheme {
            classes: self.classes.clone(),
            scales: self.scales.clone(),
            warned_orgs: Mutex::new(HashSet::new()),
        }
    }
}

impl PartialEq for LabelScheme {
    fn eq(&self, other: &Self) -> bool {
        self.classes == other.classes && self.scales == other.scales
    }
}

impl Default for LabelScheme {
    fn default() -> Self {
        Self::parse(DEFAULT_LABELS).expect("bundled label file is valid")
    }
}

impl LabelScheme {
    /// The bundled label data file contents.
    pub fn default_source() -> &'static str {
        DEFAULT_LABELS
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&s)
    }

    /// Parses `organization \t raw_label \t class [\t scale_index]` rows.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse(src: &str) -> Result<Self> {
        let mut classes: BTreeMap<String, BTreeMap<String, LabelClass>> = BTreeMap::new();
        let mut scale_rows: BTreeMap<String, Vec<(usize, String)>> = BTreeMap::new();
        for (i, line) in src.lines().enumerate() {
            let lineno = i + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 3 {
                return Err(Error::Config(format!(
                    "label file line {lineno}: expected at least 3 tab-separated columns"
                )));
            }
            let org = normalize(cols[0]);
            let label = normalize(cols[1]);
            let class: LabelClass = cols[2]
                .parse()
                .map_err(|e| Error::Config(format!("label file line {lineno}: {e}")))?;
            let org_classes = classes.entry(org.clone()).or_default();
            if org_classes.insert(label.clone(), class).is_some() {
                return Err(Error::Config(format!(
                    "label file line {lineno}: duplicate entry ({org:?}, {label:?})"
                )));
            }
            if let Some(idx) = cols.get(3).map(|s| s.trim()).filter(|s| !s.is_empty()) {
                let idx: usize = idx.parse().map_err(|_| {
                    Error::Config(format!("label file line {lineno}: bad scale index {idx:?}"))
                })?;
                scale_rows.entry(org).or_default().push((idx, label));
            }
        }

        let mut scales = BTreeMap::new();
        for (org, mut rows) in scale_rows {
            rows.sort();
            for (expected, (idx, label)) in rows.iter().enumerate() {
                if *idx != expected {
                    return Err(Error::Config(format!(
                        "scale for {org:?} is not contiguous at {label:?} (index {idx}, expected {expected})"
                    )));
                }
            }
            scales.insert(org, rows.into_iter().map(|(_, l)| l).collect());
        }

        Ok(LabelScheme {
            classes,
            scales,
            warned_orgs: Mutex::new(HashSet::new()),
        })
    }

    fn warn_unknown(&self, org: &str) {
        let mut warned = self.warned_orgs.lock().unwrap_or_else(|e| e.into_inner());
        if warned.insert(org.to_owned()) {
            log::warn!("unknown organization {org:?}; treating its verdicts as non-misinformation");
        }
    }

    pub fn class_of(&self, org: &str, raw_label: &str) -> Option<LabelClass> {
        self.classes
            .get(&normalize(org))
            .and_then(|m| m.get(&normalize(raw_label)))
            .copied()
    }

    /// True iff `raw_label` is in the organization's misinformation set.
    /// Unknown organizations yield false.
    pub fn is_misinformation(&self, org: &str, raw_label: &str) -> bool {
        let org = normalize(org);
        match self.classes.get(&org) {
            Some(m) => m.get(&normalize(raw_label)) == Some(&LabelClass::Misinfo),
            None => {
                self.warn_unknown(&org);
                false
            }
        }
    }

    pub fn group_verdict_3way(&self, raw_label: &str) -> VerdictGroup {
        group_verdict_3way(raw_label)
    }

    /// 0-based position of `raw_label` on the organization's veracity scale.
    pub fn scale_index(&self, org: &str, raw_label: &str) -> Option<usize> {
        let label = normalize(raw_label);
        self.scales
            .get(&normalize(org))?
            .iter()
            .position(|l| *l == label)
    }

    pub fn scale(&self, org: &str) -> Option<&[String]> {
        self.scales.get(&normalize(org)).map(Vec::as_slice)
    }

    pub fn organizations(&self) -> impl Iterator<Item = &str> {
        self.classes.keys().map(String::as_str)
    }

    /// Misinformation label set per organization (organizations without any
    /// misinformation label are omitted).
    pub fn misinformation_sets(&self) -> BTreeMap<&str, BTreeSet<&str>> {
        self.classes
            .iter()
            .filter_map(|(org, m)| {
                let set: BTreeSet<&str> = m
                    .iter()
                    .filter(|(_, c)| **c == LabelClass::Misinfo)
                    .map(|(l, _)| l.as_str())
                    .collect();
                (!set.is_empty()).then_some((org.as_str(), set))
            })
            .collect()
    }
}
