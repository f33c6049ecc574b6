//! Train/dev/test claim-id lists.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{ClaimRecord, Dataset};
use crate::error::{Error, Result};
use crate::labels::normalize;

pub const SPLIT_NAMES: [&str; 3] = ["train", "dev", "test"];

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Splits {
    pub train: Vec<String>,
    pub dev: Vec<String>,
    pub test: Vec<String>,
}

impl Splits {
    pub fn check_disjoint(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for (name, ids) in [("train", &self.train), ("dev", &self.dev), ("test", &self.test)] {
            for id in ids {
                if !seen.insert(id.as_str()) {
                    return Err(Error::Consistency(format!(
                        "claim {id:?} appears more than once across splits (again in {name})"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn split_path(dir: &Path, name: &str) -> Option<PathBuf> {
    [dir.join(name), dir.join(format!("{name}.txt"))]
        .into_iter()
        .find(|p| p.is_file())
}

fn read_ids(path: &Path) -> Result<Vec<String>> {
    let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(s.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect())
}

/// Reads `train`, `dev` and `test` (optionally with a `.txt` extension) from
/// `dir`, one claim id per line. `dev` may be absent.
pub fn read_splits(dir: impl AsRef<Path>) -> Result<Splits> {
    let dir = dir.as_ref();
    let required = |name: &str| {
        split_path(dir, name).ok_or_else(|| {
            Error::io(
                dir.join(name),
                std::io::Error::new(std::io::ErrorKind::NotFound, "split file not found"),
            )
        })
    };
    let splits = Splits {
        train: read_ids(&required("train")?)?,
        dev: match split_path(dir, "dev") {
            Some(p) => read_ids(&p)?,
            None => Vec::new(),
        },
        test: read_ids(&required("test")?)?,
    };
    splits.check_disjoint()?;
    Ok(splits)
}

/// Writes `train.txt`, `dev.txt` and `test.txt` into `dir`.
pub fn write_splits(splits: &Splits, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut written = Vec::new();
    for (name, ids) in [("train", &splits.train), ("dev", &splits.dev), ("test", &splits.test)] {
        let path = dir.join(format!("{name}.txt"));
        let mut body = ids.join("\n");
        if !body.is_empty() {
            body.push('\n');
        }
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Looks up claim ids in `d`. Unknown ids are an error.
pub fn resolve_ids<'a>(d: &'a Dataset, ids: &[String]) -> Result<Vec<&'a ClaimRecord>> {
    let index: HashMap<&str, &ClaimRecord> =
        d.records.iter().map(|r| (r.claim_id.as_str(), r)).collect();
    let mut missing = Vec::new();
    let out: Vec<&ClaimRecord> = ids
        .iter()
        .filter_map(|id| {
            let r = index.get(id.as_str()).copied();
            if r.is_none() {
                missing.push(id.as_str());
            }
            r
        })
        .collect();
    if !missing.is_empty() {
        return Err(Error::Consistency(format!(
            "{} split ids not in dataset (first: {:?})",
            missing.len(),
            missing[0]
        )));
    }
    Ok(out)
}

/// Seeded 70/10/20 split stratified by normalized raw label. Within each
/// split, ids keep the order of `records`.
pub fn stratified_split(records: &[&ClaimRecord], seed: u64) -> Splits {
    let position: HashMap<&str, usize> = records
        .iter()
        .enumerate()
        .map(|(i, r)| (r.claim_id.as_str(), i))
        .collect();
    let mut strata: BTreeMap<String, Vec<&str>> = BTreeMap::new();
    for r in records {
        strata
            .entry(normalize(&r.raw_label))
            .or_default()
            .push(r.claim_id.as_str());
    }
    // Each stratum is shuffled and its members placed at evenly spaced
    // quantiles; cutting the merged order at 70% and 80% keeps every label
    // within one claim of its share while the totals stay exact.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keyed: Vec<(f64, usize, &str)> = Vec::with_capacity(records.len());
    for (s, ids) in strata.values_mut().enumerate() {
        ids.sort_unstable();
        ids.shuffle(&mut rng);
        let n = ids.len() as f64;
        keyed.extend(ids.iter().enumerate().map(|(i, id)| ((i as f64 + 0.5) / n, s, *id)));
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let n = keyed.len();
    let n_train = ((n as f64) * 0.7).round() as usize;
    let n_dev = (((n as f64) * 0.1).round() as usize).min(n - n_train);
    let ids: Vec<&str> = keyed.into_iter().map(|k| k.2).collect();
    let (train, rest) = ids.split_at(n_train);
    let (dev, test) = rest.split_at(n_dev);
    let (train, dev, test) = (train.to_vec(), dev.to_vec(), test.to_vec());
    let finish = |mut v: Vec<&str>| -> Vec<String> {
        v.sort_by_key(|id| position[id]);
        v.into_iter().map(str::to_owned).collect()
    };
    Splits {
        train: finish(train),
        dev: finish(dev),
        test: finish(test),
    }
}
