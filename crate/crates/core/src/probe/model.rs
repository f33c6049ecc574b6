use std::collections::HashSet;
use std::io::{Cursor, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::SparseVector;
use super::metrics::{compute_report, Partition};
use super::ProbeConfig;
use crate::corpus::ClaimRecord;
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::sha256_hex;

const MAGIC: &[u8; 8] = b"LKPROBE\0";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TrainingProvenance {
    /// Hash of the dataset the splits were drawn from, when known.
    pub dataset_hash: Option<String>,
    pub train_ids_hash: String,
    pub dev_ids_hash: String,
    pub n_train: usize,
    pub n_dev: usize,
    pub rejected_off_scale: usize,
    pub best_epoch: usize,
    /// Dev macro-F1 after each epoch (train macro-F1 when dev is empty).
    pub epoch_scores: Vec<f64>,
}

/// Trained linear probe: one weight row of `hash_dims` floats per label.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeModel {
    pub config: ProbeConfig,
    weights: Vec<f32>,
    bias: Vec<f32>,
    pub provenance: TrainingProvenance,
}

#[derive(Serialize, Deserialize)]
struct Header {
    config: ProbeConfig,
    provenance: TrainingProvenance,
    n_labels: usize,
    hash_dims: usize,
}

fn ids_hash(records: &[&ClaimRecord]) -> String {
    let joined: Vec<&str> = records.iter().map(|r| r.claim_id.as_str()).collect();
    sha256_hex(joined.join("\n").as_bytes())
}

struct Example {
    label: usize,
    x: SparseVector,
}

fn prepare(records: &[&ClaimRecord], config: &ProbeConfig) -> (Vec<Example>, usize) {
    let prepared = par::map(records, Execution::Parallel, |r| {
        config.label_index(&r.raw_label).map(|label| Example {
            label,
            x: config.featurize(&config.input_for(r)).l2_normalized(),
        })
    });
    let rejected = prepared.iter().filter(|e| e.is_none()).count();
    (prepared.into_iter().flatten().collect(), rejected)
}

impl ProbeModel {
    fn zeros(config: ProbeConfig) -> Self {
        let k = config.labels.len();
        ProbeModel {
            weights: vec![0.0; k * config.hash_dims],
            bias: vec![0.0; k],
            config,
            provenance: TrainingProvenance::default(),
        }
    }

    pub fn n_labels(&self) -> usize {
        self.bias.len()
    }

    pub fn weight(&self, label: usize, index: usize) -> f32 {
        self.weights[label * self.config.hash_dims + index]
    }

    pub fn bias(&self) -> &[f32] {
        &self.bias
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|w| w.is_finite())
    }

    fn scores_into(&self, x: &SparseVector, out: &mut [f32]) {
        let dims = self.config.hash_dims;
        for (k, s) in out.iter_mut().enumerate() {
            let row = &self.weights[k * dims..(k + 1) * dims];
            *s = self.bias[k] + x.iter().map(|(j, v)| row[j] * v).sum::<f32>();
        }
    }

    fn predict_normalized(&self, x: &SparseVector) -> usize {
        let mut scores = vec![0.0; self.n_labels()];
        self.scores_into(x, &mut scores);
        argmax(&scores)
    }

    /// Predicted class index for raw input text. Ties go to the lowest index.
    pub fn predict_text(&self, text: &str) -> usize {
        self.predict_normalized(&self.config.featurize(text).l2_normalized())
    }

    pub fn predict_record(&self, c: &ClaimRecord) -> usize {
        self.predict_text(&self.config.input_for(c))
    }

    fn sgd_step(&mut self, ex: &Example, scores: &mut [f32]) {
        self.scores_into(&ex.x, scores);
        softmax(scores);
        let dims = self.config.hash_dims;
        let lr = self.config.learning_rate;
        for (k, p) in scores.iter().enumerate() {
            let grad = p - if k == ex.label { 1.0 } else { 0.0 };
            if grad == 0.0 {
                continue;
            }
            self.bias[k] -= lr * grad;
            let row = &mut self.weights[k * dims..(k + 1) * dims];
            for (j, v) in ex.x.iter() {
                row[j] -= lr * grad * v;
            }
        }
    }

    fn macro_f1(&self, examples: &[Example]) -> f64 {
        let predicted = par::map(examples, Execution::Parallel, |e| self.predict_normalized(&e.x));
        let gold: Vec<usize> = examples.iter().map(|e| e.label).collect();
        compute_report(Partition::All, &self.config.labels, &gold, &predicted)
            .f1_macro
            .unwrap_or(0.0)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = serde_json::to_vec(&Header {
            config: self.config.clone(),
            provenance: self.provenance.clone(),
            n_labels: self.n_labels(),
            hash_dims: self.config.hash_dims,
        })
        .expect("header serializes");
        let mut out = Vec::with_capacity(16 + header.len() + 4 * (self.weights.len() + self.bias.len()));
        out.extend_from_slice(MAGIC);
        out.write_u32::<LittleEndian>(FORMAT_VERSION).expect("vec write");
        out.write_u32::<LittleEndian>(header.len() as u32).expect("vec write");
        out.extend_from_slice(&header);
        for w in self.weights.iter().chain(&self.bias) {
            out.write_f32::<LittleEndian>(*w).expect("vec write");
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::ModelFormat(m.to_owned());
        let mut cur = Cursor::new(bytes);
        let mut magic = [0u8; 8];
        cur.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
        if &magic != MAGIC {
            return Err(bad("not a probe model file"));
        }
        let version = cur.read_u32::<LittleEndian>().map_err(|_| bad("truncated header"))?;
        if version != FORMAT_VERSION {
            return Err(Error::ModelFormat(format!("unsupported format version {version}")));
        }
        let len = cur.read_u32::<LittleEndian>().map_err(|_| bad("truncated header"))? as usize;
        let mut header = vec![0u8; len];
        cur.read_exact(&mut header).map_err(|_| bad("truncated header"))?;
        let header: Header = serde_json::from_slice(&header)?;
        header.config.validate()?;
        if header.n_labels != header.config.labels.len() || header.hash_dims != header.config.hash_dims {
            return Err(bad("header dimensions disagree with config"));
        }
        let n = header.n_labels * header.hash_dims;
        let mut values = vec![0f32; n + header.n_labels];
        cur.read_f32_into::<LittleEndian>(&mut values)
            .map_err(|_| bad("truncated weights"))?;
        if (cur.position() as usize) != bytes.len() {
            return Err(bad("trailing bytes after weights"));
        }
        let bias = values.split_off(n);
        let model = ProbeModel {
            config: header.config,
            weights: values,
            bias,
            provenance: header.provenance,
        };
        if !model.is_finite() {
            return Err(bad("non-finite weights"));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    pub fn content_hash(&self) -> String {
        sha256_hex(&self.to_bytes())
    }
}

fn argmax(scores: &[f32]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

fn softmax(scores: &mut [f32]) {
    let max = scores.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let mut sum = 0.0;
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        sum += *s;
    }
    for s in scores.iter_mut() {
        *s /= sum;
    }
}

/// Trains the probe with per-sample SGD on softmax cross-entropy. Samples are
/// visited in a seeded shuffle each epoch; the epoch with the best dev
/// macro-F1 is returned (earliest wins ties). Records whose label is not on
/// the configured scale are dropped and counted.
pub fn train(
    train_set: &[&ClaimRecord],
    dev_set: &[&ClaimRecord],
    config: &ProbeConfig,
) -> Result<ProbeModel> {
    config.validate()?;
    let train_ids: HashSet<&str> = train_set.iter().map(|r| r.claim_id.as_str()).collect();
    if let Some(r) = dev_set.iter().find(|r| train_ids.contains(r.claim_id.as_str())) {
        return Err(Error::Consistency(format!(
            "claim {:?} is in both train and dev",
            r.claim_id
        )));
    }
    let (train_ex, rejected_train) = prepare(train_set, config);
    let (dev_ex, rejected_dev) = prepare(dev_set, config);
    if train_ex.is_empty() {
        return Err(Error::EmptyTrainSet);
    }

    let mut model = ProbeModel::zeros(config.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train_ex.len()).collect();
    let mut scores = vec![0.0f32; config.labels.len()];
    let mut best: Option<(f64, usize, ProbeModel)> = None;
    let mut epoch_scores = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            model.sgd_step(&train_ex[i], &mut scores);
        }
        let score = if dev_ex.is_empty() {
            model.macro_f1(&train_ex)
        } else {
            model.macro_f1(&dev_ex)
        };
        epoch_scores.push(score);
        log::debug!("epoch {epoch}: macro-F1 {score:.4}");
        if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
            best = Some((score, epoch, model.clone()));
        }
    }

    let (_, best_epoch, mut chosen) = best.expect("at least one epoch");
    chosen.provenance = TrainingProvenance {
        dataset_hash: None,
        train_ids_hash: ids_hash(train_set),
        dev_ids_hash: ids_hash(dev_set),
        n_train: train_ex.len(),
        n_dev: dev_ex.len(),
        rejected_off_scale: rejected_train + rejected_dev,
        best_epoch,
        epoch_scores,
    };
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::EvidenceSnippet;

    fn rec(id: &str, label: &str, text: &str) -> ClaimRecord {
        ClaimRecord::new(id, "claim", "toy", label)
            .with_snippets(vec![EvidenceSnippet::new(1, "", text, "")])
    }

    fn config() -> ProbeConfig {
        let mut c = ProbeConfig::new("toy", vec!["true".into(), "false".into()]);
        c.hash_dims = 1 << 12;
        c.epochs = 5;
        c
    }

    fn toy() -> (Vec<ClaimRecord>, Vec<ClaimRecord>) {
        let train = (0..20)
            .map(|i| {
                if i % 2 == 0 {
                    rec(&format!("t{i}"), "true", &format!("confirmed report {i}"))
                } else {
                    rec(&format!("t{i}"), "false", &format!("debunked report {i}"))
                }
            })
            .collect();
        let dev = (0..6)
            .map(|i| {
                if i % 2 == 0 {
                    rec(&format!("d{i}"), "true", "confirmed story")
                } else {
                    rec(&format!("d{i}"), "false", "debunked story")
                }
            })
            .collect();
        (train, dev)
    }

    #[test]
    fn separable_toy_reaches_full_dev_accuracy() {
        let (train_set, dev) = toy();
        let tr: Vec<&ClaimRecord> = train_set.iter().collect();
        let dv: Vec<&ClaimRecord> = dev.iter().collect();
        let m = train(&tr, &dv, &config()).unwrap();
        let correct = dev
            .iter()
            .filter(|r| m.predict_record(r) == m.config.label_index(&r.raw_label).unwrap())
            .count();
        assert_eq!(correct, dev.len());
        assert!(m.is_finite());
    }

    #[test]
    fn same_seed_same_weights() {
        let (train_set, dev) = toy();
        let tr: Vec<&ClaimRecord> = train_set.iter().collect();
        let dv: Vec<&ClaimRecord> = dev.iter().collect();
        let a = train(&tr, &dv, &config()).unwrap();
        let b = train(&tr, &dv, &config()).unwrap();
        assert_eq!(a.to_bytes(), b.to_bytes());
    }

    #[test]
    fn empty_train_and_off_scale() {
        assert!(matches!(train(&[], &[], &config()), Err(Error::EmptyTrainSet)));
        let odd = rec("x", "misleading", "whatever");
        assert!(matches!(train(&[&odd], &[], &config()), Err(Error::EmptyTrainSet)));
        let (train_set, _) = toy();
        let mut tr: Vec<&ClaimRecord> = train_set.iter().collect();
        tr.push(&odd);
        let m = train(&tr, &[], &config()).unwrap();
        assert_eq!(m.provenance.rejected_off_scale, 1);
        assert_eq!(m.provenance.n_train, 20);
    }

    #[test]
    fn overlapping_splits_rejected() {
        let (train_set, _) = toy();
        let tr: Vec<&ClaimRecord> = train_set.iter().collect();
        assert!(matches!(
            train(&tr, &tr[..1], &config()),
            Err(Error::Consistency(_))
        ));
    }

    #[test]
    fn model_bytes_round_trip() {
        let (train_set, dev) = toy();
        let tr: Vec<&ClaimRecord> = train_set.iter().collect();
        let dv: Vec<&ClaimRecord> = dev.iter().collect();
        let m = train(&tr, &dv, &config()).unwrap();
        let back = ProbeModel::from_bytes(&m.to_bytes()).unwrap();
        assert_eq!(back, m);
        let mut bytes = m.to_bytes();
        bytes.push(0);
        assert!(ProbeModel::from_bytes(&bytes).is_err());
        assert!(ProbeModel::from_bytes(b"garbage").is_err());
    }

    #[test]
    fn argmax_ties_lowest() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
    }
}
