use serde::{Deserialize, Serialize};

use crate::report::{fmt4, opt4, Report};

/// Test-set slice by claim-level leak status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Partition {
    All,
    Leaked,
    Unleaked,
}

impl Partition {
    pub fn as_str(self) -> &'static str {
        match self {
            Partition::All => "ALL",
            Partition::Leaked => "LEAKED",
            Partition::Unleaked => "UNLEAKED",
        }
    }

    pub fn admits(self, leaked: bool) -> bool {
        match self {
            Partition::All => true,
            Partition::Leaked => leaked,
            Partition::Unleaked => !leaked,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    /// How often the label was predicted.
    pub predicted: usize,
}

/// Classification metrics over one partition. Aggregate metrics are absent
/// when the partition is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub partition: Partition,
    pub n_samples: usize,
    pub accuracy: Option<f64>,
    pub f1_micro: Option<f64>,
    pub f1_macro: Option<f64>,
    pub per_label: Vec<LabelMetrics>,
    /// Records dropped because their label is not on the scale.
    pub skipped_off_scale: usize,
}

impl EvalReport {
    pub fn predicted_rate(&self, label: &str) -> Option<f64> {
        if self.n_samples == 0 {
            return None;
        }
        self.per_label
            .iter()
            .find(|m| m.label == label)
            .map(|m| m.predicted as f64 / self.n_samples as f64)
    }
}

fn safe_div(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Per-label precision/recall/F1 plus micro and macro F1. Labels that are
/// never predicted and never gold contribute an F1 of zero to the macro mean.
pub fn compute_report(
    partition: Partition,
    labels: &[String],
    gold: &[usize],
    predicted: &[usize],
) -> EvalReport {
    assert_eq!(gold.len(), predicted.len(), "gold/predicted length mismatch");
    let k = labels.len();
    let (mut tp, mut support, mut pred_count) = (vec![0; k], vec![0; k], vec![0; k]);
    for (&g, &p) in gold.iter().zip(predicted) {
        support[g] += 1;
        pred_count[p] += 1;
        if g == p {
            tp[g] += 1;
        }
    }
    let per_label: Vec<LabelMetrics> = (0..k)
        .map(|i| {
            let precision = safe_div(tp[i], pred_count[i]);
            let recall = safe_div(tp[i], support[i]);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            LabelMetrics {
                label: labels[i].clone(),
                precision,
                recall,
                f1,
                support: support[i],
                predicted: pred_count[i],
            }
        })
        .collect();
    let n = gold.len();
    let (accuracy, f1_micro, f1_macro) = if n == 0 {
        (None, None, None)
    } else {
        // Single-label multiclass: micro P = micro R = accuracy.
        let correct: usize = tp.iter().sum();
        let micro_p = safe_div(correct, n);
        let micro_r = safe_div(correct, n);
        let micro_f1 = if micro_p + micro_r > 0.0 {
            2.0 * micro_p * micro_r / (micro_p + micro_r)
        } else {
            0.0
        };
        let macro_f1 = per_label.iter().map(|m| m.f1).sum::<f64>() / k as f64;
        (Some(safe_div(correct, n)), Some(micro_f1), Some(macro_f1))
    };
    EvalReport {
        partition,
        n_samples: n,
        accuracy,
        f1_micro,
        f1_macro,
        per_label,
        skipped_off_scale: 0,
    }
}

pub(crate) fn csv_rows_for(r: &EvalReport) -> Vec<Vec<String>> {
    let p = r.partition.as_str().to_owned();
    let mut rows: Vec<Vec<String>> = r
        .per_label
        .iter()
        .map(|m| {
            vec![
                p.clone(),
                m.label.clone(),
                fmt4(m.precision),
                fmt4(m.recall),
                fmt4(m.f1),
                m.support.to_string(),
                m.predicted.to_string(),
            ]
        })
        .collect();
    for (name, value) in [
        ("(accuracy)", r.accuracy),
        ("(f1_micro)", r.f1_micro),
        ("(f1_macro)", r.f1_macro),
    ] {
        rows.push(vec![
            p.clone(),
            name.into(),
            String::new(),
            String::new(),
            opt4(value),
            r.n_samples.to_string(),
            String::new(),
        ]);
    }
    rows
}

pub(crate) const CSV_HEADER: [&str; 7] = [
    "partition",
    "label",
    "precision",
    "recall",
    "f1",
    "support",
    "predicted",
];

impl Report for EvalReport {
    fn csv_header(&self) -> Vec<&'static str> {
        CSV_HEADER.to_vec()
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        csv_rows_for(self)
    }
}
