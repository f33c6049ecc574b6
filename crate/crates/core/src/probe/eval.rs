use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::metrics::{compute_report, csv_rows_for, EvalReport, Partition, CSV_HEADER};
use super::model::ProbeModel;
use crate::corpus::ClaimRecord;
use crate::detector::ClaimLeakStatus;
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::report::{fmt4, Report};

type StatusIndex<'a> = HashMap<&'a str, &'a ClaimLeakStatus>;

fn status_of<'a>(statuses: &StatusIndex<'a>, c: &ClaimRecord) -> Result<&'a ClaimLeakStatus> {
    statuses
        .get(c.claim_id.as_str())
        .copied()
        .ok_or_else(|| Error::Consistency(format!("no leak status for claim {:?}", c.claim_id)))
}

fn report_over(
    model: &ProbeModel,
    partition: Partition,
    records: &[&ClaimRecord],
    skipped: usize,
) -> EvalReport {
    let gold: Vec<usize> = records
        .iter()
        .map(|r| model.config.label_index(&r.raw_label).expect("filtered to on-scale"))
        .collect();
    let predicted = par::map(records, Execution::Parallel, |r| model.predict_record(r));
    let mut report = compute_report(partition, &model.config.labels, &gold, &predicted);
    report.skipped_off_scale = skipped;
    report
}

/// Evaluates `model` on the test records admitted by `partition`.
pub fn evaluate(
    model: &ProbeModel,
    test_set: &[&ClaimRecord],
    statuses: &StatusIndex<'_>,
    partition: Partition,
) -> Result<EvalReport> {
    let mut selected = Vec::new();
    let mut skipped = 0;
    for &r in test_set {
        let leaked = status_of(statuses, r)?.leaked;
        if !partition.admits(leaked) {
            continue;
        }
        if model.config.label_index(&r.raw_label).is_none() {
            skipped += 1;
            continue;
        }
        selected.push(r);
    }
    Ok(report_over(model, partition, &selected, skipped))
}

/// ALL / LEAKED / UNLEAKED reports and the micro-F1 gap between the last two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionedEval {
    pub all: EvalReport,
    pub leaked: EvalReport,
    pub unleaked: EvalReport,
    /// f1_micro(LEAKED) - f1_micro(UNLEAKED), absent if either is empty.
    pub gap_f1_micro: Option<f64>,
}

pub fn evaluate_partitions(
    model: &ProbeModel,
    test_set: &[&ClaimRecord],
    statuses: &StatusIndex<'_>,
) -> Result<PartitionedEval> {
    let all = evaluate(model, test_set, statuses, Partition::All)?;
    let leaked = evaluate(model, test_set, statuses, Partition::Leaked)?;
    let unleaked = evaluate(model, test_set, statuses, Partition::Unleaked)?;
    let gap_f1_micro = leaked.f1_micro.zip(unleaked.f1_micro).map(|(l, u)| l - u);
    Ok(PartitionedEval {
        all,
        leaked,
        unleaked,
        gap_f1_micro,
    })
}

impl Report for PartitionedEval {
    fn csv_header(&self) -> Vec<&'static str> {
        CSV_HEADER.to_vec()
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        let mut rows: Vec<Vec<String>> = [&self.all, &self.leaked, &self.unleaked]
            .into_iter()
            .flat_map(csv_rows_for)
            .collect();
        if let Some(gap) = self.gap_f1_micro {
            rows.push(vec![
                "LEAKED-UNLEAKED".into(),
                "(gap_f1_micro)".into(),
                String::new(),
                String::new(),
                fmt4(gap),
                String::new(),
                String::new(),
            ]);
        }
        rows
    }
}

/// The same claims evaluated once with only their leaked snippets and once
/// with only their unleaked snippets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastReport {
    pub claim_ids: Vec<String>,
    pub leaked: EvalReport,
    pub unleaked: EvalReport,
}

impl Report for ContrastReport {
    fn csv_header(&self) -> Vec<&'static str> {
        CSV_HEADER.to_vec()
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        csv_rows_for(&self.leaked)
            .into_iter()
            .chain(csv_rows_for(&self.unleaked))
            .collect()
    }
}

fn keep_snippets(c: &ClaimRecord, status: &ClaimLeakStatus, leaked: bool) -> Result<ClaimRecord> {
    if status.snippet_verdicts.len() != c.snippets.len()
        || c
            .snippets
            .iter()
            .zip(&status.snippet_verdicts)
            .any(|(s, v)| s.rank != v.snippet_rank)
    {
        return Err(Error::Consistency(format!(
            "snippet verdicts of {:?} do not line up with its snippets",
            c.claim_id
        )));
    }
    let mut out = c.clone();
    out.snippets = c
        .snippets
        .iter()
        .zip(&status.snippet_verdicts)
        .filter(|(_, v)| v.is_leaked() == leaked)
        .map(|(s, _)| s.clone())
        .collect();
    Ok(out)
}

/// Evaluates every on-scale test claim that has at least one leaked and one
/// unleaked snippet, twice: with only the leaked snippets, then with only the
/// unleaked ones. Both reports cover the same claims in the same order.
pub fn evaluate_same_claim_contrast(
    model: &ProbeModel,
    test_set: &[&ClaimRecord],
    statuses: &StatusIndex<'_>,
) -> Result<ContrastReport> {
    let mut leaked_only = Vec::new();
    let mut unleaked_only = Vec::new();
    let mut skipped = 0;
    for &r in test_set {
        let status = status_of(statuses, r)?;
        if !status.is_mixed() {
            continue;
        }
        if model.config.label_index(&r.raw_label).is_none() {
            skipped += 1;
            continue;
        }
        leaked_only.push(keep_snippets(r, status, true)?);
        unleaked_only.push(keep_snippets(r, status, false)?);
    }
    let claim_ids = leaked_only.iter().map(|r| r.claim_id.clone()).collect();
    let l: Vec<&ClaimRecord> = leaked_only.iter().collect();
    let u: Vec<&ClaimRecord> = unleaked_only.iter().collect();
    Ok(ContrastReport {
        claim_ids,
        leaked: report_over(model, Partition::Leaked, &l, skipped),
        unleaked: report_over(model, Partition::Unleaked, &u, skipped),
    })
}
