use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use super::{
    memorization_report, memorization_tokens, parse_success_rate, percentile_report,
    repetition_rate, Fraction, GenerationRecord, MemorizationReport, MetricError,
};
use crate::dataset::TaskKind;
use crate::jsonl::{read_jsonl, JsonlError};

pub type RecordsError = JsonlError;

pub fn read_records(path: &Path) -> Result<Vec<GenerationRecord>, RecordsError> {
    read_jsonl(path)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskSummary {
    pub n: usize,
    /// Absent for tasks without an initial score.
    pub avg_percentile: Option<Fraction>,
    pub repetition_rate: Fraction,
    pub parse_rate: Fraction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub systems: BTreeMap<String, BTreeMap<TaskKind, TaskSummary>>,
    /// Over records that carry a reference text.
    pub memorization: Option<MemorizationReport>,
}

/// Full report over a record set. Percentiles pool every system's records
/// of the same task.
pub fn evaluate(records: &[GenerationRecord]) -> Result<EvalReport, MetricError> {
    if records.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let percentiles = match percentile_report(records) {
        Ok(report) => Some(report),
        Err(MetricError::EmptyPool) => None,
        Err(e) => return Err(e),
    };

    let mut groups: BTreeMap<(&str, TaskKind), Vec<&str>> = BTreeMap::new();
    for rec in records {
        groups
            .entry((rec.system.as_str(), rec.task))
            .or_default()
            .push(rec.generated.as_str());
    }
    let mut systems: BTreeMap<String, BTreeMap<TaskKind, TaskSummary>> = BTreeMap::new();
    for ((system, task), texts) in groups {
        let summary = TaskSummary {
            n: texts.len(),
            avg_percentile: percentiles.as_ref().and_then(|p| p.average(system, task)),
            repetition_rate: repetition_rate(&texts),
            parse_rate: parse_success_rate(&texts).rate,
        };
        systems
            .entry(system.to_string())
            .or_default()
            .insert(task, summary);
    }

    let pairs: Vec<(Vec<String>, Vec<String>)> = records
        .iter()
        .filter_map(|r| {
            r.reference.as_ref().map(|reference| {
                (
                    memorization_tokens(&r.generated),
                    memorization_tokens(reference),
                )
            })
        })
        .collect();
    let memorization = if pairs.is_empty() {
        None
    } else {
        Some(memorization_report(&pairs)?)
    };
    Ok(EvalReport {
        systems,
        memorization,
    })
}
