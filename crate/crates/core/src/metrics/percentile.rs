use std::collections::BTreeMap;

use serde::Serialize;

use super::{has_initial_score, initial_score, Fraction, GenerationRecord, MetricError};
use crate::dataset::TaskKind;

/// Percentile of every pool member: the share of the other members whose
/// value is strictly smaller. A pool of one gets 0.
pub fn percentiles<T: PartialOrd>(pool: &[T]) -> Vec<Fraction> {
    let others = pool.len().saturating_sub(1);
    pool.iter()
        .map(|x| Fraction::of(pool.iter().filter(|y| *y < x).count(), others))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskPercentiles {
    pub n: usize,
    /// Records of this task across all systems.
    pub pool_size: usize,
    pub unparseable: usize,
    pub initial_scores: Vec<Fraction>,
    pub percentiles: Vec<Fraction>,
    pub average_percentile: Fraction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PercentileReport {
    /// system → task → scores, in record order.
    pub systems: BTreeMap<String, BTreeMap<TaskKind, TaskPercentiles>>,
    /// Records of tasks without an initial score.
    pub unsupported: usize,
}

impl PercentileReport {
    pub fn average(&self, system: &str, task: TaskKind) -> Option<Fraction> {
        self.systems
            .get(system)?
            .get(&task)
            .map(|t| t.average_percentile)
    }
}

/// Pools initial scores per task across all systems and averages each
/// system's percentiles.
pub fn percentile_report(records: &[GenerationRecord]) -> Result<PercentileReport, MetricError> {
    let mut scored: Vec<(usize, super::InitialScore)> = Vec::new();
    let mut unsupported = 0;
    for (index, rec) in records.iter().enumerate() {
        if !has_initial_score(rec.task) {
            unsupported += 1;
            continue;
        }
        let score = initial_score(rec).map_err(|e| MetricError::Record {
            index,
            source: Box::new(e),
        })?;
        scored.push((index, score));
    }
    if scored.is_empty() {
        return Err(MetricError::EmptyPool);
    }

    let mut pools: BTreeMap<TaskKind, Vec<(usize, super::InitialScore)>> = BTreeMap::new();
    for (index, score) in scored {
        pools
            .entry(records[index].task)
            .or_default()
            .push((index, score));
    }

    let mut systems: BTreeMap<String, BTreeMap<TaskKind, TaskPercentiles>> = BTreeMap::new();
    for (task, pool) in pools {
        let values: Vec<Fraction> = pool.iter().map(|(_, s)| s.score).collect();
        let ranks = percentiles(&values);
        for ((index, score), pct) in pool.iter().zip(ranks) {
            let entry = systems
                .entry(records[*index].system.clone())
                .or_default()
                .entry(task)
                .or_insert_with(|| TaskPercentiles {
                    n: 0,
                    pool_size: pool.len(),
                    unparseable: 0,
                    initial_scores: Vec::new(),
                    percentiles: Vec::new(),
                    average_percentile: Fraction::zero(),
                });
            entry.n += 1;
            entry.unparseable += usize::from(!score.parsed);
            entry.initial_scores.push(score.score);
            entry.percentiles.push(pct);
        }
    }
    for tasks in systems.values_mut() {
        for t in tasks.values_mut() {
            t.average_percentile = Fraction::mean(&t.percentiles);
        }
    }
    Ok(PercentileReport {
        systems,
        unsupported,
    })
}
