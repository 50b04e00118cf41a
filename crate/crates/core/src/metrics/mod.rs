//! Evaluation of generated scores: per-task initial scores, pooled
//! percentiles, repetition and parse rates, and memorization.
//!
//! Initial scores are similarities in `[0, 1]`, higher is better:
//!
//! - chord: `1 - edit(gen chords, prompt chords) / max(len)`
//! - form: 1 when the alphabetic forms match exactly, otherwise the Jaccard
//!   similarity of the terminology label sets
//! - form + motif: unweighted mean of the form score and
//!   `lcs(gen motif, prompt motif) / len(prompt motif)`, taking the best
//!   motif over the generated sections
//! - melody: `1 - edit(gen melody, prompt melody) / max(len)` over note tokens
//!
//! A generation that does not parse scores 0.

mod fraction;
mod percentile;
mod rates;
mod report;

pub use fraction::Fraction;
pub use percentile::{percentile_report, percentiles, PercentileReport, TaskPercentiles};
pub use rates::{
    memorization_report, memorization_tokens, overlaps80, parse_success_rate, repetition_rate,
    MemorizationReport, ParseFailure, ParseRate,
};
pub use report::{evaluate, read_records, EvalReport, RecordsError, TaskSummary};

use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer, Serialize};

use crate::abc::{parse_fragment, parse_tune, split_sections, BodyToken, TuneDocument};
use crate::analysis::{
    alphabetic_form, extract_chords, extract_motif, filter_for_motif, melody_tokens, parse_terms,
    terminology_forms, AlphabeticForm, FormTerm,
};
use crate::control_code::compute_control_code;
use crate::dataset::TaskKind;
use crate::seqmetrics::{edit_distance, lcs_length};

/// Conditioning given to the model. Chord and term lists may be written as
/// JSON arrays or as a single string (chords space separated, terms comma
/// separated).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSignals {
    #[serde(
        default,
        deserialize_with = "space_list",
        skip_serializing_if = "Option::is_none"
    )]
    pub chords: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form_alpha: Option<String>,
    #[serde(
        default,
        deserialize_with = "comma_list",
        skip_serializing_if = "Option::is_none"
    )]
    pub form_terms: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motif: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub melody: Option<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ListOrText {
    List(Vec<String>),
    Text(String),
}

fn space_list<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<String>>, D::Error> {
    Ok(Option::<ListOrText>::deserialize(d)?.map(|v| match v {
        ListOrText::List(l) => l,
        ListOrText::Text(t) => t.split_whitespace().map(String::from).collect(),
    }))
}

fn comma_list<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<String>>, D::Error> {
    Ok(Option::<ListOrText>::deserialize(d)?.map(|v| match v {
        ListOrText::List(l) => l,
        ListOrText::Text(t) => t
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect(),
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub system: String,
    pub task: TaskKind,
    #[serde(default)]
    pub prompt_signals: PromptSignals,
    pub generated: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("task {task} has no initial score")]
    TaskUnsupported { task: TaskKind },
    #[error("task {task} needs prompt signal {signal}")]
    MissingSignal {
        task: TaskKind,
        signal: &'static str,
    },
    #[error("task {task}: prompt signal {signal} is invalid: {detail}")]
    BadSignal {
        task: TaskKind,
        signal: &'static str,
        detail: String,
    },
    #[error("no scorable records")]
    EmptyPool,
    #[error("record {index}: {source}")]
    Record {
        index: usize,
        source: Box<MetricError>,
    },
    #[error("empty input")]
    EmptyInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InitialScore {
    pub score: Fraction,
    /// False when the generation failed to parse (score is then 0).
    pub parsed: bool,
}

pub fn has_initial_score(task: TaskKind) -> bool {
    matches!(
        task,
        TaskKind::ChordConditioned
            | TaskKind::FormConditioned
            | TaskKind::AlphaFormMotifConditioned
            | TaskKind::TermFormMotifConditioned
            | TaskKind::MelodyHarmonization
    )
}

/// `1 - dist / max(len)`; two empty sequences are identical.
pub fn edit_similarity<T: PartialEq>(a: &[T], b: &[T]) -> Fraction {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return Fraction::one();
    }
    Fraction::of(longest - edit_distance(a, b), longest)
}

pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> Fraction {
    let union = a.union(b).count();
    if union == 0 {
        return Fraction::one();
    }
    Fraction::of(a.intersection(b).count(), union)
}

fn require<'a, T>(
    task: TaskKind,
    signal: &'static str,
    value: &'a Option<T>,
) -> Result<&'a T, MetricError> {
    value
        .as_ref()
        .ok_or(MetricError::MissingSignal { task, signal })
}

fn bad(task: TaskKind, signal: &'static str, detail: impl ToString) -> MetricError {
    MetricError::BadSignal {
        task,
        signal,
        detail: detail.to_string(),
    }
}

/// Form targets taken from the prompt.
struct FormTarget {
    alpha: Option<AlphabeticForm>,
    terms: BTreeSet<FormTerm>,
}

fn form_target(task: TaskKind, signals: &PromptSignals) -> Result<FormTarget, MetricError> {
    let alpha = match (&signals.form_alpha, task) {
        (Some(text), _) => Some(
            text.trim()
                .parse::<AlphabeticForm>()
                .map_err(|e| bad(task, "form_alpha", e))?,
        ),
        (None, TaskKind::AlphaFormMotifConditioned) => {
            return Err(MetricError::MissingSignal {
                task,
                signal: "form_alpha",
            })
        }
        (None, _) => None,
    };
    let terms = match (&signals.form_terms, &alpha, task) {
        (Some(list), _, _) => {
            parse_terms(&list.join(",")).map_err(|e| bad(task, "form_terms", e))?
        }
        (None, _, TaskKind::TermFormMotifConditioned) | (None, None, _) => {
            return Err(MetricError::MissingSignal {
                task,
                signal: "form_terms",
            })
        }
        (None, Some(alpha), _) => terminology_forms(alpha),
    };
    if terms.is_empty() {
        return Err(bad(task, "form_terms", "empty term list"));
    }
    Ok(FormTarget { alpha, terms })
}

fn form_similarity(doc: &TuneDocument, target: &FormTarget) -> Fraction {
    let Ok(code) = compute_control_code(doc) else {
        return Fraction::zero();
    };
    let Ok(generated) = alphabetic_form(&code) else {
        return Fraction::zero();
    };
    if target.alpha.as_ref() == Some(&generated) {
        return Fraction::one();
    }
    jaccard(&terminology_forms(&generated), &target.terms)
}

fn prompt_motif(task: TaskKind, signals: &PromptSignals) -> Result<Vec<BodyToken>, MetricError> {
    let text = require(task, "motif", &signals.motif)?;
    let tokens = filter_for_motif(&parse_fragment(text).map_err(|e| bad(task, "motif", e))?);
    if tokens.is_empty() {
        return Err(bad(task, "motif", "no notes"));
    }
    Ok(tokens)
}

/// Best `lcs / len(prompt motif)` over the generated sections' motifs.
fn motif_similarity(doc: &TuneDocument, prompt: &[BodyToken]) -> Fraction {
    split_sections(&doc.body)
        .iter()
        .filter_map(|s| extract_motif(s).ok())
        .map(|m| Fraction::of(lcs_length(&m.tokens, prompt), prompt.len()))
        .max()
        .unwrap_or_else(Fraction::zero)
}

/// Melody tokens of the prompt: a full tune, or a bare body fragment.
fn prompt_melody(task: TaskKind, signals: &PromptSignals) -> Result<Vec<BodyToken>, MetricError> {
    let text = require(task, "melody", &signals.melody)?;
    match parse_tune(text) {
        Ok(doc) => Ok(melody_tokens(&doc)),
        Err(_) => parse_fragment(text)
            .map(|t| filter_for_motif(&t))
            .map_err(|e| bad(task, "melody", e)),
    }
}

/// Checks the record's signals, then scores the generation.
pub fn initial_score(rec: &GenerationRecord) -> Result<InitialScore, MetricError> {
    let task = rec.task;
    let signals = &rec.prompt_signals;
    // Validate prompt signals before looking at the generation so that a
    // malformed record is reported even when the generation is unparseable.
    enum Prepared {
        Chords(Vec<String>),
        Form(FormTarget),
        FormMotif(FormTarget, Vec<BodyToken>),
        Melody(Vec<BodyToken>),
    }
    let prepared = match task {
        TaskKind::ChordConditioned => {
            let chords = require(task, "chords", &signals.chords)?;
            if chords.is_empty() {
                return Err(bad(task, "chords", "empty chord list"));
            }
            Prepared::Chords(chords.clone())
        }
        TaskKind::FormConditioned => Prepared::Form(form_target(task, signals)?),
        TaskKind::AlphaFormMotifConditioned | TaskKind::TermFormMotifConditioned => {
            Prepared::FormMotif(form_target(task, signals)?, prompt_motif(task, signals)?)
        }
        TaskKind::MelodyHarmonization => Prepared::Melody(prompt_melody(task, signals)?),
        _ => return Err(MetricError::TaskUnsupported { task }),
    };

    let Ok(doc) = parse_tune(&rec.generated) else {
        return Ok(InitialScore {
            score: Fraction::zero(),
            parsed: false,
        });
    };
    let score = match prepared {
        Prepared::Chords(prompt) => edit_similarity(&extract_chords(&doc), &prompt),
        Prepared::Form(target) => form_similarity(&doc, &target),
        Prepared::FormMotif(target, motif) => Fraction::mean(&[
            form_similarity(&doc, &target),
            motif_similarity(&doc, &motif),
        ]),
        Prepared::Melody(prompt) => edit_similarity(&melody_tokens(&doc), &prompt),
    };
    Ok(InitialScore {
        score,
        parsed: true,
    })
}
