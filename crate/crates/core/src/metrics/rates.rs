use serde::Serialize;

use super::{Fraction, MetricError};
use crate::abc::{parse_tune, render_tokens, ParseError};
use crate::seqmetrics::lcs_length;

/// Share of texts whose body has at least one `|:`, `:|` or `::`.
/// Unparseable texts count as having none; an empty list gives 0.
pub fn repetition_rate<S: AsRef<str>>(texts: &[S]) -> Fraction {
    let with_repeats = texts
        .iter()
        .filter(|t| parse_tune(t.as_ref()).is_ok_and(|doc| doc.has_repeat_sign()))
        .count();
    Fraction::of(with_repeats, texts.len())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseFailure {
    pub index: usize,
    pub error: ParseError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseRate {
    pub rate: Fraction,
    pub total: usize,
    pub failures: Vec<ParseFailure>,
}

pub fn parse_success_rate<S: AsRef<str>>(texts: &[S]) -> ParseRate {
    let failures: Vec<ParseFailure> = texts
        .iter()
        .enumerate()
        .filter_map(|(index, t)| {
            parse_tune(t.as_ref())
                .err()
                .map(|error| ParseFailure { index, error })
        })
        .collect();
    ParseRate {
        rate: Fraction::of(texts.len() - failures.len(), texts.len()),
        total: texts.len(),
        failures,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MemorizationReport {
    pub n: usize,
    pub exact: usize,
    pub overlap80: usize,
    pub exact_fraction: Fraction,
    pub overlap80_fraction: Fraction,
}

/// Whether `lcs / max(len) >= 0.8`, in integers.
pub fn overlaps80<T: PartialEq>(generated: &[T], reference: &[T]) -> bool {
    let longest = generated.len().max(reference.len());
    5 * lcs_length(generated, reference) >= 4 * longest
}

pub fn memorization_report<T: PartialEq>(
    pairs: &[(Vec<T>, Vec<T>)],
) -> Result<MemorizationReport, MetricError> {
    if pairs.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    let exact = pairs.iter().filter(|(g, r)| g == r).count();
    let overlap80 = pairs.iter().filter(|(g, r)| overlaps80(g, r)).count();
    Ok(MemorizationReport {
        n: pairs.len(),
        exact,
        overlap80,
        exact_fraction: Fraction::of(exact, pairs.len()),
        overlap80_fraction: Fraction::of(overlap80, pairs.len()),
    })
}

/// Token sequence used for memorization checks: the non-layout body tokens
/// of a parseable tune, otherwise the whitespace-separated words.
pub fn memorization_tokens(text: &str) -> Vec<String> {
    match parse_tune(text) {
        Ok(doc) => doc
            .body
            .iter()
            .filter(|t| !t.is_layout())
            .map(|t| render_tokens(std::slice::from_ref(t)))
            .collect(),
        Err(_) => text.split_whitespace().map(String::from).collect(),
    }
}
