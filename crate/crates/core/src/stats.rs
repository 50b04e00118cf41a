//! Corpus-level token statistics: tokens per song and tokens per second.

use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::abc::{duration_info, parse_tune, split_tunebook};
use crate::tokenize::Tokenizer;

#[derive(Debug, Clone, Serialize)]
pub struct TuneFailure {
    pub file: PathBuf,
    pub line: usize,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusStats {
    pub songs: usize,
    pub total_tokens: u64,
    #[serde(serialize_with = "as_string")]
    pub total_seconds: BigRational,
    #[serde(serialize_with = "as_string")]
    pub tokens_per_song: BigRational,
    #[serde(serialize_with = "as_string")]
    pub tokens_per_second: BigRational,
    pub tokens_per_song_f64: f64,
    pub tokens_per_second_f64: f64,
    pub failures: Vec<TuneFailure>,
}

fn as_string<S: serde::Serializer>(value: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&value.to_string())
}

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("corpus has no parseable tunes")]
    EmptyCorpus,
}

/// Per-tune measurement: token count and performed seconds.
#[derive(Debug, Clone)]
pub struct TuneMeasure {
    pub tokens: u64,
    pub seconds: BigRational,
}

/// Measures one tune's text. Counts tokens over the whole tune text,
/// headers included.
pub fn measure_tune(text: &str, tokenizer: &Tokenizer) -> Result<TuneMeasure, String> {
    let doc = parse_tune(text).map_err(|e| e.to_string())?;
    let info = duration_info(&doc).map_err(|e| e.to_string())?;
    Ok(TuneMeasure {
        tokens: tokenizer.count(text) as u64,
        seconds: info.seconds,
    })
}

/// Aggregates measurements. Order-independent.
pub fn aggregate(
    measures: &[TuneMeasure],
    failures: Vec<TuneFailure>,
) -> Result<CorpusStats, StatsError> {
    if measures.is_empty() {
        return Err(StatsError::EmptyCorpus);
    }
    let total_tokens: u64 = measures.iter().map(|m| m.tokens).sum();
    let total_seconds = measures
        .iter()
        .fold(BigRational::zero(), |acc, m| acc + &m.seconds);
    let tokens = BigRational::from_integer(BigInt::from(total_tokens));
    let tokens_per_song = &tokens / BigRational::from_integer(BigInt::from(measures.len()));
    let tokens_per_second = &tokens / &total_seconds;
    Ok(CorpusStats {
        songs: measures.len(),
        total_tokens,
        tokens_per_song_f64: tokens_per_song.to_f64().unwrap_or(f64::NAN),
        tokens_per_second_f64: tokens_per_second.to_f64().unwrap_or(f64::NAN),
        total_seconds,
        tokens_per_song,
        tokens_per_second,
        failures,
    })
}

/// Reads every file as a tunebook and computes corpus statistics.
/// Tunes that fail to parse are reported and left out of the means.
pub fn corpus_stats(paths: &[PathBuf], tokenizer: &Tokenizer) -> Result<CorpusStats, StatsError> {
    let mut tunes: Vec<(PathBuf, usize, String)> = Vec::new();
    for path in paths {
        let text = read(path)?;
        for (line, tune) in split_tunebook(&text) {
            tunes.push((path.clone(), line, tune));
        }
    }
    let results: Vec<_> = tunes
        .par_iter()
        .map(|(path, line, text)| {
            measure_tune(text, tokenizer).map_err(|error| TuneFailure {
                file: path.clone(),
                line: *line,
                error,
            })
        })
        .collect();
    let mut measures = Vec::new();
    let mut failures = Vec::new();
    for result in results {
        match result {
            Ok(m) => measures.push(m),
            Err(f) => failures.push(f),
        }
    }
    aggregate(&measures, failures)
}

fn read(path: &Path) -> Result<String, StatsError> {
    fs::read_to_string(path).map_err(|source| StatsError::Io {
        path: path.to_path_buf(),
        source,
    })
}
