//! Four-option multiple-choice evaluation: item files, option shuffling,
//! zero- and few-shot prompts, answer extraction and scoring runs.

mod provider;
mod run;

pub use provider::{
    FixedProvider, GoldOracle, HttpProvider, Provider, ProviderConfig, ProviderError, ProviderKind,
    RandomProvider,
};
pub use run::{run_eval, BenchResult, RunError, RunMetadata, RunOptions, SubsetResult};

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const LETTERS: [char; 4] = ['A', 'B', 'C', 'D'];

pub const PREAMBLE: &str = "Read the following questions from the four options (A, B, C and D) given in each question. Choose the best option.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    Knowledge,
    Reasoning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Zh,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct McqItem {
    pub id: String,
    pub subset: Subset,
    pub stem: String,
    pub options: Vec<String>,
    pub answer_index: usize,
    pub language: Language,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("item {item}: field {field}: {detail}")]
pub struct SchemaError {
    /// Item id, or `#<position>` when the id itself is unusable.
    pub item: String,
    pub field: &'static str,
    pub detail: String,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: not valid JSON: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Schema {
        path: String,
        #[source]
        source: SchemaError,
    },
}

fn schema(item: &str, field: &'static str, detail: impl Into<String>) -> SchemaError {
    SchemaError {
        item: item.to_string(),
        field,
        detail: detail.into(),
    }
}

fn field<'a>(
    obj: &'a serde_json::Map<String, Value>,
    item: &str,
    name: &'static str,
) -> Result<&'a Value, SchemaError> {
    obj.get(name).ok_or_else(|| schema(item, name, "missing"))
}

fn str_field(
    obj: &serde_json::Map<String, Value>,
    item: &str,
    name: &'static str,
) -> Result<String, SchemaError> {
    field(obj, item, name)?
        .as_str()
        .map(String::from)
        .ok_or_else(|| schema(item, name, "expected a string"))
}

fn enum_field<T: serde::de::DeserializeOwned>(
    obj: &serde_json::Map<String, Value>,
    item: &str,
    name: &'static str,
    allowed: &str,
) -> Result<T, SchemaError> {
    serde_json::from_value(field(obj, item, name)?.clone())
        .map_err(|_| schema(item, name, format!("expected one of {allowed}")))
}

/// Validates one item object.
pub fn parse_item(value: &Value, position: usize) -> Result<McqItem, SchemaError> {
    let anon = format!("#{position}");
    let obj = value
        .as_object()
        .ok_or_else(|| schema(&anon, "item", "expected an object"))?;
    let id = str_field(obj, &anon, "id")?;
    if id.trim().is_empty() {
        return Err(schema(&anon, "id", "empty"));
    }
    let subset = enum_field(obj, &id, "subset", "knowledge, reasoning")?;
    let language = enum_field(obj, &id, "language", "en, zh")?;
    let stem = str_field(obj, &id, "stem")?;
    let options: Vec<String> = field(obj, &id, "options")?
        .as_array()
        .ok_or_else(|| schema(&id, "options", "expected an array"))?
        .iter()
        .map(|o| {
            o.as_str()
                .map(String::from)
                .ok_or_else(|| schema(&id, "options", "options must be strings"))
        })
        .collect::<Result<_, _>>()?;
    if options.len() != 4 {
        return Err(schema(
            &id,
            "options",
            format!("expected 4 options, found {}", options.len()),
        ));
    }
    let unique: HashSet<&String> = options.iter().collect();
    if unique.len() != 4 {
        return Err(schema(&id, "options", "options must be distinct"));
    }
    let answer_index = field(obj, &id, "answer_index")?
        .as_u64()
        .ok_or_else(|| schema(&id, "answer_index", "expected a non-negative integer"))?;
    if answer_index > 3 {
        return Err(schema(
            &id,
            "answer_index",
            format!("{answer_index} is not in 0..=3"),
        ));
    }
    Ok(McqItem {
        id,
        subset,
        stem,
        options,
        answer_index: answer_index as usize,
        language,
    })
}

/// Validates a JSON array of items; ids must be unique.
pub fn parse_bench(text: &str) -> Result<Vec<McqItem>, Result<SchemaError, serde_json::Error>> {
    let value: Value = serde_json::from_str(text).map_err(Err)?;
    let array = value
        .as_array()
        .ok_or_else(|| Ok(schema("file", "items", "expected a JSON array of items")))?;
    let mut seen = HashSet::new();
    let mut items = Vec::with_capacity(array.len());
    for (i, v) in array.iter().enumerate() {
        let item = parse_item(v, i).map_err(Ok)?;
        if !seen.insert(item.id.clone()) {
            return Err(Ok(schema(&item.id, "id", "duplicate id")));
        }
        items.push(item);
    }
    Ok(items)
}

pub fn load_bench(path: &Path) -> Result<Vec<McqItem>, BenchError> {
    let p = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io {
        path: p.clone(),
        source,
    })?;
    parse_bench(&text).map_err(|e| match e {
        Ok(source) => BenchError::Schema { path: p, source },
        Err(source) => BenchError::Json { path: p, source },
    })
}

/// Loads held-out exemplars; none may share an id with a scored item.
pub fn load_exemplars(path: &Path, scored: &[McqItem]) -> Result<Vec<McqItem>, BenchError> {
    let exemplars = load_bench(path)?;
    let ids: HashSet<&str> = scored.iter().map(|i| i.id.as_str()).collect();
    if let Some(clash) = exemplars.iter().find(|e| ids.contains(e.id.as_str())) {
        return Err(BenchError::Schema {
            path: path.display().to_string(),
            source: schema(&clash.id, "id", "exemplar is also a scored item"),
        });
    }
    Ok(exemplars)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptMode {
    ZeroShot,
    /// Exemplars with their answers precede the question.
    FewShot,
}

impl PromptMode {
    pub fn name(self) -> &'static str {
        match self {
            PromptMode::ZeroShot => "zero_shot",
            PromptMode::FewShot => "few_shot",
        }
    }
}

impl fmt::Display for PromptMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PromptMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero_shot" | "zero-shot" => Ok(PromptMode::ZeroShot),
            "few_shot" | "few-shot" | "five_shot" | "five-shot" => Ok(PromptMode::FewShot),
            _ => Err(format!(
                "unknown mode {s:?} (expected zero_shot or five_shot)"
            )),
        }
    }
}

/// Optional text around the prompt, for role-play or step-by-step variants.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptStyle {
    /// Placed before the instruction line, followed by a newline.
    #[serde(default)]
    pub prefix: Option<String>,
    /// Appended verbatim after the final `Answer:`.
    #[serde(default)]
    pub suffix: Option<String>,
}

/// `perm[k]` is the original index of the option shown under letter `k`.
pub type Permutation = [usize; 4];

pub const IDENTITY: Permutation = [0, 1, 2, 3];

/// Letter under which the gold option appears.
pub fn gold_letter(item: &McqItem, perm: &Permutation) -> char {
    let pos = perm
        .iter()
        .position(|&i| i == item.answer_index)
        .expect("permutation covers every option");
    LETTERS[pos]
}

/// Stem and lettered options, one option per line.
pub fn format_question(item: &McqItem, perm: &Permutation) -> String {
    let mut out = String::new();
    out.push_str(&item.stem);
    out.push('\n');
    for (letter, &idx) in LETTERS.iter().zip(perm) {
        out.push_str(&format!("{letter}. {}\n", item.options[idx]));
    }
    out
}

pub fn format_prompt(
    item: &McqItem,
    perm: &Permutation,
    mode: PromptMode,
    exemplars: &[McqItem],
    style: &PromptStyle,
) -> String {
    let mut out = String::new();
    if let Some(prefix) = &style.prefix {
        out.push_str(prefix);
        out.push('\n');
    }
    out.push_str(PREAMBLE);
    out.push('\n');
    if mode == PromptMode::FewShot {
        for ex in exemplars {
            out.push_str(&format_question(ex, &IDENTITY));
            out.push_str(&format!("Answer: {}\n\n", gold_letter(ex, &IDENTITY)));
        }
    }
    out.push_str(&format_question(item, perm));
    out.push_str("Answer:");
    if let Some(suffix) = &style.suffix {
        out.push_str(suffix);
    }
    out
}

/// First of `A`–`D` standing alone, i.e. not touching another letter or
/// digit on either side.
pub fn extract_choice(response: &str) -> Option<char> {
    let chars: Vec<char> = response.chars().collect();
    (0..chars.len()).find_map(|i| {
        let c = chars[i];
        let alone = LETTERS.contains(&c)
            && (i == 0 || !chars[i - 1].is_alphanumeric())
            && chars.get(i + 1).is_none_or(|n| !n.is_alphanumeric());
        alone.then_some(c)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShuffleProtocol {
    pub n_shuffles: usize,
    pub seed: u64,
}

impl Default for ShuffleProtocol {
    fn default() -> Self {
        ShuffleProtocol {
            n_shuffles: 5,
            seed: 0,
        }
    }
}

impl ShuffleProtocol {
    /// Every permutation, indexed `[round][item]`, drawn up front from one
    /// seeded stream.
    pub fn permutations(&self, n_items: usize) -> Vec<Vec<Permutation>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.n_shuffles)
            .map(|_| {
                (0..n_items)
                    .map(|_| {
                        let mut p = IDENTITY;
                        p.shuffle(&mut rng);
                        p
                    })
                    .collect()
            })
            .collect()
    }
}
