//! Instruction-tuning samples built from a corpus of ABC tunes: eight tasks,
//! six generation (G) and two understanding (U), each rendered as a
//! user/assistant exchange.

mod templates;

pub use templates::{required_placeholders, Placeholder, Template, TemplateBank, TemplateError};

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abc::{parse_tune, serialize, split_sections, TuneDocument};
use crate::analysis::{
    alphabetic_form, extract_chords, extract_motif, melody_tokens, render_terms, strip_chords,
    terminology_forms,
};
use crate::control_code::{compute_control_code, parse_control_code, ControlCode};
use crate::jsonl::{read_jsonl, JsonlError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TaskKind {
    ChordConditioned,
    FormConditioned,
    AlphaFormMotifConditioned,
    TermFormMotifConditioned,
    MelodyHarmonization,
    BachStyle,
    MotifExtraction,
    FormExtraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskType {
    Generation,
    Understanding,
}

impl TaskKind {
    pub const ALL: [TaskKind; 8] = [
        TaskKind::ChordConditioned,
        TaskKind::FormConditioned,
        TaskKind::AlphaFormMotifConditioned,
        TaskKind::TermFormMotifConditioned,
        TaskKind::MelodyHarmonization,
        TaskKind::BachStyle,
        TaskKind::MotifExtraction,
        TaskKind::FormExtraction,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            TaskKind::ChordConditioned => "chord",
            TaskKind::FormConditioned => "form",
            TaskKind::AlphaFormMotifConditioned => "alpha_form_motif",
            TaskKind::TermFormMotifConditioned => "term_form_motif",
            TaskKind::MelodyHarmonization => "melody",
            TaskKind::BachStyle => "bach",
            TaskKind::MotifExtraction => "motif",
            TaskKind::FormExtraction => "form_extraction",
        }
    }

    pub fn task_type(self) -> TaskType {
        match self {
            TaskKind::MotifExtraction | TaskKind::FormExtraction => TaskType::Understanding,
            _ => TaskType::Generation,
        }
    }

    pub fn is_generation(self) -> bool {
        self.task_type() == TaskType::Generation
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown task {0:?}")]
pub struct UnknownTask(pub String);

impl FromStr for TaskKind {
    type Err = UnknownTask;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskKind::ALL
            .into_iter()
            .find(|t| t.slug() == s)
            .ok_or_else(|| UnknownTask(s.to_string()))
    }
}

impl Serialize for TaskKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.slug())
    }
}

impl<'de> Deserialize<'de> for TaskKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a comma-separated list of task slugs; `all` selects every task.
pub fn parse_task_list(text: &str) -> Result<Vec<TaskKind>, UnknownTask> {
    if text.trim() == "all" {
        return Ok(TaskKind::ALL.to_vec());
    }
    let mut tasks = text
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<Vec<TaskKind>, _>>()?;
    tasks.sort();
    tasks.dedup();
    Ok(tasks)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionSample {
    pub task: TaskKind,
    pub source_id: String,
    pub template_id: String,
    pub messages: Vec<Message>,
}

impl InstructionSample {
    pub fn user(&self) -> &str {
        &self.messages[0].content
    }

    pub fn assistant(&self) -> &str {
        &self.messages[1].content
    }
}

/// One line of the input corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    pub abc: String,
    #[serde(default)]
    pub control_code: Option<String>,
    #[serde(default)]
    pub style: Option<String>,
}

impl CorpusEntry {
    /// The tune text with surrounding whitespace removed; this is what
    /// samples quote and what gets analysed.
    pub fn score(&self) -> &str {
        self.abc.trim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    UnparseableAbc,
    BadControlCode,
    NoChords,
    NoMotif,
    NoMelody,
    NotBach,
}

impl SkipReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SkipReason::UnparseableAbc => "unparseable_abc",
            SkipReason::BadControlCode => "bad_control_code",
            SkipReason::NoChords => "no_chords",
            SkipReason::NoMotif => "no_motif",
            SkipReason::NoMelody => "no_melody",
            SkipReason::NotBach => "not_bach",
        }
    }
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{task}: signal unavailable ({reason}): {detail}")]
pub struct SignalUnavailable {
    pub task: TaskKind,
    pub reason: SkipReason,
    pub detail: String,
}

/// Conditioning signals of one tune, computed lazily per task.
struct Analysis<'a> {
    entry: &'a CorpusEntry,
    doc: TuneDocument,
}

impl Analysis<'_> {
    fn control_code(&self, task: TaskKind) -> Result<ControlCode, SignalUnavailable> {
        let unavailable = |detail: String| SignalUnavailable {
            task,
            reason: SkipReason::BadControlCode,
            detail,
        };
        match &self.entry.control_code {
            Some(text) => parse_control_code(text).map_err(|e| unavailable(e.to_string())),
            None => compute_control_code(&self.doc).map_err(|e| unavailable(e.to_string())),
        }
    }

    fn alphabetic(&self, task: TaskKind) -> Result<String, SignalUnavailable> {
        let code = self.control_code(task)?;
        alphabetic_form(&code)
            .map(|f| f.to_string())
            .map_err(|e| SignalUnavailable {
                task,
                reason: SkipReason::BadControlCode,
                detail: e.to_string(),
            })
    }

    fn terms(&self, task: TaskKind) -> Result<String, SignalUnavailable> {
        let code = self.control_code(task)?;
        let form = alphabetic_form(&code).map_err(|e| SignalUnavailable {
            task,
            reason: SkipReason::BadControlCode,
            detail: e.to_string(),
        })?;
        Ok(render_terms(&terminology_forms(&form)))
    }

    fn chords(&self, task: TaskKind) -> Result<Vec<String>, SignalUnavailable> {
        let chords = extract_chords(&self.doc);
        if chords.is_empty() {
            return Err(SignalUnavailable {
                task,
                reason: SkipReason::NoChords,
                detail: "tune has no chord symbols".into(),
            });
        }
        Ok(chords)
    }

    /// Motif of each section, in order.
    fn motifs(&self, task: TaskKind) -> Result<Vec<String>, SignalUnavailable> {
        split_sections(&self.doc.body)
            .iter()
            .enumerate()
            .map(|(i, section)| {
                extract_motif(section)
                    .map(|m| m.to_abc())
                    .map_err(|_| SignalUnavailable {
                        task,
                        reason: SkipReason::NoMotif,
                        detail: format!("section {} has no notes", i + 1),
                    })
            })
            .collect()
    }

    fn score(&self) -> String {
        self.entry.score().to_string()
    }
}

fn choose(templates: &[Template], rng_seed: u64) -> &Template {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    &templates[rng.gen_range(0..templates.len())]
}

/// Builds one sample. The template is drawn uniformly with a generator
/// seeded by `rng_seed`.
pub fn build_sample(
    entry: &CorpusEntry,
    task: TaskKind,
    bank: &TemplateBank,
    rng_seed: u64,
) -> Result<InstructionSample, SignalUnavailable> {
    let doc = parse_tune(entry.score()).map_err(|e| SignalUnavailable {
        task,
        reason: SkipReason::UnparseableAbc,
        detail: e.to_string(),
    })?;
    build_from_doc(entry, doc, task, bank, rng_seed)
}

fn build_from_doc(
    entry: &CorpusEntry,
    doc: TuneDocument,
    task: TaskKind,
    bank: &TemplateBank,
    rng_seed: u64,
) -> Result<InstructionSample, SignalUnavailable> {
    let a = Analysis { entry, doc };
    let template = choose(bank.templates(task), rng_seed);
    let needs = |p: Placeholder| template.placeholders().contains(&p);

    let mut values: BTreeMap<Placeholder, String> = BTreeMap::new();
    let answer = match task {
        TaskKind::ChordConditioned => {
            values.insert(Placeholder::Chords, a.chords(task)?.join(" "));
            a.score()
        }
        TaskKind::FormConditioned => {
            if needs(Placeholder::MusicalFormA) {
                values.insert(Placeholder::MusicalFormA, a.alphabetic(task)?);
            } else {
                values.insert(Placeholder::MusicalFormT, a.terms(task)?);
            }
            a.score()
        }
        TaskKind::AlphaFormMotifConditioned | TaskKind::TermFormMotifConditioned => {
            if task == TaskKind::AlphaFormMotifConditioned {
                values.insert(Placeholder::MusicalFormA, a.alphabetic(task)?);
            } else {
                values.insert(Placeholder::MusicalFormT, a.terms(task)?);
            }
            let first = a.motifs(task)?.swap_remove(0);
            values.insert(Placeholder::Motif, first);
            a.score()
        }
        TaskKind::MelodyHarmonization => {
            a.chords(task)?;
            if melody_tokens(&a.doc).is_empty() {
                return Err(SignalUnavailable {
                    task,
                    reason: SkipReason::NoMelody,
                    detail: "tune has no notes".into(),
                });
            }
            values.insert(Placeholder::Melody, serialize(&strip_chords(&a.doc)));
            a.score()
        }
        TaskKind::BachStyle => {
            let is_bach = entry
                .style
                .as_deref()
                .is_some_and(|s| s.trim().eq_ignore_ascii_case("bach"));
            if !is_bach {
                return Err(SignalUnavailable {
                    task,
                    reason: SkipReason::NotBach,
                    detail: "entry is not flagged style=bach".into(),
                });
            }
            a.score()
        }
        TaskKind::MotifExtraction => {
            values.insert(Placeholder::Music, a.score());
            a.motifs(task)?
                .iter()
                .enumerate()
                .map(|(i, m)| format!("Section {}: {m}", i + 1))
                .collect::<Vec<_>>()
                .join("\n")
        }
        TaskKind::FormExtraction => {
            values.insert(Placeholder::Music, a.score());
            a.terms(task)?
        }
    };

    let user = template.fill(|p| values.get(&p).cloned().unwrap_or_default());
    Ok(InstructionSample {
        task,
        source_id: entry.id.clone(),
        template_id: template.id.clone(),
        messages: vec![
            Message {
                role: Role::User,
                content: user,
            },
            Message {
                role: Role::Assistant,
                content: answer,
            },
        ],
    })
}

/// Per-sample seed from the corpus seed, the record's position and the task.
pub fn sample_seed(seed: u64, record: usize, task: TaskKind) -> u64 {
    let mut z = seed
        ^ (record as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (task as u64 + 1).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error(transparent)]
    Input(#[from] JsonlError),
    #[error("{path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct GenerationSummary {
    pub records: usize,
    pub attempted: usize,
    pub written: usize,
    pub skipped: BTreeMap<String, usize>,
    pub written_per_task: BTreeMap<String, usize>,
}

/// Reads corpus JSONL; blank lines are ignored, malformed lines are all
/// reported together.
pub fn read_corpus(path: &Path) -> Result<Vec<CorpusEntry>, DatasetError> {
    Ok(read_jsonl(path)?)
}

/// Builds every (record, task) sample. Results keep input order, records
/// first, then tasks in the order given.
pub fn build_samples(
    entries: &[CorpusEntry],
    tasks: &[TaskKind],
    bank: &TemplateBank,
    seed: u64,
) -> Vec<Result<InstructionSample, SignalUnavailable>> {
    entries
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, entry)| {
            let doc = parse_tune(entry.score());
            tasks.iter().map(move |&task| match &doc {
                Ok(doc) => {
                    build_from_doc(entry, doc.clone(), task, bank, sample_seed(seed, i, task))
                }
                Err(e) => Err(SignalUnavailable {
                    task,
                    reason: SkipReason::UnparseableAbc,
                    detail: e.to_string(),
                }),
            })
        })
        .collect()
}

pub fn generate_corpus(
    input: &Path,
    tasks: &[TaskKind],
    bank: &TemplateBank,
    seed: u64,
    output: &Path,
) -> Result<GenerationSummary, DatasetError> {
    let entries = read_corpus(input)?;
    let results = build_samples(&entries, tasks, bank, seed);

    let io_err = |source| DatasetError::Output {
        path: output.display().to_string(),
        source,
    };
    let mut out = BufWriter::new(std::fs::File::create(output).map_err(io_err)?);
    let mut summary = GenerationSummary {
        records: entries.len(),
        attempted: results.len(),
        ..Default::default()
    };
    for result in results {
        match result {
            Ok(sample) => {
                let line = serde_json::to_string(&sample).expect("sample serializes");
                writeln!(out, "{line}").map_err(io_err)?;
                summary.written += 1;
                *summary
                    .written_per_task
                    .entry(sample.task.to_string())
                    .or_default() += 1;
            }
            Err(skip) => {
                log::debug!("skipping {skip}");
                *summary.skipped.entry(skip.reason.to_string()).or_default() += 1;
            }
        }
    }
    out.flush().map_err(io_err)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(abc: &str) -> CorpusEntry {
        CorpusEntry {
            id: "t1".into(),
            abc: abc.into(),
            control_code: None,
            style: None,
        }
    }

    const TWO_PART: &str = "X:1\nL:1/8\nM:4/4\nK:F\n|: \"F\" FAcA \"C7\" GBGE | \"F\" FAcA \"C7\" GBGE :|\n|: \"Bb\" dfdB \"F\" cAcA | \"C7\" GBGE \"F\" F4 :|\n";

    #[test]
    fn task_counts_and_slugs() {
        let g = TaskKind::ALL.iter().filter(|t| t.is_generation()).count();
        assert_eq!((g, TaskKind::ALL.len() - g), (6, 2));
        for t in TaskKind::ALL {
            assert_eq!(t.slug().parse::<TaskKind>().unwrap(), t);
        }
        assert_eq!(
            parse_task_list("melody,chord").unwrap(),
            vec![TaskKind::ChordConditioned, TaskKind::MelodyHarmonization]
        );
        assert!(parse_task_list("chord,lyrics").is_err());
    }

    #[test]
    fn chord_sample() {
        let bank = TemplateBank::default_bank();
        let s = build_sample(&entry(TWO_PART), TaskKind::ChordConditioned, &bank, 3).unwrap();
        assert!(s.user().ends_with("\nF C7 F C7 Bb F C7 F"));
        assert_eq!(s.assistant(), TWO_PART.trim());
        assert_eq!(s.messages[0].role, Role::User);
        assert!(s.template_id.starts_with("chord-"));
    }

    #[test]
    fn missing_signals() {
        let bank = TemplateBank::default_bank();
        let plain = entry("X:1\nK:C\nabc|");
        let err = build_sample(&plain, TaskKind::ChordConditioned, &bank, 0).unwrap_err();
        assert_eq!(err.reason, SkipReason::NoChords);
        let err = build_sample(&plain, TaskKind::BachStyle, &bank, 0).unwrap_err();
        assert_eq!(err.reason, SkipReason::NotBach);
        let err = build_sample(&entry("K:C\nabc"), TaskKind::FormExtraction, &bank, 0).unwrap_err();
        assert_eq!(err.reason, SkipReason::UnparseableAbc);
        let mut bad = entry(TWO_PART);
        bad.control_code = Some("S:2 B:4".into());
        let err = build_sample(&bad, TaskKind::FormConditioned, &bank, 0).unwrap_err();
        assert_eq!(err.reason, SkipReason::BadControlCode);
    }

    #[test]
    fn understanding_answers() {
        let bank = TemplateBank::default_bank();
        let e = entry(TWO_PART);
        let s = build_sample(&e, TaskKind::MotifExtraction, &bank, 1).unwrap();
        assert!(s.user().ends_with(TWO_PART.trim()));
        assert_eq!(s.assistant().lines().count(), 2);
        assert!(s.assistant().starts_with("Section 1: "));
        let s = build_sample(&e, TaskKind::FormExtraction, &bank, 1).unwrap();
        assert_eq!(s.assistant(), "Binary");
    }

    #[test]
    fn melody_is_stripped_score() {
        let bank = TemplateBank::default_bank();
        let s = build_sample(&entry(TWO_PART), TaskKind::MelodyHarmonization, &bank, 5).unwrap();
        let doc = parse_tune(s.assistant()).unwrap();
        assert!(s.user().ends_with(&serialize(&strip_chords(&doc))));
        assert!(!s.user().contains('"'));
    }

    #[test]
    fn template_choice_depends_on_seed() {
        let bank = TemplateBank::default_bank();
        let e = entry(TWO_PART);
        let ids: std::collections::BTreeSet<String> = (0..64)
            .map(|seed| {
                build_sample(&e, TaskKind::ChordConditioned, &bank, seed)
                    .unwrap()
                    .template_id
            })
            .collect();
        assert_eq!(ids.len(), 3);
        let again = build_sample(&e, TaskKind::ChordConditioned, &bank, 7).unwrap();
        assert_eq!(
            again,
            build_sample(&e, TaskKind::ChordConditioned, &bank, 7).unwrap()
        );
    }
}
