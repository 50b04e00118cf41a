//! Tools for treating ABC music notation as a text language: parsing and
//! analysis of scores, synthesis of instruction-tuning datasets, and the
//! metrics used to evaluate symbolic music generation and multiple-choice
//! music theory benchmarks.

pub mod abc;
pub mod analysis;
pub mod control_code;
pub mod dataset;
pub mod jsonl;
pub mod mcq;
pub mod metrics;
pub mod seqmetrics;
pub mod stats;
pub mod tokenize;

pub use abc::{parse_tune, serialize, BodyToken, ParseError, ParseErrorKind, TuneDocument};
pub use analysis::{
    alphabetic_form, extract_chords, extract_motif, terminology_forms, AlphabeticForm, FormTerm,
    Motif,
};
pub use control_code::{compute_control_code, parse_control_code, ControlCode};
pub use dataset::{build_sample, generate_corpus, InstructionSample, TaskKind, TemplateBank};
pub use mcq::{
    extract_choice, format_prompt, load_bench, run_eval, BenchResult, McqItem, ShuffleProtocol,
};
pub use metrics::{initial_score, percentile_report, Fraction, GenerationRecord};
pub use seqmetrics::{edit_distance, lcs_length};
