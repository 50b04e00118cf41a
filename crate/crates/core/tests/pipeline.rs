use std::path::Path;

use abcscore::analysis::{extract_motifs_per_section, parse_terms, strip_chords};
use abcscore::dataset::{read_corpus, CorpusEntry};
use abcscore::metrics::PromptSignals;
use abcscore::{
    alphabetic_form, build_sample, compute_control_code, extract_chords, initial_score, parse_tune,
    serialize, terminology_forms, Fraction, GenerationRecord, TaskKind, TemplateBank,
};

fn corpus() -> Vec<CorpusEntry> {
    read_corpus(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus50.jsonl"))
        .unwrap()
}

/// Signals recomputed straight from the score.
fn signals(abc: &str) -> PromptSignals {
    let doc = parse_tune(abc).unwrap();
    let form = alphabetic_form(&compute_control_code(&doc).unwrap()).unwrap();
    PromptSignals {
        chords: Some(extract_chords(&doc)),
        form_alpha: Some(form.to_string()),
        form_terms: Some(
            terminology_forms(&form)
                .iter()
                .map(|t| t.identifier().to_string())
                .collect(),
        ),
        motif: Some(extract_motifs_per_section(&doc).unwrap()[0].to_abc()),
        melody: Some(serialize(&strip_chords(&doc))),
    }
}

#[test]
fn references_score_perfectly_against_their_own_signals() {
    let tasks = [
        TaskKind::ChordConditioned,
        TaskKind::FormConditioned,
        TaskKind::AlphaFormMotifConditioned,
        TaskKind::TermFormMotifConditioned,
        TaskKind::MelodyHarmonization,
    ];
    let mut scored = 0;
    for entry in corpus() {
        let sig = signals(entry.score());
        for task in tasks {
            let needs_chords = matches!(
                task,
                TaskKind::ChordConditioned | TaskKind::MelodyHarmonization
            );
            if needs_chords && sig.chords.as_ref().is_some_and(Vec::is_empty) {
                continue;
            }
            let rec = GenerationRecord {
                system: "reference".into(),
                task,
                prompt_signals: sig.clone(),
                generated: entry.score().to_string(),
                reference: None,
            };
            let s = initial_score(&rec).unwrap();
            assert!(s.parsed);
            assert_eq!(s.score, Fraction::one(), "{} {task}", entry.id);
            scored += 1;
        }
    }
    assert!(scored > 150);
}

#[test]
fn samples_quote_the_score_and_its_signals() {
    let bank = TemplateBank::default_bank();
    for entry in corpus().iter().take(10) {
        let sig = signals(entry.score());
        let s = build_sample(entry, TaskKind::FormExtraction, &bank, 5).unwrap();
        assert!(s.user().contains(entry.score()));
        let doc = parse_tune(entry.score()).unwrap();
        let form = alphabetic_form(&compute_control_code(&doc).unwrap()).unwrap();
        assert_eq!(
            parse_terms(s.assistant()).unwrap(),
            terminology_forms(&form),
            "{}",
            entry.id
        );
        let m = build_sample(entry, TaskKind::AlphaFormMotifConditioned, &bank, 5).unwrap();
        assert_eq!(m.assistant(), entry.score());
        assert!(m.user().contains(sig.form_alpha.as_deref().unwrap()));
        assert!(m.user().contains(sig.motif.as_deref().unwrap()));
    }
}
