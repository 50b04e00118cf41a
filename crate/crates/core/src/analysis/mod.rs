//! Score analysis: musical form, motifs, chord progressions and melody.

mod form;
mod motif;

pub use form::{
    alphabetic_form, classify_similarity, parse_terms, render_terms, similarity_levels,
    terminology_forms, AlphabeticForm, FormCategory, FormError, FormLetter, FormTerm,
    SimilarityLevel,
};
pub use motif::{
    extract_motif, extract_motifs_per_section, filter_for_motif, Motif, MotifError, MAX_MOTIF_LEN,
};

use crate::abc::{BodyToken, TuneDocument};

/// Quoted strings starting with one of these are placement annotations, not chords.
const ANNOTATION_PREFIXES: [char; 5] = ['^', '_', '<', '>', '@'];

pub fn is_annotation(text: &str) -> bool {
    text.starts_with(ANNOTATION_PREFIXES)
}

/// Chord symbols in body order, duplicates kept, annotations skipped.
pub fn extract_chords(doc: &TuneDocument) -> Vec<String> {
    chords_in(&doc.body)
}

pub fn chords_in(tokens: &[BodyToken]) -> Vec<String> {
    tokens
        .iter()
        .filter_map(|t| match t {
            BodyToken::ChordSymbol { text } if !is_annotation(text) => Some(text.clone()),
            _ => None,
        })
        .collect()
}

/// Removes every quoted chord symbol; the rest of the document is untouched.
pub fn strip_chords(doc: &TuneDocument) -> TuneDocument {
    TuneDocument {
        headers: doc.headers.clone(),
        body: doc
            .body
            .iter()
            .filter(|t| !matches!(t, BodyToken::ChordSymbol { .. }))
            .cloned()
            .collect(),
        source: doc.source.clone(),
    }
}

/// Melody as a token sequence: notes, rests, chords and tuplet markers.
pub fn melody_tokens(doc: &TuneDocument) -> Vec<BodyToken> {
    filter_for_motif(&doc.body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abc::{parse_tune, serialize};

    #[test]
    fn chords_in_order() {
        let doc = parse_tune("X:1\nK:F\n\"F\" BA \"C7\" GG \"^fine\" |").unwrap();
        assert_eq!(extract_chords(&doc), vec!["F", "C7"]);
        let plain = parse_tune("X:1\nK:C\nabc|").unwrap();
        assert!(extract_chords(&plain).is_empty());
        assert_eq!(strip_chords(&plain), plain);
    }

    #[test]
    fn strip_fragment() {
        let doc = parse_tune("X:1\nK:F\n\"F\" BA\"C7\" GG").unwrap();
        let stripped = strip_chords(&doc);
        assert!(serialize(&stripped).ends_with("\n BA GG"));
        assert_eq!(strip_chords(&stripped), stripped);
        assert_eq!(parse_tune(&serialize(&stripped)).unwrap(), stripped);
    }
}
