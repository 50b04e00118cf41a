use std::collections::HashMap;

use serde::Serialize;

use crate::abc::{render_tokens, split_sections, BodyToken, TuneDocument};

/// Longest n-gram considered as a motif.
pub const MAX_MOTIF_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Motif {
    pub tokens: Vec<BodyToken>,
    pub frequency: usize,
}

impl Motif {
    /// ABC text of the motif, tokens concatenated.
    pub fn to_abc(&self) -> String {
        render_tokens(&self.tokens)
    }
}

impl Serialize for Motif {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Motif", 2)?;
        st.serialize_field("abc", &self.to_abc())?;
        st.serialize_field("frequency", &self.frequency)?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MotifError {
    #[error("section {section} has no notes after filtering")]
    EmptyAfterFilter { section: usize },
}

/// Keeps notes, rests, chords and tuplet markers; drops bars, chord
/// symbols, decorations, grace notes, slurs, ties and layout.
pub fn filter_for_motif(tokens: &[BodyToken]) -> Vec<BodyToken> {
    tokens
        .iter()
        .filter(|t| {
            matches!(
                t,
                BodyToken::Note(_)
                    | BodyToken::Rest { .. }
                    | BodyToken::MultiNote { .. }
                    | BodyToken::Tuplet { .. }
            )
        })
        .cloned()
        .collect()
}

/// Most frequent contiguous n-gram (n = 1..=8) of the filtered section.
/// Ties go to the longer n-gram, then to the one occurring first.
pub fn extract_motif(section: &[BodyToken]) -> Result<Motif, MotifError> {
    let filtered = filter_for_motif(section);
    if filtered.is_empty() {
        return Err(MotifError::EmptyAfterFilter { section: 0 });
    }
    // n-gram -> (count, first start)
    let mut counts: HashMap<&[BodyToken], (usize, usize)> = HashMap::new();
    for start in 0..filtered.len() {
        let longest = MAX_MOTIF_LEN.min(filtered.len() - start);
        for len in 1..=longest {
            counts
                .entry(&filtered[start..start + len])
                .or_insert((0, start))
                .0 += 1;
        }
    }
    let (tokens, (frequency, _)) = counts
        .into_iter()
        .max_by(|(a, (fa, pa)), (b, (fb, pb))| {
            fa.cmp(fb).then(a.len().cmp(&b.len())).then(pb.cmp(pa))
        })
        .expect("non-empty sequence has n-grams");
    Ok(Motif {
        tokens: tokens.to_vec(),
        frequency,
    })
}

pub fn extract_motifs_per_section(doc: &TuneDocument) -> Result<Vec<Motif>, MotifError> {
    split_sections(&doc.body)
        .iter()
        .enumerate()
        .map(|(i, section)| {
            extract_motif(section).map_err(|_| MotifError::EmptyAfterFilter { section: i })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abc::{parse_fragment, parse_tune};

    fn frag(text: &str) -> Vec<BodyToken> {
        parse_fragment(text).unwrap()
    }

    #[test]
    fn repeated_pair() {
        let m = extract_motif(&frag("abab cabab c")).unwrap();
        assert_eq!(m.to_abc(), "ab");
        assert_eq!(m.frequency, 4);
    }

    #[test]
    fn single_note() {
        let m = extract_motif(&frag("a")).unwrap();
        assert_eq!((m.to_abc().as_str(), m.frequency), ("a", 1));
    }

    #[test]
    fn all_distinct_takes_longest_prefix() {
        let m = extract_motif(&frag("abcd")).unwrap();
        assert_eq!((m.to_abc().as_str(), m.frequency), ("abcd", 1));
    }

    #[test]
    fn window_capped_at_eight() {
        let m = extract_motif(&frag("abcdefggg")).unwrap();
        // "abcdefggg": every 8-gram occurs once, "g" three times
        assert_eq!((m.to_abc().as_str(), m.frequency), ("g", 3));
        let m = extract_motif(&frag("CDEFGABcdefg")).unwrap();
        assert_eq!(m.tokens.len(), MAX_MOTIF_LEN);
        assert_eq!(m.to_abc(), "CDEFGABc");
    }

    #[test]
    fn durations_distinguish_tokens() {
        let m = extract_motif(&frag("a2 a a2 b a2")).unwrap();
        assert_eq!((m.to_abc().as_str(), m.frequency), ("a2", 3));
    }

    #[test]
    fn filtering() {
        assert!(filter_for_motif(&frag("| || |] :|")).is_empty());
        assert_eq!(filter_for_motif(&frag("a | b")), frag("ab"));
        assert_eq!(
            filter_for_motif(&frag("\"F\" !trill!a {g}b (c d) - e >f")),
            frag("abcdef")
        );
        assert_eq!(
            extract_motif(&frag("| \"C\" |")),
            Err(MotifError::EmptyAfterFilter { section: 0 })
        );
    }

    #[test]
    fn per_section() {
        let doc = parse_tune("X:1\nK:C\n|: abab :| |: cdcd :|").unwrap();
        let motifs = extract_motifs_per_section(&doc).unwrap();
        assert_eq!(motifs.len(), 2);
        assert_eq!(motifs[0].to_abc(), "ab");
        assert_eq!(motifs[1].to_abc(), "cd");
    }
}
