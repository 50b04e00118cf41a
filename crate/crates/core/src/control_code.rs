//! Section-structure control codes: `S:<sections>` followed by one `B:<bars>`
//! per section, where the n-th `B:` is preceded by n-1 `E:<0..10>` fields
//! giving its similarity to each earlier section.
//!
//! Example: `S:2 B:5 E:5 B:6` is two sections of 5 and 6 bars with
//! similarity 5 (0.5). A trailing `S:` repeating the count is accepted and
//! dropped.

use std::fmt;

use serde::Serialize;

use crate::abc::{count_bars, render_tokens, split_sections, BodyToken, TuneDocument};
use crate::seqmetrics::edit_distance;

pub const MAX_SIMILARITY: u8 = 10;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ControlCode {
    pub num_sections: usize,
    pub bars: Vec<u32>,
    /// `sims[k][m]` compares section `m` with section `k + 1` (both 0-based).
    pub sims: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MalformedReason {
    MissingS,
    WrongECount,
    BadValue,
    ValueOutOfRange,
    SectionCountMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed control code ({reason:?}): {detail}")]
pub struct MalformedControlCode {
    pub reason: MalformedReason,
    pub detail: String,
}

fn malformed(reason: MalformedReason, detail: impl Into<String>) -> MalformedControlCode {
    MalformedControlCode {
        reason,
        detail: detail.into(),
    }
}

impl ControlCode {
    pub fn new(bars: Vec<u32>, sims: Vec<Vec<u8>>) -> Result<Self, MalformedControlCode> {
        let code = ControlCode {
            num_sections: bars.len(),
            bars,
            sims,
        };
        code.validate()?;
        Ok(code)
    }

    pub fn validate(&self) -> Result<(), MalformedControlCode> {
        if self.num_sections == 0 {
            return Err(malformed(
                MalformedReason::ValueOutOfRange,
                "S must be at least 1",
            ));
        }
        if self.bars.len() != self.num_sections || self.sims.len() != self.num_sections - 1 {
            return Err(malformed(
                MalformedReason::SectionCountMismatch,
                format!("S:{} with {} B fields", self.num_sections, self.bars.len()),
            ));
        }
        if self.bars.contains(&0) {
            return Err(malformed(
                MalformedReason::ValueOutOfRange,
                "B must be at least 1",
            ));
        }
        for (k, row) in self.sims.iter().enumerate() {
            if row.len() != k + 1 {
                return Err(malformed(
                    MalformedReason::WrongECount,
                    format!(
                        "section {} needs {} E fields, has {}",
                        k + 2,
                        k + 1,
                        row.len()
                    ),
                ));
            }
            if row.iter().any(|&e| e > MAX_SIMILARITY) {
                return Err(malformed(
                    MalformedReason::ValueOutOfRange,
                    "E must be in 0..=10",
                ));
            }
        }
        Ok(())
    }

    /// Similarities of section `section` (0-based, ≥ 1) to every earlier one.
    pub fn similarities_of(&self, section: usize) -> &[u8] {
        &self.sims[section - 1]
    }
}

fn value(field: &str, text: &str) -> Result<u32, MalformedControlCode> {
    text.parse::<u32>().map_err(|_| {
        malformed(
            MalformedReason::BadValue,
            format!("{field}:{text} is not a number"),
        )
    })
}

/// Parses a whitespace-separated control code string.
pub fn parse_control_code(text: &str) -> Result<ControlCode, MalformedControlCode> {
    let fields: Vec<(&str, u32)> = text
        .split_whitespace()
        .map(|f| {
            let (key, val) = f.split_once(':').ok_or_else(|| {
                malformed(MalformedReason::BadValue, format!("{f:?} is not KEY:VALUE"))
            })?;
            match key {
                "S" | "B" | "E" => Ok((key, value(key, val)?)),
                _ => Err(malformed(
                    MalformedReason::BadValue,
                    format!("unknown field {key:?}"),
                )),
            }
        })
        .collect::<Result<_, _>>()?;

    let Some((&("S", declared), rest)) = fields.split_first() else {
        return Err(malformed(
            MalformedReason::MissingS,
            "control code must start with S:",
        ));
    };
    if declared == 0 {
        return Err(malformed(
            MalformedReason::ValueOutOfRange,
            "S must be at least 1",
        ));
    }

    let mut bars = Vec::new();
    let mut sims: Vec<Vec<u8>> = Vec::new();
    let mut pending: Vec<u8> = Vec::new();
    let mut trailing_s = None;
    for (i, &(key, val)) in rest.iter().enumerate() {
        match key {
            "E" => {
                if val > u32::from(MAX_SIMILARITY) {
                    return Err(malformed(
                        MalformedReason::ValueOutOfRange,
                        format!("E:{val}"),
                    ));
                }
                pending.push(val as u8);
            }
            "B" => {
                if val == 0 {
                    return Err(malformed(MalformedReason::ValueOutOfRange, "B:0"));
                }
                if pending.len() != bars.len() {
                    return Err(malformed(
                        MalformedReason::WrongECount,
                        format!(
                            "B field {} expects {} E fields, found {}",
                            bars.len() + 1,
                            bars.len(),
                            pending.len()
                        ),
                    ));
                }
                if !bars.is_empty() {
                    sims.push(std::mem::take(&mut pending));
                }
                bars.push(val);
            }
            _ => {
                if i + 1 != rest.len() {
                    return Err(malformed(
                        MalformedReason::BadValue,
                        "S: may only appear first or last",
                    ));
                }
                trailing_s = Some(val);
            }
        }
    }
    if !pending.is_empty() {
        return Err(malformed(
            MalformedReason::WrongECount,
            "E fields after the last B",
        ));
    }
    if bars.len() != declared as usize || trailing_s.is_some_and(|s| s != declared) {
        return Err(malformed(
            MalformedReason::SectionCountMismatch,
            format!("S:{declared} but {} sections", bars.len()),
        ));
    }
    ControlCode::new(bars, sims)
}

/// Canonical text form, without a trailing `S:`.
pub fn serialize_control_code(code: &ControlCode) -> String {
    code.to_string()
}

impl fmt::Display for ControlCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S:{}", self.num_sections)?;
        for (i, bars) in self.bars.iter().enumerate() {
            if i > 0 {
                for e in &self.sims[i - 1] {
                    write!(f, " E:{e}")?;
                }
            }
            write!(f, " B:{bars}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ComputeError {
    #[error("section {index} has no music")]
    EmptySection { index: usize },
}

/// `round(10 * (1 - dist / maxlen))`, half rounded up, in exact integers.
pub fn similarity_score<T: PartialEq>(a: &[T], b: &[T]) -> Option<u8> {
    let max_len = a.len().max(b.len());
    if max_len == 0 {
        return None;
    }
    let dist = edit_distance(a, b);
    let score = (20 * (max_len - dist) + max_len) / (2 * max_len);
    Some(score.min(usize::from(MAX_SIMILARITY)) as u8)
}

/// Token strings compared when scoring section similarity: chord symbols
/// and layout dropped.
pub fn similarity_tokens(section: &[BodyToken]) -> Vec<String> {
    section
        .iter()
        .filter(|t| !t.is_layout() && !matches!(t, BodyToken::ChordSymbol { .. }))
        .map(|t| render_tokens(std::slice::from_ref(t)))
        .collect()
}

/// Derives a control code from a parsed tune for corpora that ship without one.
pub fn compute_control_code(doc: &TuneDocument) -> Result<ControlCode, ComputeError> {
    let sections = split_sections(&doc.body);
    let mut bars = Vec::with_capacity(sections.len());
    let mut tokens = Vec::with_capacity(sections.len());
    for (index, section) in sections.iter().enumerate() {
        let count = count_bars(section);
        if count == 0 {
            return Err(ComputeError::EmptySection { index });
        }
        bars.push(count as u32);
        tokens.push(similarity_tokens(section));
    }
    let sims = (1..tokens.len())
        .map(|n| {
            (0..n)
                .map(|m| similarity_score(&tokens[m], &tokens[n]).unwrap_or(MAX_SIMILARITY))
                .collect()
        })
        .collect();
    Ok(ControlCode {
        num_sections: bars.len(),
        bars,
        sims,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abc::parse_tune;

    #[test]
    fn four_section_example() {
        let code = parse_control_code("S:4 B:1 E:1 B:8 E:3 E:7 B:1 E:1 E:4 E:1 B:8").unwrap();
        assert_eq!(code.num_sections, 4);
        assert_eq!(code.bars, vec![1, 8, 1, 8]);
        assert_eq!(code.sims, vec![vec![1], vec![3, 7], vec![1, 4, 1]]);
        assert_eq!(
            serialize_control_code(&code),
            "S:4 B:1 E:1 B:8 E:3 E:7 B:1 E:1 E:4 E:1 B:8"
        );
    }

    #[test]
    fn single_section() {
        let code = parse_control_code("S:1 B:8").unwrap();
        assert_eq!(
            (code.num_sections, code.bars.clone(), code.sims.len()),
            (1, vec![8], 0)
        );
        assert_eq!(code.to_string(), "S:1 B:8");
    }

    #[test]
    fn trailing_s_is_dropped() {
        let code = parse_control_code("S:2 B:5 E:5 B:6 S:2").unwrap();
        assert_eq!(code.sims, vec![vec![5]]);
        assert_eq!(code.to_string(), "S:2 B:5 E:5 B:6");
    }

    #[test]
    fn malformed_reasons() {
        let reason = |t: &str| parse_control_code(t).unwrap_err().reason;
        assert_eq!(reason("B:5 E:5 B:6"), MalformedReason::MissingS);
        assert_eq!(reason(""), MalformedReason::MissingS);
        assert_eq!(reason("S:2 B:5 B:6"), MalformedReason::WrongECount);
        assert_eq!(reason("S:2 B:5 E:1 E:2 B:6"), MalformedReason::WrongECount);
        assert_eq!(reason("S:2 B:five E:5 B:6"), MalformedReason::BadValue);
        assert_eq!(reason("S:2 B:5 X:5 B:6"), MalformedReason::BadValue);
        assert_eq!(reason("S:2 B:5 E:11 B:6"), MalformedReason::ValueOutOfRange);
        assert_eq!(reason("S:2 B:0 E:1 B:6"), MalformedReason::ValueOutOfRange);
        assert_eq!(
            reason("S:3 B:5 E:5 B:6"),
            MalformedReason::SectionCountMismatch
        );
        assert_eq!(
            reason("S:2 B:5 E:5 B:6 S:3"),
            MalformedReason::SectionCountMismatch
        );
    }

    #[test]
    fn similarity_rounding() {
        assert_eq!(similarity_score(b"abcd", b"abcd"), Some(10));
        assert_eq!(similarity_score(b"abcd", b"wxyz"), Some(0));
        assert_eq!(similarity_score(b"abcd", b"abcf"), Some(8));
        // 1 - 1/4 = 0.75 -> 7.5 rounds up; 1 - 3/4 -> 2.5 -> 3
        assert_eq!(similarity_score(b"abcd", b"xyzd"), Some(3));
        assert_eq!(similarity_score::<u8>(b"", b""), None);
    }

    #[test]
    fn identical_sections() {
        let doc = parse_tune("X:1\nK:C\n|: abc d :| |: abc d :|").unwrap();
        let code = compute_control_code(&doc).unwrap();
        assert_eq!(code.bars, vec![1, 1]);
        assert_eq!(code.sims, vec![vec![10]]);
    }

    #[test]
    fn chords_do_not_affect_similarity() {
        let doc = parse_tune("X:1\nK:C\n|: \"C\"abc d :| |: \"G7\"abc d :|").unwrap();
        assert_eq!(compute_control_code(&doc).unwrap().sims, vec![vec![10]]);
    }
}
