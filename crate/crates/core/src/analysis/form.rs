//! Musical form from control codes: similarity levels, alphabetic form
//! (`ABB'C`) and terminology labels.
//!
//! Terminology is assigned from the base-letter sequence with consecutive
//! repeats collapsed (`AABB` reads as `AB`):
//!
//! | form                                      | label                      |
//! |-------------------------------------------|----------------------------|
//! | one section                               | Only One Section           |
//! | ≥ 2 sections, one base letter             | Variational                |
//! | `AB`                                      | Binary                     |
//! | `ABA`                                     | Ternary                    |
//! | `AABA` (uncollapsed)                      | American Popular           |
//! | `ABAB…`, length ≥ 4                       | Verse/Chorus               |
//! | `ABCB`                                    | Verse/Chorus/Bridge        |
//! | `ABABCB`                                  | Verse/Chorus/Verse/Bridge  |
//! | all letters distinct, length ≥ 3          | Through Composed           |
//! | even length, both halves Binary           | Compound Binary            |
//! | even length, both halves Ternary          | Compound Ternary           |
//!
//! Several labels may apply. Through Composed is also the fallback when no
//! rule matches.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::control_code::{ControlCode, MAX_SIMILARITY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SimilarityLevel {
    Different,
    Variation,
    Identical,
}

impl SimilarityLevel {
    pub fn symbol(self) -> char {
        match self {
            SimilarityLevel::Identical => 's',
            SimilarityLevel::Variation => 'v',
            SimilarityLevel::Different => 'd',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormError {
    #[error("similarity {0} outside 0..=10")]
    SimilarityOutOfRange(u32),
    #[error("more than 26 distinct sections")]
    TooManyDistinctSections,
    #[error("invalid alphabetic form {0:?}")]
    InvalidForm(String),
}

/// `e ≥ 8` identical, `6 ≤ e < 8` variation, below 6 different.
pub fn classify_similarity(e: u32) -> Result<SimilarityLevel, FormError> {
    match e {
        8..=10 => Ok(SimilarityLevel::Identical),
        6 | 7 => Ok(SimilarityLevel::Variation),
        0..=5 => Ok(SimilarityLevel::Different),
        _ => Err(FormError::SimilarityOutOfRange(e)),
    }
}

/// One level list per section after the first.
pub fn similarity_levels(code: &ControlCode) -> Vec<Vec<SimilarityLevel>> {
    code.sims
        .iter()
        .map(|row| {
            row.iter()
                .map(|&e| {
                    classify_similarity(u32::from(e.min(MAX_SIMILARITY)))
                        .unwrap_or(SimilarityLevel::Different)
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FormLetter {
    pub letter: char,
    pub primes: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlphabeticForm {
    pub letters: Vec<FormLetter>,
}

impl AlphabeticForm {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn base_letters(&self) -> Vec<char> {
        self.letters.iter().map(|l| l.letter).collect()
    }
}

impl fmt::Display for AlphabeticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.letter)?;
            for _ in 0..l.primes {
                f.write_str("'")?;
            }
        }
        Ok(())
    }
}

impl FromStr for AlphabeticForm {
    type Err = FormError;

    /// Parses and checks the lettering invariants: starts with `A`, new
    /// letters appear in alphabetical order, primes only on known letters.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = || FormError::InvalidForm(s.to_string());
        let mut letters: Vec<FormLetter> = Vec::new();
        let mut next = 'A';
        for c in s.trim().chars() {
            match c {
                '\'' => letters.last_mut().ok_or_else(invalid)?.primes += 1,
                'A'..='Z' => {
                    if c == next {
                        next = char::from(next as u8 + 1);
                    } else if c > next {
                        return Err(invalid());
                    }
                    letters.push(FormLetter {
                        letter: c,
                        primes: 0,
                    });
                }
                _ => return Err(invalid()),
            }
        }
        if letters.is_empty() {
            return Err(invalid());
        }
        for (i, l) in letters.iter().enumerate() {
            if l.primes > 0 && !letters[..i].iter().any(|p| p.letter == l.letter) {
                return Err(invalid());
            }
        }
        Ok(AlphabeticForm { letters })
    }
}

impl Serialize for AlphabeticForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Letters each section by its strongest match to an earlier section.
///
/// For every section after the first: copy the label of the first identical
/// earlier section; failing that, take the label of the first variation and
/// add a prime; failing that, introduce the next unused letter. Identical
/// matches win over variations regardless of position.
pub fn alphabetic_form(code: &ControlCode) -> Result<AlphabeticForm, FormError> {
    let mut letters = vec![FormLetter {
        letter: 'A',
        primes: 0,
    }];
    let mut next = b'B';
    for levels in similarity_levels(code) {
        let first = |level| levels.iter().position(|&l| l == level);
        let label = if let Some(i) = first(SimilarityLevel::Identical) {
            letters[i]
        } else if let Some(i) = first(SimilarityLevel::Variation) {
            FormLetter {
                primes: letters[i].primes + 1,
                ..letters[i]
            }
        } else {
            if next > b'Z' {
                return Err(FormError::TooManyDistinctSections);
            }
            let fresh = FormLetter {
                letter: char::from(next),
                primes: 0,
            };
            next += 1;
            fresh
        };
        letters.push(label);
    }
    Ok(AlphabeticForm { letters })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FormTerm {
    OnlyOneSection,
    Binary,
    Ternary,
    Variational,
    AmericanPopular,
    VerseChorus,
    VerseChorusBridge,
    VerseChorusVerseBridge,
    ThroughComposed,
    CompoundBinary,
    CompoundTernary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormCategory {
    Traditional,
    Extended,
    Compound,
}

impl FormTerm {
    pub const ALL: [FormTerm; 11] = [
        FormTerm::OnlyOneSection,
        FormTerm::Binary,
        FormTerm::Ternary,
        FormTerm::Variational,
        FormTerm::AmericanPopular,
        FormTerm::VerseChorus,
        FormTerm::VerseChorusBridge,
        FormTerm::VerseChorusVerseBridge,
        FormTerm::ThroughComposed,
        FormTerm::CompoundBinary,
        FormTerm::CompoundTernary,
    ];

    pub fn category(self) -> FormCategory {
        use FormTerm::*;
        match self {
            OnlyOneSection | Binary | Ternary | Variational => FormCategory::Traditional,
            AmericanPopular
            | VerseChorus
            | VerseChorusBridge
            | VerseChorusVerseBridge
            | ThroughComposed => FormCategory::Extended,
            CompoundBinary | CompoundTernary => FormCategory::Compound,
        }
    }

    /// Name as a musician would write it.
    pub fn display_name(self) -> &'static str {
        use FormTerm::*;
        match self {
            OnlyOneSection => "Only One Section",
            Binary => "Binary",
            Ternary => "Ternary",
            Variational => "Variational",
            AmericanPopular => "American Popular",
            VerseChorus => "Verse/Chorus",
            VerseChorusBridge => "Verse/Chorus/Bridge",
            VerseChorusVerseBridge => "Verse/Chorus/Verse/Bridge",
            ThroughComposed => "Through Composed",
            CompoundBinary => "Compound Binary",
            CompoundTernary => "Compound Ternary",
        }
    }

    pub fn identifier(self) -> &'static str {
        use FormTerm::*;
        match self {
            OnlyOneSection => "OnlyOneSection",
            Binary => "Binary",
            Ternary => "Ternary",
            Variational => "Variational",
            AmericanPopular => "AmericanPopular",
            VerseChorus => "VerseChorus",
            VerseChorusBridge => "VerseChorusBridge",
            VerseChorusVerseBridge => "VerseChorusVerseBridge",
            ThroughComposed => "ThroughComposed",
            CompoundBinary => "CompoundBinary",
            CompoundTernary => "CompoundTernary",
        }
    }
}

impl FromStr for FormTerm {
    type Err = FormError;

    /// Accepts either the identifier (`VerseChorus`) or the display name
    /// (`Verse/Chorus`), case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        FormTerm::ALL
            .into_iter()
            .find(|t| {
                t.identifier().eq_ignore_ascii_case(s) || t.display_name().eq_ignore_ascii_case(s)
            })
            .ok_or_else(|| FormError::InvalidForm(s.to_string()))
    }
}

/// Renders terms with display names, comma separated, in enum order.
pub fn render_terms(terms: &BTreeSet<FormTerm>) -> String {
    terms
        .iter()
        .map(|t| t.display_name())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Parses a comma-separated term list produced by [`render_terms`].
pub fn parse_terms(text: &str) -> Result<BTreeSet<FormTerm>, FormError> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(FormTerm::from_str)
        .collect()
}

fn collapse(letters: &[char]) -> Vec<char> {
    let mut out: Vec<char> = letters.to_vec();
    out.dedup();
    out
}

/// Relabels letters in order of first appearance, so `CDC` reads as `ABA`.
fn normalize(letters: &[char]) -> Vec<char> {
    let mut seen: Vec<char> = Vec::new();
    letters
        .iter()
        .map(|c| {
            let idx = seen.iter().position(|s| s == c).unwrap_or_else(|| {
                seen.push(*c);
                seen.len() - 1
            });
            char::from(b'A' + (idx as u8).min(25))
        })
        .collect()
}

fn pattern(letters: &[char]) -> String {
    normalize(&collapse(letters)).into_iter().collect()
}

fn all_distinct(letters: &[char]) -> bool {
    letters
        .iter()
        .enumerate()
        .all(|(i, c)| !letters[..i].contains(c))
}

pub fn terminology_forms(form: &AlphabeticForm) -> BTreeSet<FormTerm> {
    let raw = form.base_letters();
    let collapsed = normalize(&collapse(&raw));
    let shape: String = collapsed.iter().collect();
    let mut terms = BTreeSet::new();

    if raw.len() == 1 {
        terms.insert(FormTerm::OnlyOneSection);
        return terms;
    }
    if collapsed.len() == 1 {
        terms.insert(FormTerm::Variational);
    }
    match shape.as_str() {
        "AB" => {
            terms.insert(FormTerm::Binary);
        }
        "ABA" => {
            terms.insert(FormTerm::Ternary);
        }
        "ABCB" => {
            terms.insert(FormTerm::VerseChorusBridge);
        }
        "ABABCB" => {
            terms.insert(FormTerm::VerseChorusVerseBridge);
        }
        _ => {}
    }
    if normalize(&raw).iter().collect::<String>() == "AABA" {
        terms.insert(FormTerm::AmericanPopular);
    }
    if collapsed.len() >= 4
        && collapsed
            .iter()
            .enumerate()
            .all(|(i, &c)| c == if i % 2 == 0 { 'A' } else { 'B' })
    {
        terms.insert(FormTerm::VerseChorus);
    }
    if collapsed.len() >= 3 && all_distinct(&collapsed) {
        terms.insert(FormTerm::ThroughComposed);
    }
    if collapsed.len() >= 4 && collapsed.len().is_multiple_of(2) {
        let (first, second) = collapsed.split_at(collapsed.len() / 2);
        match (pattern(first).as_str(), pattern(second).as_str()) {
            ("AB", "AB") => {
                terms.insert(FormTerm::CompoundBinary);
            }
            ("ABA", "ABA") => {
                terms.insert(FormTerm::CompoundTernary);
            }
            _ => {}
        }
    }
    if terms.is_empty() {
        terms.insert(FormTerm::ThroughComposed);
    }
    terms
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control_code::parse_control_code;

    fn terms(form: &str) -> BTreeSet<FormTerm> {
        terminology_forms(&form.parse().unwrap())
    }

    #[test]
    fn thresholds() {
        use SimilarityLevel::*;
        assert_eq!(classify_similarity(8), Ok(Identical));
        assert_eq!(classify_similarity(7), Ok(Variation));
        assert_eq!(classify_similarity(6), Ok(Variation));
        assert_eq!(classify_similarity(3), Ok(Different));
        assert_eq!(classify_similarity(10), Ok(Identical));
        assert_eq!(classify_similarity(0), Ok(Different));
        assert!(classify_similarity(11).is_err());
    }

    #[test]
    fn four_section_example() {
        let code = parse_control_code("S:4 B:1 E:1 B:8 E:3 E:7 B:1 E:1 E:4 E:1 B:8").unwrap();
        let symbols: Vec<String> = similarity_levels(&code)
            .iter()
            .map(|row| row.iter().map(|l| l.symbol()).collect())
            .collect();
        assert_eq!(symbols, vec!["d", "dv", "ddd"]);
        assert_eq!(alphabetic_form(&code).unwrap().to_string(), "ABB'C");
    }

    #[test]
    fn simple_forms() {
        let one = parse_control_code("S:1 B:8").unwrap();
        assert_eq!(alphabetic_form(&one).unwrap().to_string(), "A");
        let same = ControlCode::new(vec![4, 4, 4], vec![vec![9], vec![9, 9]]).unwrap();
        assert_eq!(alphabetic_form(&same).unwrap().to_string(), "AAA");
    }

    #[test]
    fn identical_beats_earlier_variation() {
        let code = ControlCode::new(vec![4, 4, 4], vec![vec![2], vec![7, 9]]).unwrap();
        assert_eq!(alphabetic_form(&code).unwrap().to_string(), "ABB");
    }

    #[test]
    fn variation_of_variation() {
        let code = ControlCode::new(vec![4, 4, 4], vec![vec![7], vec![2, 6]]).unwrap();
        assert_eq!(alphabetic_form(&code).unwrap().to_string(), "AA'A''");
    }

    #[test]
    fn form_parsing() {
        assert!("ABB'C".parse::<AlphabeticForm>().is_ok());
        assert!("BA".parse::<AlphabeticForm>().is_err());
        assert!("AC".parse::<AlphabeticForm>().is_err());
        assert!("AB'".parse::<AlphabeticForm>().is_err());
        assert!("'A".parse::<AlphabeticForm>().is_err());
        assert!("".parse::<AlphabeticForm>().is_err());
    }

    #[test]
    fn terminology_table() {
        use FormTerm::*;
        assert_eq!(terms("A"), BTreeSet::from([OnlyOneSection]));
        assert_eq!(terms("AB"), BTreeSet::from([Binary]));
        assert_eq!(terms("AABB"), BTreeSet::from([Binary]));
        assert_eq!(terms("ABA"), BTreeSet::from([Ternary]));
        assert_eq!(terms("AA'A''"), BTreeSet::from([Variational]));
        assert_eq!(terms("AAA"), BTreeSet::from([Variational]));
        assert!(terms("AABA").contains(&AmericanPopular));
        assert!(terms("ABAB").contains(&VerseChorus));
        assert!(terms("ABCB").contains(&VerseChorusBridge));
        assert!(terms("ABABCB").contains(&VerseChorusVerseBridge));
        assert!(terms("ABCD").contains(&ThroughComposed));
        assert!(terms("ABACDC").contains(&CompoundTernary));
        assert!(terms("ABB'C").contains(&ThroughComposed));
        // no rule matches: fallback
        assert_eq!(terms("ABCAB"), BTreeSet::from([ThroughComposed]));
    }

    #[test]
    fn categories() {
        let count = |c| FormTerm::ALL.iter().filter(|t| t.category() == c).count();
        assert_eq!(count(FormCategory::Traditional), 4);
        assert_eq!(count(FormCategory::Extended), 5);
        assert_eq!(count(FormCategory::Compound), 2);
    }

    #[test]
    fn term_names_round_trip() {
        for t in FormTerm::ALL {
            assert_eq!(t.display_name().parse::<FormTerm>(), Ok(t));
            assert_eq!(t.identifier().parse::<FormTerm>(), Ok(t));
        }
        let set = BTreeSet::from([FormTerm::Binary, FormTerm::VerseChorus]);
        assert_eq!(parse_terms(&render_terms(&set)), Ok(set));
    }
}
