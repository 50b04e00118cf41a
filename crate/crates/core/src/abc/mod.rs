//! ABC notation: a strict parser for the tune subset found in folk-tune
//! corpora, a canonical serializer, section splitting and duration
//! arithmetic.

mod duration;
mod parser;
mod sections;
mod serialize;

pub use duration::{duration_info, DurationError, DurationInfo};
pub use parser::{parse_fragment, parse_tune, split_tunebook};
pub use sections::{count_bars, split_sections, Section};
pub use serialize::{render_tokens, serialize};

use std::fmt;

use serde::Serialize;

/// Exact rational used for note lengths, expressed in units of the default
/// note length (`L:`).
pub type Rational = num_rational::Ratio<i64>;

/// Largest numerator or denominator accepted in a note length.
pub const MAX_DURATION_TERM: i64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Accidental {
    None,
    Sharp,
    DoubleSharp,
    Flat,
    DoubleFlat,
    Natural,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Note {
    /// Letter as written, `A`–`G` or `a`–`g`.
    pub pitch: char,
    pub accidental: Accidental,
    /// Count of `'` minus count of `,`.
    pub octave_shift: i32,
    pub duration: Rational,
}

impl Note {
    pub fn new(pitch: char, duration: Rational) -> Self {
        Note {
            pitch,
            accidental: Accidental::None,
            octave_shift: 0,
            duration,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BarlineKind {
    /// `|`
    Single,
    /// `||`
    Double,
    /// `|]`
    Final,
    /// `|:`
    RepeatStart,
    /// `:|`
    RepeatEnd,
    /// `::` (also accepted as `:|:` and `:||:`)
    RepeatBoth,
}

impl BarlineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BarlineKind::Single => "|",
            BarlineKind::Double => "||",
            BarlineKind::Final => "|]",
            BarlineKind::RepeatStart => "|:",
            BarlineKind::RepeatEnd => ":|",
            BarlineKind::RepeatBoth => "::",
        }
    }

    pub fn is_repeat(self) -> bool {
        matches!(
            self,
            BarlineKind::RepeatStart | BarlineKind::RepeatEnd | BarlineKind::RepeatBoth
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BrokenDirection {
    /// `<`: first note shortened.
    Left,
    /// `>`: first note lengthened.
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BodyToken {
    Note(Note),
    Rest {
        duration: Rational,
    },
    /// Square-bracket chord, e.g. `[ceg]2`. The trailing length multiplies
    /// each inner note.
    MultiNote {
        notes: Vec<Note>,
        duration: Rational,
    },
    /// Double-quoted chord symbol or annotation, text without the quotes.
    ChordSymbol {
        text: String,
    },
    Barline(BarlineKind),
    /// Ending bracket. `bracketed` records the `[1` spelling.
    Volta {
        number: u32,
        bracketed: bool,
    },
    /// `(3` and friends.
    Tuplet {
        n: u32,
    },
    SlurOpen,
    SlurClose,
    /// `{...}`; `acciaccatura` records a leading slash as in `{/g}`.
    GraceGroup {
        acciaccatura: bool,
        inner: Vec<BodyToken>,
    },
    /// `!trill!` is stored as `trill`; single-symbol ornaments like `~` as is.
    Decoration {
        text: String,
        delimited: bool,
    },
    BrokenRhythm {
        direction: BrokenDirection,
        count: u8,
    },
    Tie,
    /// `[K:G]` inline, or a whole `K:G` line inside the body (`bracketed = false`).
    InlineField {
        field: char,
        value: String,
        bracketed: bool,
    },
    LineBreak,
    Comment {
        text: String,
    },
    /// A run of spaces or tabs.
    Space,
}

impl BodyToken {
    pub fn is_timed(&self) -> bool {
        matches!(
            self,
            BodyToken::Note(_) | BodyToken::Rest { .. } | BodyToken::MultiNote { .. }
        )
    }

    pub fn is_layout(&self) -> bool {
        matches!(
            self,
            BodyToken::Space | BodyToken::LineBreak | BodyToken::Comment { .. }
        )
    }

    pub fn barline(&self) -> Option<BarlineKind> {
        match self {
            BodyToken::Barline(kind) => Some(*kind),
            _ => None,
        }
    }
}

/// A parsed tune.
#[derive(Debug, Clone)]
pub struct TuneDocument {
    pub headers: Vec<(char, String)>,
    pub body: Vec<BodyToken>,
    pub source: String,
}

/// Structural equality ignores `source`.
impl PartialEq for TuneDocument {
    fn eq(&self, other: &Self) -> bool {
        self.headers == other.headers && self.body == other.body
    }
}

impl Eq for TuneDocument {}

impl TuneDocument {
    /// First value of header `field`.
    pub fn header(&self, field: char) -> Option<&str> {
        self.headers
            .iter()
            .find(|(f, _)| *f == field)
            .map(|(_, v)| v.as_str())
    }

    pub fn has_repeat_sign(&self) -> bool {
        self.body
            .iter()
            .any(|t| t.barline().is_some_and(BarlineKind::is_repeat))
    }
}

/// Closed set of reasons a text is rejected as ABC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseErrorKind {
    #[serde(rename = "missing_X_header")]
    MissingXHeader,
    UnbalancedBracket,
    UnbalancedQuote,
    BadDuration,
    UnknownSymbol,
    EmptyBody,
}

impl ParseErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ParseErrorKind::MissingXHeader => "missing_X_header",
            ParseErrorKind::UnbalancedBracket => "unbalanced_bracket",
            ParseErrorKind::UnbalancedQuote => "unbalanced_quote",
            ParseErrorKind::BadDuration => "bad_duration",
            ParseErrorKind::UnknownSymbol => "unknown_symbol",
            ParseErrorKind::EmptyBody => "empty_body",
        }
    }
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Position is 1-based, columns count characters.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize)]
#[error("{line}:{column}: {kind}: {detail}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
    pub detail: String,
}
