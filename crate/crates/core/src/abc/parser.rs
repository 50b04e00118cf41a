use super::{
    Accidental, BarlineKind, BodyToken, BrokenDirection, Note, ParseError, ParseErrorKind,
    Rational, TuneDocument, MAX_DURATION_TERM,
};

/// Field letters that may appear as a whole line inside the body, or in `[X:...]` form.
const BODY_FIELDS: &[char] = &['K', 'L', 'M', 'Q', 'P', 'T', 'N', 'R'];
/// Header fields outside the supported subset: multi-voice and lyrics.
const REJECTED_FIELDS: &[char] = &['V', 'w', 'W'];
const DECORATION_SYMBOLS: &[char] = &['~', '.', 'H', 'L', 'M', 'O', 'P', 'S', 'T', 'u', 'v'];

type Result<T> = std::result::Result<T, ParseError>;

fn error(
    line: usize,
    column: usize,
    kind: ParseErrorKind,
    detail: impl Into<String>,
) -> ParseError {
    ParseError {
        line,
        column,
        kind,
        detail: detail.into(),
    }
}

fn field_line(line: &str) -> Option<(char, &str)> {
    let mut chars = line.chars();
    let field = chars.next()?;
    if field.is_ascii_alphabetic() && chars.next() == Some(':') {
        Some((field, &line[2..]))
    } else {
        None
    }
}

/// Parses a single tune: header lines (starting with exactly one `X:`),
/// then a body. The header block ends after the `K:` line, or at the first
/// line that is not a field.
pub fn parse_tune(text: &str) -> Result<TuneDocument> {
    let lines: Vec<&str> = text.split('\n').collect();
    let mut idx = 0;
    while idx < lines.len() && lines[idx].trim().is_empty() {
        idx += 1;
    }

    let mut headers = Vec::new();
    let mut seen_key = false;
    while idx < lines.len() && !seen_key {
        let raw = lines[idx].strip_suffix('\r').unwrap_or(lines[idx]);
        let Some((field, value)) = field_line(raw) else {
            break;
        };
        let line_no = idx + 1;
        if REJECTED_FIELDS.contains(&field) {
            return Err(error(
                line_no,
                1,
                ParseErrorKind::UnknownSymbol,
                format!("unsupported field {field}:"),
            ));
        }
        if field == 'X' && headers.iter().any(|(f, _)| *f == 'X') {
            return Err(error(
                line_no,
                1,
                ParseErrorKind::UnknownSymbol,
                "duplicate X: header",
            ));
        }
        let value = value.trim().to_string();
        validate_header(field, &value)
            .map_err(|detail| error(line_no, 3, ParseErrorKind::BadDuration, detail))?;
        if field == 'K' {
            seen_key = true;
        }
        headers.push((field, value));
        idx += 1;
    }

    if !headers.iter().any(|(f, _)| *f == 'X') {
        return Err(error(
            idx.min(lines.len().saturating_sub(1)) + 1,
            1,
            ParseErrorKind::MissingXHeader,
            "tune has no X: header",
        ));
    }

    let body_line = idx + 1;
    let body_text = if idx < lines.len() {
        lines[idx..].join("\n")
    } else {
        String::new()
    };
    let body = Lexer::new(&body_text, body_line).run()?;
    if body.iter().all(BodyToken::is_layout) {
        return Err(error(
            body_line,
            1,
            ParseErrorKind::EmptyBody,
            "tune body has no music",
        ));
    }

    Ok(TuneDocument {
        headers,
        body,
        source: text.to_string(),
    })
}

/// Tokenizes a body fragment with no headers, e.g. a motif or a melody line.
pub fn parse_fragment(text: &str) -> Result<Vec<BodyToken>> {
    Lexer::new(text, 1).run()
}

/// Splits a tunebook into tunes at blank lines. Returns each chunk with its
/// 1-based starting line in the book.
pub fn split_tunebook(text: &str) -> Vec<(usize, String)> {
    let mut tunes = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    let mut start = 0;
    for (i, line) in text.split('\n').enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            if !current.is_empty() {
                tunes.push((start, current.join("\n")));
                current.clear();
            }
        } else {
            if current.is_empty() {
                start = i + 1;
            }
            current.push(line);
        }
    }
    if !current.is_empty() {
        tunes.push((start, current.join("\n")));
    }
    tunes
}

fn validate_header(field: char, value: &str) -> std::result::Result<(), String> {
    match field {
        'L' => parse_fraction(value)
            .map(|_| ())
            .ok_or_else(|| format!("invalid default length L:{value}")),
        'M' => match value {
            "C" | "C|" | "none" | "" => Ok(()),
            _ => parse_fraction(value)
                .map(|_| ())
                .ok_or_else(|| format!("invalid meter M:{value}")),
        },
        'Q' => parse_tempo(value)
            .map(|_| ())
            .ok_or_else(|| format!("invalid tempo Q:{value}")),
        _ => Ok(()),
    }
}

/// Parses `n/d` with positive bounded terms.
pub(crate) fn parse_fraction(text: &str) -> Option<Rational> {
    let (num, den) = text.trim().split_once('/')?;
    let num = parse_bounded(num.trim())?;
    let den = parse_bounded(den.trim())?;
    Some(Rational::new(num, den))
}

fn parse_bounded(text: &str) -> Option<i64> {
    if text.is_empty() || text.len() > 6 || !text.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let value: i64 = text.parse().ok()?;
    (1..=MAX_DURATION_TERM).contains(&value).then_some(value)
}

/// Tempo as `(beat length in whole notes or None for the L unit, beats per minute)`.
/// Accepts `1/4=120`, `120` and either form preceded by a quoted label.
pub(crate) fn parse_tempo(text: &str) -> Option<(Option<Rational>, Rational)> {
    let mut rest = text.trim();
    if let Some(stripped) = rest.strip_prefix('"') {
        let end = stripped.find('"')?;
        rest = stripped[end + 1..].trim();
    }
    let (beat, bpm) = match rest.split_once('=') {
        Some((beat, bpm)) => (Some(parse_fraction(beat)?), bpm),
        None => (None, rest),
    };
    let bpm = parse_bounded(bpm.trim())?;
    Some((beat, Rational::from_integer(bpm)))
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    tokens: Vec<BodyToken>,
    slur_stack: Vec<(usize, usize)>,
}

impl Lexer {
    fn new(text: &str, first_line: usize) -> Self {
        Lexer {
            chars: text.chars().collect(),
            pos: 0,
            line: first_line,
            col: 1,
            tokens: Vec::new(),
            slur_stack: Vec::new(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, kind: ParseErrorKind, detail: impl Into<String>) -> ParseError {
        error(self.line, self.col, kind, detail)
    }

    fn at_line_start(&self) -> bool {
        self.pos == 0 || self.chars[self.pos - 1] == '\n'
    }

    fn last_significant(&self) -> Option<&BodyToken> {
        self.tokens.iter().rev().find(|t| !t.is_layout())
    }

    fn run(mut self) -> Result<Vec<BodyToken>> {
        while let Some(c) = self.peek() {
            if self.at_line_start() {
                if self.peek_at(1) == Some('%') && c == '%' {
                    return Err(self.err(
                        ParseErrorKind::UnknownSymbol,
                        "%% directives are not supported",
                    ));
                }
                if self.peek_at(1) == Some(':') && c.is_ascii_alphabetic() {
                    if BODY_FIELDS.contains(&c) {
                        self.field_line(c);
                        continue;
                    }
                    if REJECTED_FIELDS.contains(&c) || c == 'X' {
                        return Err(self.err(
                            ParseErrorKind::UnknownSymbol,
                            format!("field {c}: is not allowed in the body"),
                        ));
                    }
                }
            }
            self.token(c)?;
        }
        if let Some(&(line, column)) = self.slur_stack.last() {
            return Err(error(
                line,
                column,
                ParseErrorKind::UnbalancedBracket,
                "unclosed '('",
            ));
        }
        Ok(self.tokens)
    }

    fn field_line(&mut self, field: char) {
        self.bump();
        self.bump();
        let mut value = String::new();
        while let Some(c) = self.peek() {
            if c == '\n' {
                break;
            }
            self.bump();
            value.push(c);
        }
        let value = value.trim_end_matches('\r').trim().to_string();
        self.tokens.push(BodyToken::InlineField {
            field,
            value,
            bracketed: false,
        });
    }

    fn token(&mut self, c: char) -> Result<()> {
        match c {
            ' ' | '\t' => {
                while matches!(self.peek(), Some(' ' | '\t')) {
                    self.bump();
                }
                self.tokens.push(BodyToken::Space);
            }
            '\n' => {
                self.bump();
                self.tokens.push(BodyToken::LineBreak);
            }
            '\r' => {
                self.bump();
                if self.peek() == Some('\n') {
                    self.bump();
                }
                self.tokens.push(BodyToken::LineBreak);
            }
            '%' => {
                if self.peek_at(1) == Some('%') {
                    return Err(self.err(
                        ParseErrorKind::UnknownSymbol,
                        "%% directives are not supported",
                    ));
                }
                self.bump();
                let mut text = String::new();
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                    text.push(c);
                }
                let text = text.trim_end_matches('\r').to_string();
                self.tokens.push(BodyToken::Comment { text });
            }
            '"' => {
                let text = self.delimited('"', ParseErrorKind::UnbalancedQuote)?;
                self.tokens.push(BodyToken::ChordSymbol { text });
            }
            '!' => {
                let text = self.delimited('!', ParseErrorKind::UnknownSymbol)?;
                if text.is_empty() || text.contains(char::is_whitespace) {
                    return Err(self.err(ParseErrorKind::UnknownSymbol, "malformed !decoration!"));
                }
                self.tokens.push(BodyToken::Decoration {
                    text,
                    delimited: true,
                });
            }
            c if DECORATION_SYMBOLS.contains(&c) => {
                self.bump();
                self.tokens.push(BodyToken::Decoration {
                    text: c.to_string(),
                    delimited: false,
                });
            }
            '^' | '_' | '=' | 'A'..='G' | 'a'..='g' => {
                let note = self.note()?;
                self.tokens.push(BodyToken::Note(note));
            }
            'z' => {
                self.bump();
                let duration = self.duration()?;
                self.tokens.push(BodyToken::Rest { duration });
            }
            '[' => self.open_bracket()?,
            ']' => return Err(self.err(ParseErrorKind::UnbalancedBracket, "unmatched ']'")),
            '{' => self.grace_group()?,
            '}' => return Err(self.err(ParseErrorKind::UnbalancedBracket, "unmatched '}'")),
            '(' => match self.peek_at(1) {
                Some(d @ '2'..='9') => {
                    self.bump();
                    self.bump();
                    self.tokens.push(BodyToken::Tuplet {
                        n: d.to_digit(10).unwrap_or(3),
                    });
                }
                Some('0' | '1') => {
                    return Err(self.err(ParseErrorKind::UnknownSymbol, "invalid tuplet"));
                }
                _ => {
                    self.slur_stack.push((self.line, self.col));
                    self.bump();
                    self.tokens.push(BodyToken::SlurOpen);
                }
            },
            ')' => {
                if self.slur_stack.pop().is_none() {
                    return Err(self.err(ParseErrorKind::UnbalancedBracket, "unmatched ')'"));
                }
                self.bump();
                self.tokens.push(BodyToken::SlurClose);
            }
            '-' => {
                self.bump();
                self.tokens.push(BodyToken::Tie);
            }
            '>' | '<' => {
                let mut count = 0u8;
                while self.peek() == Some(c) {
                    self.bump();
                    count += 1;
                    if count > 3 {
                        return Err(
                            self.err(ParseErrorKind::UnknownSymbol, "broken rhythm longer than 3")
                        );
                    }
                }
                let direction = if c == '>' {
                    BrokenDirection::Right
                } else {
                    BrokenDirection::Left
                };
                self.tokens
                    .push(BodyToken::BrokenRhythm { direction, count });
            }
            '|' => {
                self.bump();
                let kind = match self.peek() {
                    Some(']') => {
                        self.bump();
                        BarlineKind::Final
                    }
                    Some('|') => {
                        self.bump();
                        BarlineKind::Double
                    }
                    Some(':') => {
                        self.bump();
                        BarlineKind::RepeatStart
                    }
                    _ => BarlineKind::Single,
                };
                self.tokens.push(BodyToken::Barline(kind));
                self.after_barline()?;
            }
            ':' => {
                let kind = match (self.peek_at(1), self.peek_at(2), self.peek_at(3)) {
                    (Some(':'), _, _) => {
                        self.bump();
                        self.bump();
                        BarlineKind::RepeatBoth
                    }
                    (Some('|'), Some('|'), Some(':')) => {
                        for _ in 0..4 {
                            self.bump();
                        }
                        BarlineKind::RepeatBoth
                    }
                    (Some('|'), Some(':'), _) => {
                        for _ in 0..3 {
                            self.bump();
                        }
                        BarlineKind::RepeatBoth
                    }
                    (Some('|'), _, _) => {
                        self.bump();
                        self.bump();
                        BarlineKind::RepeatEnd
                    }
                    _ => return Err(self.err(ParseErrorKind::UnknownSymbol, "stray ':'")),
                };
                self.tokens.push(BodyToken::Barline(kind));
                self.after_barline()?;
            }
            '0'..='9' => {
                if matches!(self.last_significant(), Some(BodyToken::Barline(_))) {
                    let number = self.volta_number()?;
                    self.tokens.push(BodyToken::Volta {
                        number,
                        bracketed: false,
                    });
                } else {
                    return Err(self.err(ParseErrorKind::BadDuration, "length without a note"));
                }
            }
            other => {
                return Err(self.err(
                    ParseErrorKind::UnknownSymbol,
                    format!("unexpected {other:?}"),
                ))
            }
        }
        Ok(())
    }

    fn after_barline(&mut self) -> Result<()> {
        if matches!(self.peek(), Some('0'..='9')) {
            let number = self.volta_number()?;
            self.tokens.push(BodyToken::Volta {
                number,
                bracketed: false,
            });
        }
        Ok(())
    }

    fn volta_number(&mut self) -> Result<u32> {
        let mut digits = String::new();
        while let Some(d @ '0'..='9') = self.peek() {
            if digits.len() >= 3 {
                return Err(self.err(ParseErrorKind::BadDuration, "volta number too long"));
            }
            self.bump();
            digits.push(d);
        }
        digits
            .parse()
            .map_err(|_| self.err(ParseErrorKind::BadDuration, "invalid volta number"))
    }

    /// Reads up to the closing `delim` on the same line; opening delimiter is current.
    fn delimited(&mut self, delim: char, kind: ParseErrorKind) -> Result<String> {
        let (line, col) = (self.line, self.col);
        self.bump();
        let mut text = String::new();
        loop {
            match self.peek() {
                Some(c) if c == delim => {
                    self.bump();
                    return Ok(text);
                }
                Some('\n' | '\r') | None => {
                    return Err(error(line, col, kind, format!("unclosed {delim:?}")));
                }
                Some(c) => {
                    self.bump();
                    text.push(c);
                }
            }
        }
    }

    fn note(&mut self) -> Result<Note> {
        let accidental = match (self.peek(), self.peek_at(1)) {
            (Some('^'), Some('^')) => {
                self.bump();
                self.bump();
                Accidental::DoubleSharp
            }
            (Some('^'), _) => {
                self.bump();
                Accidental::Sharp
            }
            (Some('_'), Some('_')) => {
                self.bump();
                self.bump();
                Accidental::DoubleFlat
            }
            (Some('_'), _) => {
                self.bump();
                Accidental::Flat
            }
            (Some('='), _) => {
                self.bump();
                Accidental::Natural
            }
            _ => Accidental::None,
        };
        let pitch = match self.peek() {
            Some(p @ ('A'..='G' | 'a'..='g')) => {
                self.bump();
                p
            }
            _ => return Err(self.err(ParseErrorKind::UnknownSymbol, "accidental without a note")),
        };
        let mut octave_shift = 0i32;
        while let Some(m @ ('\'' | ',')) = self.peek() {
            self.bump();
            octave_shift += if m == '\'' { 1 } else { -1 };
            if octave_shift.abs() > 8 {
                return Err(self.err(ParseErrorKind::UnknownSymbol, "octave marks out of range"));
            }
        }
        let duration = self.duration()?;
        Ok(Note {
            pitch,
            accidental,
            octave_shift,
            duration,
        })
    }

    fn digits(&mut self) -> Result<Option<i64>> {
        let mut digits = String::new();
        while let Some(d @ '0'..='9') = self.peek() {
            self.bump();
            digits.push(d);
        }
        if digits.is_empty() {
            return Ok(None);
        }
        parse_bounded(&digits).map(Some).ok_or_else(|| {
            self.err(
                ParseErrorKind::BadDuration,
                format!("invalid length {digits}"),
            )
        })
    }

    /// `2`, `/`, `//`, `/4`, `3/2`, `3/` -> multiplier of the unit length.
    fn duration(&mut self) -> Result<Rational> {
        let num = self.digits()?.unwrap_or(1);
        if self.peek() != Some('/') {
            return Ok(Rational::from_integer(num));
        }
        self.bump();
        let den = match self.digits()? {
            Some(den) => den,
            None => {
                let mut den = 2i64;
                while self.peek() == Some('/') {
                    self.bump();
                    den *= 2;
                    if den > MAX_DURATION_TERM {
                        return Err(self.err(ParseErrorKind::BadDuration, "too many '/'"));
                    }
                }
                if matches!(self.peek(), Some('0'..='9')) {
                    return Err(self.err(ParseErrorKind::BadDuration, "digits after '//'"));
                }
                den
            }
        };
        if self.peek() == Some('/') {
            return Err(self.err(ParseErrorKind::BadDuration, "malformed length"));
        }
        Ok(Rational::new(num, den))
    }

    /// True when `close` occurs later on the current line.
    fn closes_on_line(&self, close: char) -> bool {
        self.chars[self.pos + 1..]
            .iter()
            .take_while(|&&c| c != '\n' && c != '\r')
            .any(|&c| c == close)
    }

    fn open_bracket(&mut self) -> Result<()> {
        let (line, col) = (self.line, self.col);
        if !matches!(self.peek_at(1), Some('0'..='9')) && !self.closes_on_line(']') {
            return Err(self.err(ParseErrorKind::UnbalancedBracket, "unclosed '['"));
        }
        match (self.peek_at(1), self.peek_at(2)) {
            (Some('0'..='9'), _) => {
                self.bump();
                let number = self.volta_number()?;
                self.tokens.push(BodyToken::Volta {
                    number,
                    bracketed: true,
                });
            }
            (Some(field), Some(':')) if field.is_ascii_alphabetic() => {
                if !BODY_FIELDS.contains(&field) {
                    return Err(self.err(
                        ParseErrorKind::UnknownSymbol,
                        format!("inline field [{field}:] not supported"),
                    ));
                }
                self.bump();
                self.bump();
                self.bump();
                let mut value = String::new();
                loop {
                    match self.peek() {
                        Some(']') => {
                            self.bump();
                            break;
                        }
                        Some('\n' | '\r') | None => {
                            return Err(error(
                                line,
                                col,
                                ParseErrorKind::UnbalancedBracket,
                                "unclosed inline field",
                            ));
                        }
                        Some(c) => {
                            self.bump();
                            value.push(c);
                        }
                    }
                }
                let value = value.trim().to_string();
                if let Err(detail) = validate_header(field, &value) {
                    return Err(error(line, col, ParseErrorKind::BadDuration, detail));
                }
                self.tokens.push(BodyToken::InlineField {
                    field,
                    value,
                    bracketed: true,
                });
            }
            _ => {
                self.bump();
                let mut notes = Vec::new();
                loop {
                    match self.peek() {
                        Some(']') => {
                            self.bump();
                            break;
                        }
                        Some('^' | '_' | '=' | 'A'..='G' | 'a'..='g') => notes.push(self.note()?),
                        Some('\n' | '\r') | None => {
                            return Err(error(
                                line,
                                col,
                                ParseErrorKind::UnbalancedBracket,
                                "unclosed '['",
                            ));
                        }
                        Some(other) => {
                            return Err(self.err(
                                ParseErrorKind::UnknownSymbol,
                                format!("unexpected {other:?} inside chord"),
                            ));
                        }
                    }
                }
                if notes.is_empty() {
                    return Err(error(
                        line,
                        col,
                        ParseErrorKind::UnknownSymbol,
                        "empty chord",
                    ));
                }
                let duration = self.duration()?;
                self.tokens.push(BodyToken::MultiNote { notes, duration });
            }
        }
        Ok(())
    }

    fn grace_group(&mut self) -> Result<()> {
        let (line, col) = (self.line, self.col);
        if !self.closes_on_line('}') {
            return Err(self.err(ParseErrorKind::UnbalancedBracket, "unclosed '{'"));
        }
        self.bump();
        let acciaccatura = if self.peek() == Some('/') {
            self.bump();
            true
        } else {
            false
        };
        let mut inner = Vec::new();
        loop {
            match self.peek() {
                Some('}') => {
                    self.bump();
                    break;
                }
                Some('^' | '_' | '=' | 'A'..='G' | 'a'..='g') => {
                    inner.push(BodyToken::Note(self.note()?))
                }
                Some('{') => return Err(self.err(ParseErrorKind::UnbalancedBracket, "nested '{'")),
                Some('\n' | '\r') | None => {
                    return Err(error(
                        line,
                        col,
                        ParseErrorKind::UnbalancedBracket,
                        "unclosed '{'",
                    ));
                }
                Some(other) => {
                    return Err(self.err(
                        ParseErrorKind::UnknownSymbol,
                        format!("unexpected {other:?} inside grace notes"),
                    ));
                }
            }
        }
        if inner.is_empty() {
            return Err(error(
                line,
                col,
                ParseErrorKind::UnknownSymbol,
                "empty grace group",
            ));
        }
        self.tokens.push(BodyToken::GraceGroup {
            acciaccatura,
            inner,
        });
        Ok(())
    }
}
